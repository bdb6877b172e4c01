//! Detection scoring against ground truth: IoU-gated one-to-one matching and
//! per-image precision / recall / F-measure averaged over a dataset.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::model::{iou, BBox, Detection, ProductId};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot average over an empty dataset")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl EvalResult {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self { tp, fp, fn_, precision, recall, f_measure: harmonic(precision, recall) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMatch {
    pub result: EvalResult,
    /// (detection index, ground-truth index) pairs.
    pub pairs: Vec<(usize, usize)>,
}

/// Greedy one-to-one matching: among same-product pairs with IoU above
/// `iou_threshold`, take the highest IoU first (ties by detection id).
pub fn match_detections(dets: &[Detection], gt: &[(ProductId, BBox)], iou_threshold: f64) -> DetectionMatch {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        for (j, (p, b)) in gt.iter().enumerate() {
            if *p != d.product {
                continue;
            }
            let v = iou(&d.bbox, b);
            if v > iou_threshold {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| match b.0.total_cmp(&a.0) {
        Ordering::Equal => dets[a.1].det_id.cmp(&dets[b.1].det_id).then(a.2.cmp(&b.2)),
        o => o,
    });
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if det_used[i] || gt_used[j] {
            continue;
        }
        det_used[i] = true;
        gt_used[j] = true;
        pairs.push((i, j));
    }
    let tp = pairs.len();
    DetectionMatch { result: EvalResult::from_counts(tp, dets.len() - tp, gt.len() - tp), pairs }
}

/// Macro average: counts are summed, rates are the mean of per-image rates.
pub fn average(results: &[EvalResult]) -> Result<EvalResult, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let n = results.len() as f64;
    Ok(EvalResult {
        tp: results.iter().map(|r| r.tp).sum(),
        fp: results.iter().map(|r| r.fp).sum(),
        fn_: results.iter().map(|r| r.fn_).sum(),
        precision: results.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: results.iter().map(|r| r.recall).sum::<f64>() / n,
        f_measure: results.iter().map(|r| r.f_measure).sum::<f64>() / n,
    })
}

/// Labeled ground-truth boxes of one image.
pub type Truth = Vec<(ProductId, BBox)>;

/// Score each (detections, ground truth) image and macro-average.
pub fn evaluate_dataset(scenes: &[(Vec<Detection>, Truth)], iou_threshold: f64) -> Result<EvalResult, EvalError> {
    let per_image: Vec<EvalResult> =
        scenes.iter().map(|(d, g)| match_detections(d, g, iou_threshold).result).collect();
    average(&per_image)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Detection,
    Consistency,
    Verification,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Detection, Stage::Consistency, Stage::Verification];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Detection => "detection",
            Stage::Consistency => "consistency",
            Stage::Verification => "verification",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown stage {s:?}; expected detection, consistency or verification"))
    }
}

/// Per-stage macro averages plus the per-image rows behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub average: EvalResult,
    pub per_scene: Vec<EvalResult>,
}

impl StageReport {
    pub fn new(stage: Stage, per_scene: Vec<EvalResult>) -> Result<Self, EvalError> {
        Ok(Self { stage, average: average(&per_scene)?, per_scene })
    }
}
