use std::collections::BTreeMap;
use std::path::Path;

use crate::image::{GrayImage, ImageError};
use crate::model::{BBox, ProductId};

use super::proposal::{Matcher, Proposal, ProposalQuery};

pub const DEFAULT_SCALES: [f64; 3] = [0.8, 1.0, 1.25];

/// Zero-mean normalized cross-correlation of two equally sized images, in
/// [-1, 1]. Zero when either side has no variance.
pub fn zncc(template: &GrayImage, window: &GrayImage) -> f64 {
    assert_eq!((template.width(), template.height()), (window.width(), window.height()), "size mismatch");
    let t: Vec<f64> = template.data().iter().map(|&v| f64::from(v)).collect();
    let stats = Stats::of(&t);
    zncc_with(&t, &stats, window, 0, 0, template.width(), template.height())
}

/// [`zncc`] of `template` against the same-sized window of `scene` whose
/// top-left corner is (`x`, `y`). `None` if the window leaves the scene.
pub fn zncc_at(template: &GrayImage, scene: &GrayImage, x: usize, y: usize) -> Option<f64> {
    if x + template.width() > scene.width() || y + template.height() > scene.height() {
        return None;
    }
    let t: Vec<f64> = template.data().iter().map(|&v| f64::from(v)).collect();
    let stats = Stats::of(&t);
    Some(zncc_with(&t, &stats, scene, x, y, template.width(), template.height()))
}

struct Stats {
    mean: f64,
    /// Sum of squared deviations.
    ss: f64,
}

impl Stats {
    fn of(v: &[f64]) -> Self {
        let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
        let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self { mean, ss }
    }
}

fn zncc_with(t: &[f64], ts: &Stats, scene: &GrayImage, x: usize, y: usize, w: usize, h: usize) -> f64 {
    let n = (w * h) as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut cross = 0.0;
    for row in 0..h {
        let base = (y + row) * scene.width() + x;
        let line = &scene.data()[base..base + w];
        for (col, &v) in line.iter().enumerate() {
            let v = f64::from(v);
            sum += v;
            sum_sq += v * v;
            cross += (t[row * w + col] - ts.mean) * v;
        }
    }
    let w_ss = sum_sq - sum * sum / n;
    // Relative guard: integer images have either zero or >= ~1 variance.
    if ts.ss <= 1e-9 || w_ss <= 1e-9 * (1.0 + sum_sq) {
        return 0.0;
    }
    // Σ(T-μT)(W-μW) = Σ(T-μT)W since Σ(T-μT) = 0.
    (cross / (ts.ss.sqrt() * w_ss.sqrt())).clamp(-1.0, 1.0)
}

/// Slide `template`, rescaled by each of `scales`, over the placements whose
/// window center falls inside `roi` and whose window fits in the scene.
/// The stride is an eighth of the smaller template side. Returns the local
/// maxima of each score map that are strictly above all 8 neighbors and
/// above zero; `raw_score = max(0, zncc)`.
pub fn zncc_match(template: &GrayImage, scene: &GrayImage, roi: &BBox, scales: &[f64]) -> Vec<Proposal> {
    let mut out = Vec::new();
    for &s in scales {
        let tw = ((template.width() as f64 * s).round() as usize).max(1);
        let th = ((template.height() as f64 * s).round() as usize).max(1);
        if tw > scene.width() || th > scene.height() {
            continue;
        }
        let scaled = template.resize_nearest(tw, th);
        let t: Vec<f64> = scaled.data().iter().map(|&v| f64::from(v)).collect();
        let ts = Stats::of(&t);
        let stride = ((tw.min(th) as f64 / 8.0).round() as usize).max(1);

        // top-left ranges keeping the window center inside the roi and the window inside the scene
        let range = |lo: f64, hi: f64, size: usize, limit: usize| -> Option<(usize, usize)> {
            let half = size as f64 / 2.0;
            let first = (lo - half).ceil().max(0.0);
            let last = (hi - half).floor().min((limit - size) as f64);
            (first <= last).then_some((first as usize, last as usize))
        };
        let (Some((x0, x1)), Some((y0, y1))) =
            (range(roi.x, roi.right(), tw, scene.width()), range(roi.y, roi.bottom(), th, scene.height()))
        else {
            continue;
        };
        let xs: Vec<usize> = (x0..=x1).step_by(stride).collect();
        let ys: Vec<usize> = (y0..=y1).step_by(stride).collect();
        let map: Vec<Vec<f64>> = ys
            .iter()
            .map(|&y| xs.iter().map(|&x| zncc_with(&t, &ts, scene, x, y, tw, th)).collect())
            .collect();

        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                let v = map[j][i];
                if v <= 0.0 {
                    continue;
                }
                let mut is_max = true;
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (nj, ni) = (j as i64 + dj, i as i64 + di);
                        if nj < 0 || ni < 0 || nj >= ys.len() as i64 || ni >= xs.len() as i64 {
                            continue;
                        }
                        if map[nj as usize][ni as usize] >= v {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    let bbox = BBox::new(x as f64, y as f64, tw as f64, th as f64).expect("positive size");
                    out.push(Proposal { bbox, raw_score: v });
                }
            }
        }
    }
    out
}

/// Template matching against a scene image with one template per product.
#[derive(Debug, Clone)]
pub struct ZnccMatcher {
    scene: GrayImage,
    templates: BTreeMap<ProductId, GrayImage>,
    scales: Vec<f64>,
}

impl ZnccMatcher {
    pub fn new(scene: GrayImage, templates: BTreeMap<ProductId, GrayImage>) -> Self {
        Self { scene, templates, scales: DEFAULT_SCALES.to_vec() }
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    /// Load a scene graymap and a directory of `<product id>.pgm` templates.
    pub fn load(scene: impl AsRef<Path>, template_dir: impl AsRef<Path>) -> Result<Self, ImageError> {
        let scene = GrayImage::read_pgm(scene)?;
        let mut templates = BTreeMap::new();
        for entry in std::fs::read_dir(template_dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("pgm") {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let Ok(id) = ProductId::new(stem) else { continue };
            templates.insert(id, GrayImage::read_pgm(&path)?);
        }
        Ok(Self::new(scene, templates))
    }

    pub fn templates(&self) -> &BTreeMap<ProductId, GrayImage> {
        &self.templates
    }
}

impl Matcher for ZnccMatcher {
    fn name(&self) -> &str {
        "zncc"
    }

    fn find_proposals(&self, query: &ProposalQuery<'_>) -> Vec<Proposal> {
        match self.templates.get(query.product) {
            Some(t) => zncc_match(t, &self.scene, &query.roi, &self.scales),
            None => Vec::new(),
        }
    }

    fn max_raw_score(&self) -> Option<f64> {
        Some(1.0)
    }
}
