use std::path::Path;

use anyhow::{bail, Context, Result};
use planogram_core::builder::BuilderParams;
use planogram_core::iso::SolverParams;
use planogram_core::pipeline::PipelineParams;
use planogram_core::verify::VerifyParams;
use serde::Deserialize;

use crate::args::{MatcherKind, PipelineFlags};

/// Optional defaults shared by all subcommands. Flags override them.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub roi_margin: Option<f64>,
    pub accept_threshold: Option<f64>,
    pub overlap_iou_max: Option<f64>,
    pub matcher: Option<MatcherKind>,
    pub iou_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub scenes: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub products: Option<usize>,
    pub cell_w: Option<f64>,
    pub cell_h: Option<f64>,
    pub void_rate: Option<f64>,
    pub miss_rate: Option<f64>,
    pub fp_rate: Option<f64>,
    pub confusion_rate: Option<f64>,
    pub jitter_sigma: Option<f64>,
    pub category_size: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn pipeline_params(flags: &PipelineFlags, cfg: &ConfigFile) -> Result<PipelineParams> {
    let d = PipelineParams::default();
    let p = PipelineParams {
        builder: BuilderParams { alpha: flags.alpha.or(cfg.alpha).unwrap_or(d.builder.alpha), ..d.builder },
        solver: SolverParams {
            tau: flags.tau.or(cfg.tau).unwrap_or(d.solver.tau),
            lambda_penalty: flags.lambda.or(cfg.lambda).unwrap_or(d.solver.lambda_penalty),
            ..d.solver
        },
        verify: VerifyParams {
            roi_margin: flags.roi_margin.or(cfg.roi_margin).unwrap_or(d.verify.roi_margin),
            accept_threshold: flags.accept_threshold.or(cfg.accept_threshold).unwrap_or(d.verify.accept_threshold),
            overlap_iou_max: flags.overlap_iou_max.or(cfg.overlap_iou_max).unwrap_or(d.verify.overlap_iou_max),
        },
    };
    p.builder.validate()?;
    p.solver.validate()?;
    p.verify.validate()?;
    Ok(p)
}

pub fn iou_threshold(flag: Option<f64>, cfg: &ConfigFile) -> Result<f64> {
    let t = flag.or(cfg.iou_threshold).unwrap_or(planogram_core::eval::DEFAULT_IOU_THRESHOLD);
    if !(0.0..1.0).contains(&t) {
        bail!("iou_threshold must be in [0, 1), got {t}");
    }
    Ok(t)
}
