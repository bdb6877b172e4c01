use anyhow::{bail, Context, Result};
use planogram_core::eval::{match_detections, EvalResult, Stage, StageReport};
use planogram_core::io::{load_detections, load_ground_truth, load_planogram, Manifest, ManifestScene};
use planogram_core::pipeline::{run_pipeline, PipelineParams};
use planogram_core::verify::{Matcher, NoMatcher, OracleMatcher, ZnccMatcher};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{EvaluateArgs, MatcherKind};
use crate::config::{iou_threshold, pipeline_params, ConfigFile};

#[derive(Debug, Serialize)]
struct EvaluationReport {
    scenes: Vec<String>,
    iou_threshold: f64,
    stages: Vec<StageReport>,
}

pub fn run(args: EvaluateArgs) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let params = pipeline_params(&args.params, &cfg)?;
    let iou = iou_threshold(args.iou_threshold, &cfg)?;
    let kind = args.matcher.or(cfg.matcher).unwrap_or(MatcherKind::Oracle);
    let manifest = Manifest::load(&args.manifest)?;

    let rows = manifest
        .scenes
        .par_iter()
        .map(|s| evaluate_scene(s, kind, &params, iou).with_context(|| format!("scene {}", s.name)))
        .collect::<Result<Vec<_>>>()?;

    let stages = args.stage.map(|s| vec![s]).unwrap_or_else(|| Stage::ALL.to_vec());
    let stages = stages
        .into_iter()
        .map(|stage| {
            let k = Stage::ALL.iter().position(|s| *s == stage).expect("known stage");
            StageReport::new(stage, rows.iter().map(|r| r[k]).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    for s in &stages {
        let a = &s.average;
        eprintln!("{:<12} P {:.3}  R {:.3}  F {:.3}", s.stage.as_str(), a.precision, a.recall, a.f_measure);
    }

    let report = EvaluationReport { scenes: manifest.scenes.iter().map(|s| s.name.clone()).collect(), iou_threshold: iou, stages };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(0)
}

fn evaluate_scene(s: &ManifestScene, kind: MatcherKind, params: &PipelineParams, iou: f64) -> Result<[EvalResult; 3]> {
    let planogram = load_planogram(&s.planogram)?;
    let truth = load_ground_truth(&s.ground_truth, &planogram)?;
    let detections = load_detections(&s.detections)?;
    let matcher: Box<dyn Matcher> = match kind {
        MatcherKind::Oracle => Box::new(OracleMatcher::from_scene(&truth)),
        MatcherKind::Zncc => {
            let (Some(scene), Some(templates)) = (&s.scene, &s.templates) else {
                bail!("the zncc matcher needs scene and templates entries in the manifest");
            };
            Box::new(ZnccMatcher::load(scene, templates)?)
        }
        MatcherKind::None => Box::new(NoMatcher),
    };
    let out = run_pipeline(std::slice::from_ref(&planogram), &detections, matcher.as_ref(), params)?;
    let gt = truth.truth_boxes();
    Ok(Stage::ALL.map(|stage| match_detections(&out.stage_detections(stage), &gt, iou).result))
}
