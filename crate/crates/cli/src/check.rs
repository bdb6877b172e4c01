use std::path::Path;

use anyhow::{bail, Context, Result};
use planogram_core::io::{load_planogram, read_json, DetectionsFile, GroundTruthFile};
use planogram_core::pipeline::run_pipeline;
use planogram_core::report::{render_svg, ComplianceReport};
use planogram_core::verify::{Matcher, NoMatcher, OracleMatcher, ZnccMatcher};
use planogram_core::ReferencePlanogram;

use crate::args::{CheckArgs, MatcherKind};
use crate::config::{pipeline_params, ConfigFile};

pub fn run(args: CheckArgs) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let params = pipeline_params(&args.params, &cfg)?;
    let references = args.planogram.iter().map(load_planogram).collect::<Result<Vec<_>, _>>()?;
    let file: DetectionsFile = read_json(&args.detections)?;
    let image = file.image;
    let detections = file.into_detections()?;

    let kind = args.matcher.or(cfg.matcher).unwrap_or(if args.scene.is_some() {
        MatcherKind::Zncc
    } else if args.ground_truth.is_some() {
        MatcherKind::Oracle
    } else {
        MatcherKind::None
    });
    let matcher: Box<dyn Matcher> = match kind {
        MatcherKind::Zncc => {
            let (Some(scene), Some(templates)) = (&args.scene, &args.templates) else {
                bail!("the zncc matcher needs --scene and --templates");
            };
            Box::new(ZnccMatcher::load(scene, templates).with_context(|| format!("loading {}", scene.display()))?)
        }
        MatcherKind::Oracle => {
            let Some(path) = &args.ground_truth else { bail!("the oracle matcher needs --ground-truth") };
            Box::new(oracle_from(path, &references)?)
        }
        MatcherKind::None => Box::new(NoMatcher),
    };

    let out = run_pipeline(&references, &detections, matcher.as_ref(), &params)?;
    let report = ComplianceReport::from(&out);
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.svg {
        let (w, h) = match image {
            Some(s) => (s.width, s.height),
            None => extent(&out.verification.observed),
        };
        let background = args.scene.as_ref().map(|p| p.to_string_lossy().into_owned());
        std::fs::write(path, render_svg(&out, w, h, background.as_deref()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "{} facings matched, {} verified, {} issue(s)",
        report.assignments.len() - report.verified.len(),
        report.verified.len(),
        report.issues.len()
    );
    Ok(if report.compliant { 0 } else { 1 })
}

/// Ground truth node ids refer to one of the references; use the first that accepts them.
fn oracle_from(path: &Path, references: &[ReferencePlanogram]) -> Result<OracleMatcher> {
    let file: GroundTruthFile = read_json(path)?;
    let mut last = None;
    for reference in references {
        match file.clone().into_scene(reference) {
            Ok(scene) => return Ok(OracleMatcher::from_scene(&scene)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.map(anyhow::Error::from).unwrap_or_else(|| anyhow::anyhow!("no planogram given")))
        .with_context(|| format!("{} does not fit any planogram", path.display()))
}

fn extent(observed: &planogram_core::ObservedPlanogram) -> (usize, usize) {
    use planogram_core::ShelfGraph;
    let (mut w, mut h) = (1.0f64, 1.0f64);
    for ix in 0..observed.len() {
        let b = observed.bbox(ix);
        w = w.max(b.x + b.w);
        h = h.max(b.y + b.h);
    }
    (w.ceil() as usize, h.ceil() as usize)
}
