//! The pipeline driven entirely from files on disk.

use planogram_core::io::{
    load_detections, load_ground_truth, load_planogram, save_detections, save_ground_truth, save_planogram, write_json,
    ImageSize, Manifest, ManifestScene,
};
use planogram_core::prelude::*;
use planogram_core::report::ComplianceReport;
use planogram_core::sim::{gen_planogram, gen_scene, render_scene, TextureRule};
use planogram_core::image::GrayImage;
use tempfile::TempDir;

#[test]
fn simulated_files_check_like_the_in_memory_scene() {
    let dir = TempDir::new().unwrap();
    let p = gen_planogram(3, 4, 15, 31).unwrap();
    let truth = gen_scene(&p, 60.0, 80.0, 0.1, 31).unwrap();
    let dets = sim::corrupt(&truth, &NoiseParams { miss_rate: 0.2, fp_rate: 0.2, jitter_sigma: 1.5, seed: 31, ..Default::default() }).unwrap();
    save_planogram(dir.path().join("p.json"), &p).unwrap();
    save_ground_truth(dir.path().join("gt.json"), &truth).unwrap();
    save_detections(dir.path().join("d.json"), &dets, Some(ImageSize { width: truth.width, height: truth.height })).unwrap();

    let p2 = load_planogram(dir.path().join("p.json")).unwrap();
    let truth2 = load_ground_truth(dir.path().join("gt.json"), &p2).unwrap();
    let dets2 = load_detections(dir.path().join("d.json")).unwrap();
    assert_eq!(p2, p);
    assert_eq!(truth2, truth);
    assert_eq!(dets2, dets);

    let params = PipelineParams::default();
    let a = run_pipeline(std::slice::from_ref(&p), &dets, &OracleMatcher::from_scene(&truth), &params).unwrap();
    let b = run_pipeline(std::slice::from_ref(&p2), &dets2, &OracleMatcher::from_scene(&truth2), &params).unwrap();
    let (mut ra, mut rb) = (ComplianceReport::from(&a), ComplianceReport::from(&b));
    ra.timings = Default::default();
    rb.timings = Default::default();
    assert_eq!(ra, rb);
    let mut reported: Vec<_> = ra.issues.iter().map(|i| i.ref_node.clone()).collect();
    reported.sort();
    let mut absent = truth.absent.clone();
    absent.sort();
    assert_eq!(reported, absent);
}

#[test]
fn template_matching_from_disk_recovers_missed_items() {
    let dir = TempDir::new().unwrap();
    let p = gen_planogram(2, 5, 12, 2).unwrap();
    let truth = gen_scene(&p, 60.0, 80.0, 0.0, 2).unwrap();
    let dets = sim::corrupt(&truth, &NoiseParams { miss_rate: 0.25, seed: 2, ..Default::default() }).unwrap();
    let r = render_scene(&truth, &TextureRule::default(), truth.width, truth.height).unwrap();
    r.scene.write_pgm(dir.path().join("scene.pgm")).unwrap();
    std::fs::create_dir(dir.path().join("t")).unwrap();
    for (id, t) in &r.templates {
        t.write_pgm(dir.path().join("t").join(format!("{id}.pgm"))).unwrap();
    }
    assert_eq!(GrayImage::read_pgm(dir.path().join("scene.pgm")).unwrap(), r.scene);

    let m = ZnccMatcher::load(dir.path().join("scene.pgm"), dir.path().join("t")).unwrap();
    assert_eq!(m.templates().len(), r.templates.len());
    let out = run_pipeline(std::slice::from_ref(&p), &dets, &m, &PipelineParams::default()).unwrap();
    assert!(out.verification.issues.is_empty());
    assert_eq!(out.verification.verified.len(), 10 - dets.len());
}

#[test]
fn manifest_paths_resolve_against_its_directory() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("s0")).unwrap();
    let m = Manifest {
        scenes: vec![ManifestScene {
            name: "s0".into(),
            planogram: "s0/p.json".into(),
            detections: "s0/d.json".into(),
            ground_truth: "s0/gt.json".into(),
            scene: None,
            templates: Some("s0/t".into()),
        }],
    };
    write_json(dir.path().join("m.json"), &m).unwrap();
    let loaded = Manifest::load(dir.path().join("m.json")).unwrap();
    assert_eq!(loaded.scenes[0].planogram, dir.path().join("s0/p.json"));
    assert_eq!(loaded.scenes[0].templates.as_deref(), Some(dir.path().join("s0/t").as_path()));
    assert_eq!(loaded.scenes[0].scene, None);

    write_json(dir.path().join("empty.json"), &Manifest { scenes: vec![] }).unwrap();
    assert!(Manifest::load(dir.path().join("empty.json")).is_err());
}

#[test]
fn several_references_pick_the_one_on_the_shelf() {
    let refs: Vec<_> = (0..4).map(|s| gen_planogram(3, 4, 30, 100 + s).unwrap()).collect();
    let truth = gen_scene(&refs[2], 60.0, 80.0, 0.0, 9).unwrap();
    let dets = sim::corrupt(&truth, &NoiseParams { miss_rate: 0.1, seed: 9, ..Default::default() }).unwrap();
    let out = run_pipeline(&refs, &dets, &OracleMatcher::from_scene(&truth), &PipelineParams::default()).unwrap();
    assert_eq!(out.reference_index, 2);
    assert!(out.verification.issues.is_empty());
}
