use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use planogram_core::io::{save_detections, save_ground_truth, save_planogram, write_json, ImageSize, Manifest, ManifestScene};
use planogram_core::sim::{generate_benchmark, render_scene, BenchmarkConfig, BenchmarkScene, NoiseParams, TextureRule};

use crate::args::SimulateArgs;
use crate::config::ConfigFile;

/// Settings when `--benchmark` is not given: one scene with a few voids and
/// missed detections but otherwise clean.
fn plain_defaults() -> BenchmarkConfig {
    let b = BenchmarkConfig::default();
    BenchmarkConfig {
        scenes: 1,
        void_rate: 0.05,
        noise: NoiseParams { miss_rate: 0.15, category_size: b.noise.category_size, ..NoiseParams::default() },
        ..b
    }
}

pub fn resolve(args: &SimulateArgs, cfg: &ConfigFile) -> BenchmarkConfig {
    let base = if args.benchmark { BenchmarkConfig::default() } else { plain_defaults() };
    let n = base.noise;
    BenchmarkConfig {
        scenes: args.scenes.or(cfg.scenes).unwrap_or(base.scenes),
        rows: args.rows.or(cfg.rows).unwrap_or(base.rows),
        cols: args.cols.or(cfg.cols).unwrap_or(base.cols),
        n_products: args.products.or(cfg.products).unwrap_or(base.n_products),
        cell_w: args.cell_w.or(cfg.cell_w).unwrap_or(base.cell_w),
        cell_h: args.cell_h.or(cfg.cell_h).unwrap_or(base.cell_h),
        void_rate: args.void_rate.or(cfg.void_rate).unwrap_or(base.void_rate),
        noise: NoiseParams {
            miss_rate: args.miss_rate.or(cfg.miss_rate).unwrap_or(n.miss_rate),
            fp_rate: args.fp_rate.or(cfg.fp_rate).unwrap_or(n.fp_rate),
            confusion_rate: args.confusion_rate.or(cfg.confusion_rate).unwrap_or(n.confusion_rate),
            jitter_sigma: args.jitter_sigma.or(cfg.jitter_sigma).unwrap_or(n.jitter_sigma),
            category_size: args.category_size.or(cfg.category_size).unwrap_or(n.category_size),
            seed: 0,
        },
        seed: args.seed.or(cfg.seed).unwrap_or(base.seed),
    }
}

pub fn run(args: SimulateArgs) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let config = resolve(&args, &cfg);
    ensure!(config.scenes > 0, "scenes must be >= 1");
    let scenes = generate_benchmark(&config)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = Manifest { scenes: Vec::with_capacity(scenes.len()) };
    for scene in &scenes {
        let rel = if config.scenes == 1 { PathBuf::new() } else { PathBuf::from(format!("scene_{:03}", scene.index)) };
        write_scene(&args.out.join(&rel), scene)?;
        manifest.scenes.push(ManifestScene {
            name: format!("scene_{:03}", scene.index),
            planogram: rel.join("planogram.json"),
            detections: rel.join("detections.json"),
            ground_truth: rel.join("ground_truth.json"),
            scene: Some(rel.join("scene.pgm")),
            templates: Some(rel.join("templates")),
        });
    }
    write_json(args.out.join("manifest.json"), &manifest)?;
    write_json(args.out.join("config.json"), &config)?;
    eprintln!("wrote {} scene(s) to {}", scenes.len(), args.out.display());
    Ok(0)
}

fn write_scene(dir: &Path, scene: &BenchmarkScene) -> Result<()> {
    let truth = &scene.truth;
    let templates = dir.join("templates");
    fs::create_dir_all(&templates).with_context(|| format!("creating {}", templates.display()))?;
    save_planogram(dir.join("planogram.json"), &truth.planogram)?;
    save_ground_truth(dir.join("ground_truth.json"), truth)?;
    let size = ImageSize { width: truth.width, height: truth.height };
    save_detections(dir.join("detections.json"), &scene.detections, Some(size))?;

    let rendered = render_scene(truth, &TextureRule::default(), truth.width, truth.height)?;
    rendered.scene.write_pgm(dir.join("scene.pgm"))?;
    for (product, image) in &rendered.templates {
        image.write_pgm(templates.join(format!("{product}.pgm")))?;
    }
    Ok(())
}
