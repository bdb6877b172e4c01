use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::Detection;

use super::{corrupt, gen_planogram, gen_scene, GroundTruthScene, NoiseParams, SimError};

/// A set of independent single-shelf scenes, each with its own reference
/// planogram drawn from a shared catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub scenes: usize,
    pub rows: usize,
    pub cols: usize,
    pub n_products: usize,
    pub cell_w: f64,
    pub cell_h: f64,
    pub void_rate: f64,
    /// Noise applied to every scene; its seed is replaced by the scene seed.
    pub noise: NoiseParams,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            scenes: 70,
            rows: 3,
            cols: 4,
            n_products: 40,
            cell_w: 60.0,
            cell_h: 80.0,
            void_rate: 0.05,
            noise: NoiseParams { miss_rate: 0.15, fp_rate: 0.25, confusion_rate: 0.05, jitter_sigma: 2.0, seed: 0, category_size: 4 },
            seed: 2016,
        }
    }
}

impl BenchmarkConfig {
    /// The same layout with all noise switched off.
    pub fn noise_free(self) -> Self {
        Self { void_rate: 0.0, noise: NoiseParams { seed: 0, category_size: self.noise.category_size, ..Default::default() }, ..self }
    }

    pub fn scene_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkScene {
    pub index: usize,
    pub seed: u64,
    pub truth: GroundTruthScene,
    pub detections: Vec<Detection>,
}

pub fn generate_benchmark(config: &BenchmarkConfig) -> Result<Vec<BenchmarkScene>, SimError> {
    config.noise.validate()?;
    (0..config.scenes)
        .into_par_iter()
        .map(|index| {
            let seed = config.scene_seed(index);
            let planogram = gen_planogram(config.rows, config.cols, config.n_products, seed)?;
            let truth = gen_scene(&planogram, config.cell_w, config.cell_h, config.void_rate, seed)?;
            let detections = corrupt(&truth, &NoiseParams { seed, ..config.noise })?;
            Ok(BenchmarkScene { index, seed, truth, detections })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShelfGraph;

    #[test]
    fn scenes_are_reproducible_and_distinct() {
        let cfg = BenchmarkConfig { scenes: 4, ..Default::default() };
        let a = generate_benchmark(&cfg).unwrap();
        let b = generate_benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].truth.planogram, a[1].truth.planogram);
        assert!(a.iter().all(|s| s.truth.planogram.len() == 12));
    }

    #[test]
    fn noise_free_has_no_voids() {
        let cfg = BenchmarkConfig { scenes: 3, ..Default::default() }.noise_free();
        for s in generate_benchmark(&cfg).unwrap() {
            assert!(s.truth.absent.is_empty());
            assert_eq!(s.detections.len(), 12);
        }
    }
}
