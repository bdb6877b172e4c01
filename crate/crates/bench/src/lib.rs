//! Fixtures shared by the benchmarks.

use planogram_core::builder::{build_observed, BuilderParams};
use planogram_core::sim::{gen_planogram, gen_scene, generate_benchmark, render_scene, BenchmarkConfig, BenchmarkScene, TextureRule};
use planogram_core::verify::ZnccMatcher;
use planogram_core::{Detection, ObservedPlanogram, ReferencePlanogram, ShelfGraph};

/// A `rows`×`cols` aisle and the observed graph of a window of it
/// (`win_rows` rows starting at the top, `win_cols` columns starting at `col0`).
pub fn aisle_window(rows: usize, cols: usize, win_rows: i32, col0: i32, win_cols: i32) -> (ReferencePlanogram, ObservedPlanogram) {
    let aisle = gen_planogram(rows, cols, 40, 5).expect("valid size");
    let truth = gen_scene(&aisle, 60.0, 80.0, 0.0, 5).expect("valid scene");
    let dets: Vec<Detection> = truth
        .items
        .iter()
        .filter(|i| {
            let g = aisle.grid_pos(aisle.index_of(&i.node_id).expect("known node"));
            g.row < win_rows && (col0..col0 + win_cols).contains(&g.col)
        })
        .map(|i| Detection::new(format!("d-{}", i.node_id), i.product.clone(), i.bbox, 1.0).expect("valid detection"))
        .collect();
    let observed = build_observed(&dets, &BuilderParams::default()).expect("well-formed detections");
    (aisle, observed)
}

/// The first default benchmark scene.
pub fn noisy_scene() -> BenchmarkScene {
    generate_benchmark(&BenchmarkConfig { scenes: 1, ..Default::default() }).expect("valid config").remove(0)
}

pub fn zncc_for(scene: &BenchmarkScene) -> ZnccMatcher {
    let t = &scene.truth;
    let r = render_scene(t, &TextureRule::default(), t.width, t.height).expect("scene fits");
    ZnccMatcher::new(r.scene, r.templates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_covers_the_requested_cells() {
        let (aisle, observed) = aisle_window(4, 25, 3, 10, 4);
        assert_eq!(aisle.len(), 100);
        assert_eq!(observed.len(), 12);
    }
}
