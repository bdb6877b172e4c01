//! Deterministic synthetic aisles, shelf scenes and noisy detection sets.
//!
//! Stands in for a real feature-based detector: a ground-truth scene is laid
//! out from a planogram, then [`corrupt`] drops, jitters, relabels and adds
//! detections the way an unconstrained recognizer would.

mod benchmark;
mod instances;
mod render;
pub mod rng;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{BBox, Detection, GridPos, ModelError, Product, ProductId, ReferenceNode, ReferencePlanogram, ShelfGraph};

pub use benchmark::{generate_benchmark, BenchmarkConfig, BenchmarkScene};
pub use instances::{random_instance, RandomInstance};
pub use render::{product_texture, render_scene, RenderedScene, TextureRule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid {field}: {value} ({reason})")]
    InvalidParam { field: &'static str, value: f64, reason: &'static str },
    #[error("item {node:?} at {bbox:?} falls outside the {width}x{height} canvas")]
    CanvasOverflow { node: String, bbox: BBox, width: usize, height: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_rate(field: &'static str, value: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SimError::InvalidParam { field, value, reason: "must be in [0, 1]" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Probability that a present item is not detected.
    pub miss_rate: f64,
    /// Expected spurious detections per present item.
    pub fp_rate: f64,
    /// Probability that a detection carries a similar product's label.
    pub confusion_rate: f64,
    /// Gaussian jitter on box coordinates, pixels; truncated at 3 sigma.
    pub jitter_sigma: f64,
    pub seed: u64,
    /// Products with catalog-adjacent ids are grouped in categories of this size.
    pub category_size: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { miss_rate: 0.0, fp_rate: 0.0, confusion_rate: 0.0, jitter_sigma: 0.0, seed: 0, category_size: 4 }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), SimError> {
        check_rate("miss_rate", self.miss_rate)?;
        check_rate("fp_rate", self.fp_rate)?;
        check_rate("confusion_rate", self.confusion_rate)?;
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(SimError::InvalidParam { field: "jitter_sigma", value: self.jitter_sigma, reason: "must be >= 0" });
        }
        if self.category_size == 0 {
            return Err(SimError::InvalidParam { field: "category_size", value: 0.0, reason: "must be >= 1" });
        }
        Ok(())
    }
}

/// An item physically present on the shelf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneItem {
    pub node_id: String,
    pub product: ProductId,
    pub bbox: BBox,
}

/// What is really on the shelf: present items and void facings.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthScene {
    pub planogram: ReferencePlanogram,
    pub items: Vec<SceneItem>,
    pub absent: Vec<String>,
    pub width: usize,
    pub height: usize,
}

impl GroundTruthScene {
    pub fn item(&self, node_id: &str) -> Option<&SceneItem> {
        self.items.iter().find(|i| i.node_id == node_id)
    }

    /// `(product, box)` pairs for evaluation.
    pub fn truth_boxes(&self) -> Vec<(ProductId, BBox)> {
        self.items.iter().map(|i| (i.product.clone(), i.bbox)).collect()
    }
}

fn pad_width(max_value: usize, min: usize) -> usize {
    max_value.max(1).to_string().len().max(min)
}

pub fn node_id_for(row: usize, col: usize, width: usize) -> String {
    format!("r{row:0width$}c{col:0width$}")
}

/// Catalog of `n` products named `p000`, `p001`, ...
pub fn catalog(n: usize) -> Vec<Product> {
    let w = pad_width(n.saturating_sub(1), 3);
    (0..n).map(|i| Product::new(ProductId::new(format!("p{i:0w$}")).expect("valid id"))).collect()
}

/// A full `rows`×`cols` grid planogram with i.i.d. product draws from a
/// catalog of `n_products` (so products may repeat as multiple facings).
pub fn gen_planogram(rows: usize, cols: usize, n_products: usize, seed: u64) -> Result<ReferencePlanogram, SimError> {
    if rows == 0 || cols == 0 {
        return Err(SimError::InvalidParam { field: "rows/cols", value: 0.0, reason: "grid dimensions must be positive" });
    }
    if n_products == 0 {
        return Err(SimError::InvalidParam { field: "n_products", value: 0.0, reason: "must be >= 1" });
    }
    let mut rng = rng::stream(seed, rng::STREAM_PLANOGRAM);
    let products = catalog(n_products);
    let w = pad_width(rows.max(cols) - 1, 2);
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let p = &products[rng.random_range(0..n_products)];
            nodes.push(ReferenceNode {
                node_id: node_id_for(r, c, w),
                product: p.id.clone(),
                grid_pos: GridPos::new(r as i32, c as i32),
            });
        }
    }
    Ok(ReferencePlanogram::new(products, nodes, None)?)
}

/// Sub-planogram of the facings with grid rows in `rows` and columns in
/// `cols` (inclusive). Node ids are kept; grid positions are rebased to 0.
pub fn crop(
    planogram: &ReferencePlanogram,
    rows: std::ops::RangeInclusive<i32>,
    cols: std::ops::RangeInclusive<i32>,
) -> Result<ReferencePlanogram, SimError> {
    let nodes: Vec<ReferenceNode> = planogram
        .nodes()
        .iter()
        .filter(|n| rows.contains(&n.grid_pos.row) && cols.contains(&n.grid_pos.col))
        .map(|n| ReferenceNode {
            grid_pos: GridPos::new(n.grid_pos.row - rows.start(), n.grid_pos.col - cols.start()),
            ..n.clone()
        })
        .collect();
    Ok(ReferencePlanogram::new(planogram.catalog().to_vec(), nodes, None)?)
}

/// Lay out a planogram on a regular shelf grid: facing (r, c) occupies
/// `(c·cell_w, r·cell_h, 0.9·cell_w, 0.9·cell_h)`. Each facing is void with
/// probability `void_rate`.
pub fn gen_scene(
    planogram: &ReferencePlanogram,
    cell_w: f64,
    cell_h: f64,
    void_rate: f64,
    seed: u64,
) -> Result<GroundTruthScene, SimError> {
    if !(cell_w > 0.0 && cell_h > 0.0) {
        return Err(SimError::InvalidParam { field: "cell size", value: cell_w.min(cell_h), reason: "must be positive" });
    }
    check_rate("void_rate", void_rate)?;
    let mut rng = rng::stream(seed, rng::STREAM_SCENE);
    let mut items = Vec::new();
    let mut absent = Vec::new();
    let (mut max_row, mut max_col) = (0, 0);
    for n in planogram.nodes() {
        max_row = max_row.max(n.grid_pos.row);
        max_col = max_col.max(n.grid_pos.col);
        if rng.random_bool(void_rate) {
            absent.push(n.node_id.clone());
            continue;
        }
        let bbox = BBox::new(
            f64::from(n.grid_pos.col) * cell_w,
            f64::from(n.grid_pos.row) * cell_h,
            cell_w * 0.9,
            cell_h * 0.9,
        )?;
        items.push(SceneItem { node_id: n.node_id.clone(), product: n.product.clone(), bbox });
    }
    Ok(GroundTruthScene {
        planogram: planogram.clone(),
        items,
        absent,
        width: ((f64::from(max_col) + 1.0) * cell_w).ceil() as usize,
        height: ((f64::from(max_row) + 1.0) * cell_h).ceil() as usize,
    })
}

fn truncated_normal<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    loop {
        let v: f64 = normal.sample(rng);
        if v.abs() <= 3.0 * sigma {
            return v;
        }
    }
}

/// Similar products: the other members of the catalog-order category.
fn siblings<'a>(catalog: &'a [ProductId], product: &ProductId, category_size: usize) -> &'a [ProductId] {
    match catalog.binary_search(product) {
        Ok(i) => {
            let start = (i / category_size) * category_size;
            let end = (start + category_size).min(catalog.len());
            &catalog[start..end]
        }
        Err(_) => &[],
    }
}

/// Emulate an unconstrained detector on a ground-truth scene.
///
/// Per present item, in node order: drop with `miss_rate`, jitter the box,
/// relabel to a same-category product with `confusion_rate`. Then add
/// Poisson(`fp_rate`·items) spurious boxes of nominal item size, placed
/// uniformly with random catalog labels. Detection ids are assigned after a
/// seeded shuffle.
pub fn corrupt(gt: &GroundTruthScene, noise: &NoiseParams) -> Result<Vec<Detection>, SimError> {
    noise.validate()?;
    let mut rng = rng::stream(noise.seed, rng::STREAM_CORRUPT);
    let mut catalog: Vec<ProductId> = gt.planogram.catalog().iter().map(|p| p.id.clone()).collect();
    catalog.sort();

    let mut out: Vec<(ProductId, BBox, f64)> = Vec::new();
    for item in &gt.items {
        if rng.random_bool(noise.miss_rate) {
            continue;
        }
        let b = item.bbox;
        let dx = truncated_normal(&mut rng, noise.jitter_sigma);
        let dy = truncated_normal(&mut rng, noise.jitter_sigma);
        let dw = truncated_normal(&mut rng, noise.jitter_sigma);
        let dh = truncated_normal(&mut rng, noise.jitter_sigma);
        let bbox = BBox::new(b.x + dx, b.y + dy, (b.w + dw).max(1.0), (b.h + dh).max(1.0))?;
        let mut product = item.product.clone();
        if rng.random_bool(noise.confusion_rate) {
            let others: Vec<&ProductId> = siblings(&catalog, &item.product, noise.category_size)
                .iter()
                .filter(|p| **p != item.product)
                .collect();
            if !others.is_empty() {
                product = others[rng.random_range(0..others.len())].clone();
            }
        }
        let confidence = f64::from(rng.random_range(12u32..=60));
        out.push((product, bbox, confidence));
    }

    let lambda = noise.fp_rate * gt.items.len() as f64;
    let n_fp = if lambda > 0.0 {
        Poisson::new(lambda).expect("lambda > 0").sample(&mut rng) as usize
    } else {
        0
    };
    let (nominal_w, nominal_h) = nominal_item_size(gt);
    for _ in 0..n_fp {
        let x = rng.random::<f64>() * (gt.width as f64 - nominal_w).max(0.0);
        let y = rng.random::<f64>() * (gt.height as f64 - nominal_h).max(0.0);
        let product = catalog[rng.random_range(0..catalog.len())].clone();
        let confidence = f64::from(rng.random_range(8u32..=30));
        out.push((product, BBox::new(x, y, nominal_w, nominal_h)?, confidence));
    }

    out.shuffle(&mut rng);
    let w = pad_width(out.len().saturating_sub(1), 3);
    out.into_iter()
        .enumerate()
        .map(|(i, (product, bbox, confidence))| Ok(Detection::new(format!("d{i:0w$}"), product, bbox, confidence)?))
        .collect()
}

/// Mean size of the present items (or a tenth of the canvas when empty).
pub fn nominal_item_size(gt: &GroundTruthScene) -> (f64, f64) {
    if gt.items.is_empty() {
        return ((gt.width as f64 / 10.0).max(1.0), (gt.height as f64 / 10.0).max(1.0));
    }
    let n = gt.items.len() as f64;
    (
        gt.items.iter().map(|i| i.bbox.w).sum::<f64>() / n,
        gt.items.iter().map(|i| i.bbox.h).sum::<f64>() / n,
    )
}

/// Placed products in node order, without repeats.
pub fn placed_products(planogram: &ReferencePlanogram) -> Vec<ProductId> {
    let mut seen = BTreeMap::new();
    for i in 0..planogram.len() {
        seen.entry(planogram.product(i).clone()).or_insert(i);
    }
    seen.into_keys().collect()
}
