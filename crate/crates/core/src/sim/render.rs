use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::image::GrayImage;
use crate::model::ProductId;

use super::{nominal_item_size, rng, GroundTruthScene, SimError};

/// Procedural texture settings: value noise on a square lattice, bilinearly
/// interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextureRule {
    /// Lattice spacing in pixels.
    pub lattice: f64,
    pub low: u8,
    pub high: u8,
    pub background: u8,
}

impl Default for TextureRule {
    fn default() -> Self {
        Self { lattice: 6.0, low: 30, high: 225, background: 128 }
    }
}

/// Deterministic texture for a product; depends only on the id, the size and the rule.
pub fn product_texture(product: &ProductId, width: usize, height: usize, rule: &TextureRule) -> GrayImage {
    let mut rng = rng::stream(rng::fnv1a64(product.as_str().as_bytes()), rng::STREAM_TEXTURE);
    let lattice = rule.lattice.max(1.0);
    let gw = (width as f64 / lattice).ceil() as usize + 2;
    let gh = (height as f64 / lattice).ceil() as usize + 2;
    let (lo, hi) = (f64::from(rule.low), f64::from(rule.high.max(rule.low)));
    let grid: Vec<f64> = (0..gw * gh).map(|_| lo + rng.random::<f64>() * (hi - lo)).collect();
    let at = |gx: usize, gy: usize| grid[gy * gw + gx];

    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 / lattice;
        let (y0, ty) = (fy.floor() as usize, fy.fract());
        for x in 0..width {
            let fx = x as f64 / lattice;
            let (x0, tx) = (fx.floor() as usize, fx.fract());
            let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
            let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
            data.push((top * (1.0 - ty) + bottom * ty).round() as u16);
        }
    }
    GrayImage::new(width, height, 255, data).expect("sized buffer")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub scene: GrayImage,
    /// Pristine texture per catalog product at the nominal item size.
    pub templates: BTreeMap<ProductId, GrayImage>,
}

/// Paint every present item onto a mid-gray canvas.
pub fn render_scene(gt: &GroundTruthScene, rule: &TextureRule, width: usize, height: usize) -> Result<RenderedScene, SimError> {
    let (nw, nh) = nominal_item_size(gt);
    let (tw, th) = ((nw.round() as usize).max(1), (nh.round() as usize).max(1));
    let templates: BTreeMap<ProductId, GrayImage> = gt
        .planogram
        .catalog()
        .iter()
        .map(|p| (p.id.clone(), product_texture(&p.id, tw, th, rule)))
        .collect();

    let mut scene = GrayImage::filled(width, height, rule.background);
    for item in &gt.items {
        let b = item.bbox;
        if b.x < 0.0 || b.y < 0.0 || b.x + b.w > width as f64 + 0.5 || b.y + b.h > height as f64 + 0.5 {
            return Err(SimError::CanvasOverflow { node: item.node_id.clone(), bbox: b, width, height });
        }
        let w = (b.w.round() as usize).max(1);
        let h = (b.h.round() as usize).max(1);
        let template = &templates[&item.product];
        let patch = if (w, h) == (tw, th) { template.clone() } else { template.resize_nearest(w, h) };
        scene.blit(&patch, b.x.round() as i64, b.y.round() as i64);
    }
    Ok(RenderedScene { scene, templates })
}
