//! JSON file formats for planograms, detections, ground truth and datasets.
//!
//! Planogram:
//! `{ "products": [{"id", "width_mm"?, "height_mm"?}], "nodes": [{"node_id", "product", "row", "col"}], "edges"?: [[from, dir, to]] }`.
//! Edges are optional; when absent they are derived from grid positions.
//! Listed edges need only one direction each.
//!
//! Detections: `{ "image"?: {"width", "height"}, "detections": [{"det_id", "product", "x", "y", "w", "h", "confidence"}] }`.
//!
//! Ground truth: `{ "items": [{"node_id", "product"?, "x", "y", "w", "h"}], "absent": [node_id] }`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{
    symmetrize, BBox, Detection, Direction, Edge, GridPos, MetricSize, ModelError, Product, ProductId, ReferenceNode,
    ReferencePlanogram, ShelfGraph,
};
use crate::sim::{GroundTruthScene, SceneItem};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Io { path: path.into(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub id: ProductId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub node_id: String,
    pub product: ProductId,
    pub row: i32,
    pub col: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanogramFile {
    pub products: Vec<ProductEntry>,
    pub nodes: Vec<NodeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(String, String, String)>>,
}

impl PlanogramFile {
    pub fn from_planogram(p: &ReferencePlanogram) -> Self {
        Self {
            products: p
                .catalog()
                .iter()
                .map(|c| ProductEntry {
                    id: c.id.clone(),
                    width_mm: c.metric_size.map(|m| m.width_mm),
                    height_mm: c.metric_size.map(|m| m.height_mm),
                })
                .collect(),
            nodes: p
                .nodes()
                .iter()
                .map(|n| NodeEntry {
                    node_id: n.node_id.clone(),
                    product: n.product.clone(),
                    row: n.grid_pos.row,
                    col: n.grid_pos.col,
                })
                .collect(),
            edges: None,
        }
    }

    /// Same as [`from_planogram`](Self::from_planogram) but listing every directed edge.
    pub fn with_edges(p: &ReferencePlanogram) -> Self {
        let edges = p.edges().into_iter().map(|e| (e.from, e.dir.to_string(), e.to)).collect();
        Self { edges: Some(edges), ..Self::from_planogram(p) }
    }

    pub fn into_planogram(self) -> Result<ReferencePlanogram, IoError> {
        let catalog = self
            .products
            .into_iter()
            .map(|e| {
                let metric_size = match (e.width_mm, e.height_mm) {
                    (Some(w), Some(h)) => Some(MetricSize { width_mm: w, height_mm: h }),
                    (None, None) => None,
                    _ => {
                        return Err(IoError::Invalid(format!("product {}: give both width_mm and height_mm or neither", e.id)))
                    }
                };
                Ok(Product { id: e.id, metric_size })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| ReferenceNode { node_id: n.node_id, product: n.product, grid_pos: GridPos::new(n.row, n.col) })
            .collect();
        let edges = match self.edges {
            None => None,
            Some(list) => {
                let parsed = list
                    .into_iter()
                    .map(|(a, d, b)| Ok(Edge::new(a, d.parse::<Direction>()?, b)))
                    .collect::<Result<Vec<_>, ModelError>>()?;
                Some(symmetrize(&parsed))
            }
        };
        Ok(ReferencePlanogram::new(catalog, nodes, edges)?)
    }
}

pub fn load_planogram(path: impl AsRef<Path>) -> Result<ReferencePlanogram, IoError> {
    read_json::<PlanogramFile>(path)?.into_planogram()
}

pub fn save_planogram(path: impl AsRef<Path>, p: &ReferencePlanogram) -> Result<(), IoError> {
    write_json(path, &PlanogramFile::from_planogram(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub det_id: String,
    pub product: ProductId,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageSize>,
    pub detections: Vec<DetectionEntry>,
}

impl DetectionsFile {
    pub fn from_detections(dets: &[Detection], image: Option<ImageSize>) -> Self {
        let detections = dets
            .iter()
            .map(|d| DetectionEntry {
                det_id: d.det_id.clone(),
                product: d.product.clone(),
                x: d.bbox.x,
                y: d.bbox.y,
                w: d.bbox.w,
                h: d.bbox.h,
                confidence: d.confidence,
            })
            .collect();
        Self { image, detections }
    }

    pub fn into_detections(self) -> Result<Vec<Detection>, IoError> {
        self.detections
            .into_iter()
            .map(|e| Ok(Detection::new(e.det_id, e.product, BBox::new(e.x, e.y, e.w, e.h)?, e.confidence)?))
            .collect()
    }
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>, IoError> {
    read_json::<DetectionsFile>(path)?.into_detections()
}

pub fn save_detections(path: impl AsRef<Path>, dets: &[Detection], image: Option<ImageSize>) -> Result<(), IoError> {
    write_json(path, &DetectionsFile::from_detections(dets, image))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub node_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductId>,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageSize>,
    pub items: Vec<TruthEntry>,
    #[serde(default)]
    pub absent: Vec<String>,
}

impl GroundTruthFile {
    pub fn from_scene(gt: &GroundTruthScene) -> Self {
        Self {
            image: Some(ImageSize { width: gt.width, height: gt.height }),
            items: gt
                .items
                .iter()
                .map(|i| TruthEntry {
                    node_id: i.node_id.clone(),
                    product: Some(i.product.clone()),
                    x: i.bbox.x,
                    y: i.bbox.y,
                    w: i.bbox.w,
                    h: i.bbox.h,
                })
                .collect(),
            absent: gt.absent.clone(),
        }
    }

    /// Attach to its planogram; missing product labels are taken from it.
    pub fn into_scene(self, planogram: &ReferencePlanogram) -> Result<GroundTruthScene, IoError> {
        let mut items = Vec::with_capacity(self.items.len());
        for e in self.items {
            let planned = planogram
                .index_of(&e.node_id)
                .map(|ix| planogram.product(ix).clone())
                .ok_or_else(|| IoError::Invalid(format!("ground truth names unknown node {:?}", e.node_id)))?;
            items.push(SceneItem {
                node_id: e.node_id,
                product: e.product.unwrap_or(planned),
                bbox: BBox::new(e.x, e.y, e.w, e.h)?,
            });
        }
        let (width, height) = match self.image {
            Some(s) => (s.width, s.height),
            None => (
                items.iter().map(|i| i.bbox.right().ceil() as usize).max().unwrap_or(0),
                items.iter().map(|i| i.bbox.bottom().ceil() as usize).max().unwrap_or(0),
            ),
        };
        Ok(GroundTruthScene { planogram: planogram.clone(), items, absent: self.absent, width, height })
    }
}

pub fn load_ground_truth(path: impl AsRef<Path>, planogram: &ReferencePlanogram) -> Result<GroundTruthScene, IoError> {
    read_json::<GroundTruthFile>(path)?.into_scene(planogram)
}

pub fn save_ground_truth(path: impl AsRef<Path>, gt: &GroundTruthScene) -> Result<(), IoError> {
    write_json(path, &GroundTruthFile::from_scene(gt))
}

/// One scene of an evaluation dataset. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestScene {
    pub name: String,
    pub planogram: PathBuf,
    pub detections: PathBuf,
    pub ground_truth: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenes: Vec<ManifestScene>,
}

impl Manifest {
    /// Load and resolve scene paths against the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let mut m: Manifest = read_json(path)?;
        if m.scenes.is_empty() {
            return Err(IoError::Invalid(format!("{}: manifest lists no scenes", path.display())));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut m.scenes {
            for p in [&mut s.planogram, &mut s.detections, &mut s.ground_truth] {
                *p = base.join(&*p);
            }
            for p in [&mut s.scene, &mut s.templates].into_iter().flatten() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }
}
