//! Domain types: boxes, directions, reference and observed planograms, solutions.

mod bbox;
mod direction;
mod planogram;
mod solution;

pub use bbox::{iou, BBox, Point};
pub use direction::Direction;
pub use planogram::{
    symmetrize, validate_graph, Adjacency, Detection, Edge, GraphKind, GridPos, MetricSize, ObservedNode,
    ObservedPlanogram, Product, ProductId, ReferenceNode, ReferencePlanogram, ShelfGraph, Violation,
};
pub use solution::{Assignment, Hypothesis, Solution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid box (x={x}, y={y}, w={w}, h={h}): width and height must be positive")]
    InvalidBox { x: f64, y: f64, w: f64, h: f64 },
    #[error("invalid product id {0:?}")]
    InvalidProductId(String),
    #[error("unknown direction {0:?}")]
    UnknownDirection(String),
    #[error("empty node id")]
    EmptyNodeId,
    #[error("planogram has no nodes")]
    EmptyPlanogram,
    #[error("duplicate product {0} in catalog")]
    DuplicateProduct(ProductId),
    #[error("product {0} has a non-positive metric size")]
    InvalidMetricSize(ProductId),
    #[error("node {node:?} uses product {product} which is not in the catalog")]
    UnknownProduct { node: String, product: ProductId },
    #[error("nodes {first:?} and {second:?} share a grid position")]
    DuplicateGridPos { first: String, second: String },
    #[error("detection {det_id:?} has negative confidence {confidence}")]
    NegativeConfidence { det_id: String, confidence: f64 },
    #[error("invalid graph: {}", format_violations(.0))]
    InvalidGraph(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
