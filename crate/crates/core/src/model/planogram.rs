use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BBox, Direction, ModelError};

/// Identifier of a catalog product. Non-empty, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ProductId(String);

impl ProductId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidProductId(id));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ProductId {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ProductId> for String {
    fn from(value: ProductId) -> Self {
        value.0
    }
}

impl fmt::Display for ProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Physical package front size in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSize {
    pub width_mm: f64,
    pub height_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: ProductId,
    pub metric_size: Option<MetricSize>,
}

impl Product {
    pub fn new(id: ProductId) -> Self {
        Self { id, metric_size: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub row: i32,
    pub col: i32,
}

impl GridPos {
    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }
}

/// One planned product facing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceNode {
    pub node_id: String,
    pub product: ProductId,
    pub grid_pos: GridPos,
}

/// A labeled box reported by a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub det_id: String,
    pub product: ProductId,
    pub bbox: BBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(det_id: impl Into<String>, product: ProductId, bbox: BBox, confidence: f64) -> Result<Self, ModelError> {
        let det_id = det_id.into();
        if det_id.is_empty() {
            return Err(ModelError::EmptyNodeId);
        }
        if !(confidence >= 0.0) {
            return Err(ModelError::NegativeConfidence { det_id, confidence });
        }
        Ok(Self { det_id, product, bbox, confidence })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedNode {
    pub node_id: String,
    pub detection: Detection,
}

/// Directed labeled edge `from --dir--> to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: String,
    pub dir: Direction,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, dir: Direction, to: impl Into<String>) -> Self {
        Self { from: from.into(), dir, to: to.into() }
    }

    pub fn reversed(&self) -> Edge {
        Edge { from: self.to.clone(), dir: self.dir.opposite(), to: self.from.clone() }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.from, self.dir, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Must be a single connected component.
    Reference,
    /// May be disconnected.
    Observed,
}

/// A broken structural invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("edge {0} references an unknown node")]
    UnknownNode(Edge),
    #[error("edge {0} is a self loop")]
    SelfLoop(Edge),
    #[error("node {node:?} has more than one {dir} neighbor")]
    DuplicateSlot { node: String, dir: Direction },
    #[error("asymmetric edge {0}: reverse edge missing")]
    AsymmetricEdge(Edge),
    #[error("disconnected: {components} components")]
    Disconnected { components: usize },
}

/// Check the structural invariants of a planogram graph given as raw parts.
///
/// Every violation found is reported, not only the first one.
pub fn validate_graph(kind: GraphKind, node_ids: &[String], edges: &[Edge]) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut index = HashMap::with_capacity(node_ids.len());
    for (i, id) in node_ids.iter().enumerate() {
        if index.insert(id.as_str(), i).is_some() {
            violations.push(Violation::DuplicateNode(id.clone()));
        }
    }

    let edge_set: BTreeSet<&Edge> = edges.iter().collect();
    let mut slots: BTreeMap<(&str, Direction), BTreeSet<&str>> = BTreeMap::new();
    let mut adjacency = vec![Vec::new(); node_ids.len()];
    for e in &edge_set {
        let (Some(&a), Some(&b)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) else {
            violations.push(Violation::UnknownNode((*e).clone()));
            continue;
        };
        if a == b {
            violations.push(Violation::SelfLoop((*e).clone()));
            continue;
        }
        slots.entry((e.from.as_str(), e.dir)).or_default().insert(e.to.as_str());
        if !edge_set.contains(&e.reversed()) {
            violations.push(Violation::AsymmetricEdge((*e).clone()));
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for ((node, dir), targets) in slots {
        if targets.len() > 1 {
            violations.push(Violation::DuplicateSlot { node: node.to_string(), dir });
        }
    }

    if kind == GraphKind::Reference && !node_ids.is_empty() {
        let components = count_components(&adjacency);
        if components > 1 {
            violations.push(Violation::Disconnected { components });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

fn count_components(adjacency: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut count = 0;
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(n) = stack.pop() {
            for &m in &adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    count
}

/// Per-node, per-direction neighbor slots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Adjacency {
    slots: Vec<[Option<usize>; 8]>,
}

impl Adjacency {
    pub(crate) fn new(n: usize) -> Self {
        Self { slots: vec![[None; 8]; n] }
    }

    pub(crate) fn push_node(&mut self) -> usize {
        self.slots.push([None; 8]);
        self.slots.len() - 1
    }

    pub(crate) fn neighbor(&self, node: usize, dir: Direction) -> Option<usize> {
        self.slots[node][dir.index()]
    }

    pub(crate) fn is_free(&self, node: usize, dir: Direction) -> bool {
        self.slots[node][dir.index()].is_none()
    }

    /// Link `a --dir--> b` and the reverse edge. Returns false (and changes
    /// nothing) if either slot is taken.
    pub(crate) fn link(&mut self, a: usize, dir: Direction, b: usize) -> bool {
        if a == b || !self.is_free(a, dir) || !self.is_free(b, dir.opposite()) {
            return false;
        }
        self.slots[a][dir.index()] = Some(b);
        self.slots[b][dir.opposite().index()] = Some(a);
        true
    }

    pub(crate) fn degree(&self, node: usize) -> usize {
        self.slots[node].iter().flatten().count()
    }

    pub(crate) fn neighbors(&self, node: usize) -> impl Iterator<Item = (Direction, usize)> + '_ {
        Direction::ALL
            .into_iter()
            .filter_map(move |d| self.slots[node][d.index()].map(|m| (d, m)))
    }

    pub(crate) fn directed_edges(&self) -> impl Iterator<Item = (usize, Direction, usize)> + '_ {
        (0..self.slots.len()).flat_map(move |a| self.neighbors(a).map(move |(d, b)| (a, d, b)))
    }

    /// Component label per node, labels assigned in node order.
    pub(crate) fn components(&self) -> (Vec<usize>, usize) {
        let n = self.slots.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut stack = vec![start];
            while let Some(a) = stack.pop() {
                for (_, b) in self.neighbors(a) {
                    if label[b] == usize::MAX {
                        label[b] = count;
                        stack.push(b);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    fn from_edges(index: &HashMap<String, usize>, n: usize, edges: &[Edge]) -> Self {
        let mut adj = Self::new(n);
        for e in edges {
            let a = index[&e.from];
            let b = index[&e.to];
            adj.slots[a][e.dir.index()] = Some(b);
        }
        adj
    }
}

/// Read access shared by reference and observed planograms.
///
/// Nodes are addressed by dense indices; `node_id` maps back to the textual id.
pub trait ShelfGraph {
    #[doc(hidden)]
    fn adjacency(&self) -> &Adjacency;

    fn len(&self) -> usize;

    fn node_id(&self, ix: usize) -> &str;

    fn index_of(&self, node_id: &str) -> Option<usize>;

    fn product(&self, ix: usize) -> &ProductId;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn neighbor(&self, ix: usize, dir: Direction) -> Option<usize> {
        self.adjacency().neighbor(ix, dir)
    }

    fn degree(&self, ix: usize) -> usize {
        self.adjacency().degree(ix)
    }

    /// All directed edges; each undirected edge appears twice.
    fn edges(&self) -> Vec<Edge> {
        self.adjacency()
            .directed_edges()
            .map(|(a, d, b)| Edge::new(self.node_id(a), d, self.node_id(b)))
            .collect()
    }

    fn node_ids(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.node_id(i).to_string()).collect()
    }

    /// Re-run the structural checks on this graph.
    fn validate(&self) -> Result<(), Vec<Violation>>;
}

/// The planned layout of an aisle: a connected grid-like graph of facings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlanogram {
    catalog: Vec<Product>,
    nodes: Vec<ReferenceNode>,
    index: HashMap<String, usize>,
    catalog_index: HashMap<ProductId, usize>,
    adj: Adjacency,
}

impl ReferencePlanogram {
    /// Build a planogram. When `edges` is `None` the 8-neighborhood of the
    /// integer grid is used.
    pub fn new(catalog: Vec<Product>, mut nodes: Vec<ReferenceNode>, edges: Option<Vec<Edge>>) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::EmptyPlanogram);
        }
        let mut catalog_index = HashMap::with_capacity(catalog.len());
        for (i, p) in catalog.iter().enumerate() {
            if let Some(m) = p.metric_size {
                if !(m.width_mm > 0.0 && m.height_mm > 0.0) {
                    return Err(ModelError::InvalidMetricSize(p.id.clone()));
                }
            }
            if catalog_index.insert(p.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateProduct(p.id.clone()));
            }
        }

        nodes.sort_by(|a, b| a.node_id.cmp(&b.node_id));
        let mut index = HashMap::with_capacity(nodes.len());
        let mut positions = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.node_id.is_empty() {
                return Err(ModelError::EmptyNodeId);
            }
            if !catalog_index.contains_key(&n.product) {
                return Err(ModelError::UnknownProduct { node: n.node_id.clone(), product: n.product.clone() });
            }
            if index.insert(n.node_id.clone(), i).is_some() {
                return Err(ModelError::InvalidGraph(vec![Violation::DuplicateNode(n.node_id.clone())]));
            }
            if let Some(other) = positions.insert(n.grid_pos, i) {
                return Err(ModelError::DuplicateGridPos {
                    first: nodes[other].node_id.clone(),
                    second: n.node_id.clone(),
                });
            }
        }

        let edges = edges.unwrap_or_else(|| grid_edges(&nodes, &positions));
        let ids: Vec<String> = nodes.iter().map(|n| n.node_id.clone()).collect();
        validate_graph(GraphKind::Reference, &ids, &edges).map_err(ModelError::InvalidGraph)?;
        let adj = Adjacency::from_edges(&index, nodes.len(), &edges);
        Ok(Self { catalog, nodes, index, catalog_index, adj })
    }

    pub fn catalog(&self) -> &[Product] {
        &self.catalog
    }

    pub fn catalog_product(&self, id: &ProductId) -> Option<&Product> {
        self.catalog_index.get(id).map(|&i| &self.catalog[i])
    }

    pub fn nodes(&self) -> &[ReferenceNode] {
        &self.nodes
    }

    pub fn node(&self, ix: usize) -> &ReferenceNode {
        &self.nodes[ix]
    }

    pub fn grid_pos(&self, ix: usize) -> GridPos {
        self.nodes[ix].grid_pos
    }

    pub fn metric_size(&self, ix: usize) -> Option<MetricSize> {
        self.catalog_product(&self.nodes[ix].product).and_then(|p| p.metric_size)
    }

    /// Products that appear on at least one facing.
    pub fn placed_products(&self) -> BTreeSet<ProductId> {
        self.nodes.iter().map(|n| n.product.clone()).collect()
    }
}

fn grid_edges(nodes: &[ReferenceNode], positions: &HashMap<GridPos, usize>) -> Vec<Edge> {
    let mut edges = Vec::new();
    for n in nodes {
        for d in Direction::ALL {
            let (dr, dc) = d.grid_step();
            let p = GridPos::new(n.grid_pos.row + dr, n.grid_pos.col + dc);
            if let Some(&m) = positions.get(&p) {
                edges.push(Edge::new(n.node_id.clone(), d, nodes[m].node_id.clone()));
            }
        }
    }
    edges
}

impl ShelfGraph for ReferencePlanogram {
    fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn node_id(&self, ix: usize) -> &str {
        &self.nodes[ix].node_id
    }

    fn index_of(&self, node_id: &str) -> Option<usize> {
        self.index.get(node_id).copied()
    }

    fn product(&self, ix: usize) -> &ProductId {
        &self.nodes[ix].product
    }

    fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_graph(GraphKind::Reference, &self.node_ids(), &self.edges())
    }
}

/// Graph of the detections found in one image. May be disconnected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservedPlanogram {
    nodes: Vec<ObservedNode>,
    index: HashMap<String, usize>,
    adj: Adjacency,
}

impl ObservedPlanogram {
    pub fn new(mut nodes: Vec<ObservedNode>, edges: Vec<Edge>) -> Result<Self, ModelError> {
        nodes.sort_by(|a, b| a.node_id.cmp(&b.node_id));
        let ids: Vec<String> = nodes.iter().map(|n| n.node_id.clone()).collect();
        if ids.iter().any(String::is_empty) {
            return Err(ModelError::EmptyNodeId);
        }
        validate_graph(GraphKind::Observed, &ids, &edges).map_err(ModelError::InvalidGraph)?;
        let index: HashMap<String, usize> = ids.into_iter().enumerate().map(|(i, id)| (id, i)).collect();
        let adj = Adjacency::from_edges(&index, nodes.len(), &edges);
        Ok(Self { nodes, index, adj })
    }

    /// Nodes must already be unique and sorted by id; `adj` must be symmetric.
    pub(crate) fn from_parts(nodes: Vec<ObservedNode>, adj: Adjacency) -> Self {
        let index = nodes.iter().enumerate().map(|(i, n)| (n.node_id.clone(), i)).collect();
        Self { nodes, index, adj }
    }

    pub fn nodes(&self) -> &[ObservedNode] {
        &self.nodes
    }

    pub fn node(&self, ix: usize) -> &ObservedNode {
        &self.nodes[ix]
    }

    pub fn bbox(&self, ix: usize) -> &BBox {
        &self.nodes[ix].detection.bbox
    }

    pub fn detections(&self) -> Vec<Detection> {
        self.nodes.iter().map(|n| n.detection.clone()).collect()
    }

    /// Mean center-to-center length over all edges; `None` without edges.
    pub fn mean_edge_length(&self) -> Option<f64> {
        let (sum, count) = self
            .adj
            .directed_edges()
            .filter(|(a, _, b)| a < b)
            .fold((0.0, 0usize), |(s, c), (a, _, b)| (s + self.bbox(a).center().distance(&self.bbox(b).center()), c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    /// Connected components: per-node label and component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        self.adj.components()
    }

    /// Append a node; returns its index. Fails on a duplicate id.
    pub(crate) fn push_node(&mut self, node: ObservedNode) -> Result<usize, ModelError> {
        if self.index.contains_key(&node.node_id) {
            return Err(ModelError::InvalidGraph(vec![Violation::DuplicateNode(node.node_id)]));
        }
        let ix = self.adj.push_node();
        self.index.insert(node.node_id.clone(), ix);
        self.nodes.push(node);
        Ok(ix)
    }

    pub(crate) fn link(&mut self, a: usize, dir: Direction, b: usize) -> bool {
        self.adj.link(a, dir, b)
    }
}

impl ShelfGraph for ObservedPlanogram {
    fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn node_id(&self, ix: usize) -> &str {
        &self.nodes[ix].node_id
    }

    fn index_of(&self, node_id: &str) -> Option<usize> {
        self.index.get(node_id).copied()
    }

    fn product(&self, ix: usize) -> &ProductId {
        &self.nodes[ix].detection.product
    }

    fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_graph(GraphKind::Observed, &self.node_ids(), &self.edges())
    }
}

/// Add missing reverse edges and drop exact duplicates.
pub fn symmetrize(edges: &[Edge]) -> Vec<Edge> {
    let mut set: HashSet<Edge> = HashSet::with_capacity(edges.len() * 2);
    let mut out = Vec::with_capacity(edges.len() * 2);
    for e in edges {
        for candidate in [e.clone(), e.reversed()] {
            if set.insert(candidate.clone()) {
                out.push(candidate);
            }
        }
    }
    out
}
