//! Observed-planogram construction from a flat list of detections.
//!
//! Every pair of detections whose centers are close enough (relative to the
//! two box sizes) becomes a candidate edge labeled by the compass sector of
//! the offset. Candidates are then accepted greedily from the shortest, so
//! that when two boxes compete for the same direction slot only the closest
//! pair keeps the edge.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::{Adjacency, Detection, Direction, ObservedNode, ObservedPlanogram, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("degenerate offset: the two centers coincide")]
    DegenerateOffset,
    #[error("duplicate detection id {0:?}")]
    DuplicateDetection(String),
    #[error("invalid builder parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuilderParams {
    /// Multiplier on the mean box diagonal of a pair giving the maximum center distance.
    pub alpha: f64,
    /// Half angular width of each direction sector, in degrees.
    pub sector_half_width_deg: f64,
}

impl Default for BuilderParams {
    fn default() -> Self {
        Self { alpha: 1.2, sector_half_width_deg: 22.5 }
    }
}

impl BuilderParams {
    pub fn validate(&self) -> Result<(), BuildError> {
        if !(self.alpha > 0.0) {
            return Err(BuildError::InvalidParams(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.sector_half_width_deg > 0.0 && self.sector_half_width_deg <= 22.5) {
            return Err(BuildError::InvalidParams(format!(
                "sector_half_width_deg must be in (0, 22.5], got {}",
                self.sector_half_width_deg
            )));
        }
        Ok(())
    }
}

/// Compass sector of the offset `from -> to` using full 45° sectors.
pub fn classify_direction(from: Point, to: Point) -> Result<Direction, BuildError> {
    classify_direction_within(from, to, 22.5).map(|d| d.expect("full sectors tile the circle"))
}

/// Like [`classify_direction`], but only offsets within `half_width_deg` of a
/// sector axis are classified; others give `None`.
///
/// Sectors are half-open, `[axis - half_width, axis + half_width)` walking
/// counterclockwise, with E at 0° and N at 90° (y pointing up).
pub fn classify_direction_within(from: Point, to: Point, half_width_deg: f64) -> Result<Option<Direction>, BuildError> {
    let dx = to.x - from.x;
    let dy_up = from.y - to.y;
    if dx == 0.0 && dy_up == 0.0 {
        return Err(BuildError::DegenerateOffset);
    }
    let angle = dy_up.atan2(dx).to_degrees().rem_euclid(360.0);
    let shifted = (angle + 22.5).rem_euclid(360.0);
    let sector = ((shifted / 45.0).floor() as usize) % 8;
    if half_width_deg < 22.5 {
        let axis = sector as f64 * 45.0;
        let mut delta = angle - axis;
        if delta > 180.0 {
            delta -= 360.0;
        }
        if !(delta >= -half_width_deg && delta < half_width_deg) {
            return Ok(None);
        }
    }
    // Counterclockwise from E.
    const CCW: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];
    Ok(Some(CCW[sector]))
}

struct Candidate {
    a: usize,
    b: usize,
    dir: Direction,
    dist: f64,
}

/// Build the observed planogram: one node per detection, node id = `det_id`.
pub fn build_observed(detections: &[Detection], params: &BuilderParams) -> Result<ObservedPlanogram, BuildError> {
    params.validate()?;
    let mut seen = HashSet::with_capacity(detections.len());
    for d in detections {
        if !seen.insert(d.det_id.as_str()) {
            return Err(BuildError::DuplicateDetection(d.det_id.clone()));
        }
    }

    let mut dets: Vec<&Detection> = detections.iter().collect();
    dets.sort_by(|a, b| a.det_id.cmp(&b.det_id));

    let centers: Vec<Point> = dets.iter().map(|d| d.bbox.center()).collect();
    let diagonals: Vec<f64> = dets.iter().map(|d| d.bbox.diagonal()).collect();

    let mut candidates = Vec::new();
    for a in 0..dets.len() {
        for b in (a + 1)..dets.len() {
            let dist = centers[a].distance(&centers[b]);
            if dist == 0.0 || dist > params.alpha * (diagonals[a] + diagonals[b]) / 2.0 {
                continue;
            }
            if let Ok(Some(dir)) = classify_direction_within(centers[a], centers[b], params.sector_half_width_deg) {
                candidates.push(Candidate { a, b, dir, dist });
            }
        }
    }
    // Indices follow det_id order, so (a, b) ascending is the lexicographic tie-break.
    candidates.sort_by(|x, y| x.dist.total_cmp(&y.dist).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));

    let mut adj = Adjacency::new(dets.len());
    for c in &candidates {
        adj.link(c.a, c.dir, c.b);
    }

    let nodes = dets
        .into_iter()
        .map(|d| ObservedNode { node_id: d.det_id.clone(), detection: d.clone() })
        .collect();
    Ok(ObservedPlanogram::from_parts(nodes, adj))
}
