use crate::model::{Direction, ObservedPlanogram, ReferencePlanogram, ShelfGraph, Solution};

use super::{SolveError, SolverParams};

/// Per-graph data needed to score disconnected observed components.
#[derive(Debug, Clone)]
pub(crate) struct ObservedLayout {
    component: Vec<usize>,
    /// Pixels per grid column / row, estimated from observed edges.
    x_step: f64,
    y_step: f64,
}

impl ObservedLayout {
    pub(crate) fn new(observed: &ObservedPlanogram) -> Self {
        let (component, _) = observed.components();
        let mut horizontal = Vec::new();
        let mut vertical = Vec::new();
        let adj = observed.adjacency();
        for (a, d, b) in adj.directed_edges() {
            if a > b {
                continue;
            }
            let ca = observed.bbox(a).center();
            let cb = observed.bbox(b).center();
            match d {
                Direction::E | Direction::W => horizontal.push((cb.x - ca.x).abs()),
                Direction::N | Direction::S => vertical.push((cb.y - ca.y).abs()),
                _ => {}
            }
        }
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let edge_mean = observed.mean_edge_length();
        let n = observed.len().max(1) as f64;
        let mean_w = observed.nodes().iter().map(|n| n.detection.bbox.w).sum::<f64>() / n;
        let mean_h = observed.nodes().iter().map(|n| n.detection.bbox.h).sum::<f64>() / n;
        let pick = |axis: Option<f64>, size: f64| {
            axis.or(edge_mean)
                .filter(|v| *v > 0.0)
                .unwrap_or(if size > 0.0 { size } else { 1.0 })
        };
        Self {
            component,
            x_step: pick(mean(&horizontal), mean_w),
            y_step: pick(mean(&vertical), mean_h),
        }
    }
}

/// Number of matched-component pairs whose observed relative placement
/// disagrees with the reference grid by more than one cell (Chebyshev).
///
/// Each component containing matched nodes is anchored at its matched node
/// with the smallest observed id.
pub(crate) fn displaced_component_pairs(
    pairs: &[(usize, usize)],
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    layout: &ObservedLayout,
) -> usize {
    // (component, ref ix, obs ix) anchors
    let mut anchors: Vec<(usize, usize, usize)> = Vec::new();
    for &(r, o) in pairs {
        let c = layout.component[o];
        match anchors.iter_mut().find(|a| a.0 == c) {
            Some(a) => {
                if observed.node_id(o) < observed.node_id(a.2) {
                    *a = (c, r, o);
                }
            }
            None => anchors.push((c, r, o)),
        }
    }
    if anchors.len() < 2 {
        return 0;
    }

    let mut displaced = 0;
    for i in 0..anchors.len() {
        for j in (i + 1)..anchors.len() {
            let (_, ra, oa) = anchors[i];
            let (_, rb, ob) = anchors[j];
            let ca = observed.bbox(oa).center();
            let cb = observed.bbox(ob).center();
            let obs_cols = ((cb.x - ca.x) / layout.x_step).round();
            let obs_rows = ((cb.y - ca.y) / layout.y_step).round();
            let ga = reference.grid_pos(ra);
            let gb = reference.grid_pos(rb);
            let ref_cols = f64::from(gb.col - ga.col);
            let ref_rows = f64::from(gb.row - ga.row);
            let cheb = (obs_cols - ref_cols).abs().max((obs_rows - ref_rows).abs());
            if cheb > 1.0 {
                displaced += 1;
            }
        }
    }
    displaced
}

pub(crate) fn confidence_of(
    pairs: &[(usize, usize)],
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    layout: &ObservedLayout,
    lambda: f64,
) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let m = displaced_component_pairs(pairs, reference, observed, layout);
    (pairs.len() as f64 - lambda * m as f64).max(0.0)
}

/// Confidence of a solution: its cardinality minus `lambda_penalty` for each
/// pair of matched observed components that sit at the wrong relative offset.
pub fn confidence(
    solution: &Solution,
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    params: &SolverParams,
) -> Result<f64, SolveError> {
    let pairs = resolve_pairs(solution, reference, observed)?;
    let layout = ObservedLayout::new(observed);
    Ok(confidence_of(&pairs, reference, observed, &layout, params.lambda_penalty))
}

pub(crate) fn resolve_pairs(
    solution: &Solution,
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
) -> Result<Vec<(usize, usize)>, SolveError> {
    solution
        .assignments()
        .iter()
        .map(|a| {
            let r = reference.index_of(&a.ref_node).ok_or_else(|| SolveError::UnknownNode(a.ref_node.clone()))?;
            let o = observed.index_of(&a.obs_node).ok_or_else(|| SolveError::UnknownNode(a.obs_node.clone()))?;
            Ok((r, o))
        })
        .collect()
}
