//! Exhaustive reference solver for small instances.
//!
//! Enumerates every injective, product-consistent partial assignment and keeps
//! the one with the highest confidence. Exponential; used to check the
//! heuristic matcher.

use std::cmp::Ordering;

use crate::iso::{confidence_of, ObservedLayout, SolverParams};
use crate::model::{Assignment, ObservedPlanogram, ReferencePlanogram, ShelfGraph, Solution};

pub const DEFAULT_NODE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for oracle: min(|I|, |O|) = {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub solution: Solution,
    /// Number of complete assignments evaluated (including the empty one).
    pub enumerated: u64,
}

struct Enumerator<'a> {
    reference: &'a ReferencePlanogram,
    observed: &'a ObservedPlanogram,
    layout: ObservedLayout,
    lambda: f64,
    ref_order: Vec<usize>,
    /// Product-consistent observed candidates per reference node, id order.
    candidates: Vec<Vec<usize>>,
    used: Vec<bool>,
    current: Vec<(usize, usize)>,
    best: Option<(f64, Vec<(usize, usize)>)>,
    enumerated: u64,
}

impl Enumerator<'_> {
    fn visit(&mut self, r: usize) {
        if r == self.candidates.len() {
            self.leaf();
            return;
        }
        for i in 0..self.candidates[r].len() {
            let o = self.candidates[r][i];
            if self.used[o] {
                continue;
            }
            self.used[o] = true;
            self.current.push((self.ref_order[r], o));
            self.visit(r + 1);
            self.current.pop();
            self.used[o] = false;
        }
        // leave r unassigned
        self.visit(r + 1);
    }

    fn leaf(&mut self) {
        self.enumerated += 1;
        // C <= |S|, so smaller assignments cannot reach the incumbent.
        if let Some((bc, _)) = &self.best {
            if (self.current.len() as f64) < *bc {
                return;
            }
        }
        let c = confidence_of(&self.current, self.reference, self.observed, &self.layout, self.lambda);
        let replace = match &self.best {
            None => true,
            Some((bc, bs)) => match c.total_cmp(bc) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => match self.current.len().cmp(&bs.len()) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => self.id_list(&self.current) < self.id_list(bs),
                },
            },
        };
        if replace {
            self.best = Some((c, self.current.clone()));
        }
    }

    fn id_list<'b>(&'b self, pairs: &[(usize, usize)]) -> Vec<(&'b str, &'b str)> {
        let mut v: Vec<_> = pairs.iter().map(|&(r, o)| (self.reference.node_id(r), self.observed.node_id(o))).collect();
        v.sort();
        v
    }
}

/// Best assignment by confidence, then size, then lexicographic (ref, obs) list.
pub fn brute_force_solve(
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    params: &SolverParams,
    node_limit: usize,
) -> Result<OracleOutcome, OracleError> {
    let size = reference.len().min(observed.len());
    if size > node_limit {
        return Err(OracleError::TooLarge { size, limit: node_limit });
    }

    // Reference nodes in id order; graph indices already follow it but sort anyway.
    let mut ref_order: Vec<usize> = (0..reference.len()).collect();
    ref_order.sort_by(|&a, &b| reference.node_id(a).cmp(reference.node_id(b)));
    let mut obs_order: Vec<usize> = (0..observed.len()).collect();
    obs_order.sort_by(|&a, &b| observed.node_id(a).cmp(observed.node_id(b)));

    let candidates: Vec<Vec<usize>> = ref_order
        .iter()
        .map(|&r| obs_order.iter().copied().filter(|&o| observed.product(o) == reference.product(r)).collect())
        .collect();

    let mut e = Enumerator {
        reference,
        observed,
        layout: ObservedLayout::new(observed),
        lambda: params.lambda_penalty,
        ref_order,
        candidates,
        used: vec![false; observed.len()],
        current: Vec::new(),
        best: None,
        enumerated: 0,
    };
    e.visit(0);

    let (c, pairs) = e.best.take().unwrap_or((0.0, Vec::new()));
    let assignments = pairs
        .iter()
        .map(|&(r, o)| Assignment {
            ref_node: reference.node_id(r).to_string(),
            obs_node: observed.node_id(o).to_string(),
            score: 1.0,
        })
        .collect();
    let solution = Solution::new(assignments, c, None).expect("enumeration is injective");
    Ok(OracleOutcome { solution, enumerated: e.enumerated })
}
