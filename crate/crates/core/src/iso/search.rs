use std::cmp::Ordering;
use std::collections::HashSet;

use crate::model::{Assignment, Direction, Hypothesis, ObservedPlanogram, ReferencePlanogram, ShelfGraph, Solution};

use super::confidence::{confidence_of, ObservedLayout};
use super::hypothesis::HypothesisSet;
use super::{SolveError, SolverParams};

/// Result of one greedy pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FoundSolution {
    pub confidence: f64,
    pub solution: Solution,
    /// First accepted hypothesis, with its score at pick time.
    pub seed: Hypothesis,
    /// True when the pass stopped early because it could not beat `c_max`.
    pub abandoned: bool,
}

/// Snapshot taken after each pick, exposed for inspecting the search.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub picked: Vec<Assignment>,
    pub remaining: Vec<Hypothesis>,
    pub bound: f64,
}

/// Upper bound on the confidence of any completion of a partial solution:
/// its size plus the largest number of further pairings the remaining
/// hypotheses could supply (bounded by distinct reference and observed nodes).
pub fn bound(partial_len: usize, remaining: &[Hypothesis]) -> f64 {
    let refs: HashSet<&str> = remaining.iter().map(|h| h.ref_node.as_str()).collect();
    let obs: HashSet<&str> = remaining.iter().map(|h| h.obs_node.as_str()).collect();
    (partial_len + refs.len().min(obs.len())) as f64
}

pub(crate) struct Search<'a> {
    pub(crate) hyps: &'a HypothesisSet,
    pub(crate) reference: &'a ReferencePlanogram,
    pub(crate) observed: &'a ObservedPlanogram,
    pub(crate) layout: ObservedLayout,
    pub(crate) params: &'a SolverParams,
}

pub(crate) struct RawFound {
    pub(crate) confidence: f64,
    /// (hypothesis index, score at pick)
    pub(crate) picks: Vec<(usize, f64)>,
    pub(crate) abandoned: bool,
}

impl<'a> Search<'a> {
    pub(crate) fn new(
        hyps: &'a HypothesisSet,
        reference: &'a ReferencePlanogram,
        observed: &'a ObservedPlanogram,
        params: &'a SolverParams,
    ) -> Self {
        Self { hyps, reference, observed, layout: ObservedLayout::new(observed), params }
    }

    /// Higher score first, then lexicographic (ref id, obs id).
    fn better(&self, a: usize, sa: f64, b: usize, sb: f64) -> bool {
        match sa.total_cmp(&sb) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                let ha = self.hyps.item(a);
                let hb = self.hyps.item(b);
                (ha.ref_node.as_str(), ha.obs_node.as_str()) < (hb.ref_node.as_str(), hb.obs_node.as_str())
            }
        }
    }

    pub(crate) fn pool_bound(&self, alive: &[bool], partial_len: usize) -> f64 {
        let mut refs = HashSet::new();
        let mut obs = HashSet::new();
        for (k, _) in alive.iter().enumerate().filter(|(_, a)| **a) {
            let (r, o) = self.hyps.ixs(k);
            refs.insert(r);
            obs.insert(o);
        }
        (partial_len + refs.len().min(obs.len())) as f64
    }

    pub(crate) fn best_alive(&self, alive: &[bool], scores: &[f64]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for k in (0..alive.len()).filter(|&k| alive[k]) {
            best = match best {
                Some(b) if !self.better(k, scores[k], b, scores[b]) => Some(b),
                _ => Some(k),
            };
        }
        best
    }

    /// Greedy pass over the hypotheses still marked in `pool`.
    /// Returns `None` when no hypothesis reaches `tau`.
    pub(crate) fn run(
        &self,
        pool: &[bool],
        c_max: f64,
        mut observer: Option<&mut dyn FnMut(&SearchState)>,
    ) -> Option<RawFound> {
        let tau = self.params.tau;
        let mut alive = pool.to_vec();
        let mut scores: Vec<f64> = (0..self.hyps.len()).map(|k| self.hyps.item(k).score).collect();
        let mut picks: Vec<(usize, f64)> = Vec::new();
        let mut abandoned = false;

        while let Some(best) = self.best_alive(&alive, &scores) {
            if scores[best] < tau {
                break;
            }
            picks.push((best, scores[best]));
            let (r, o) = self.hyps.ixs(best);
            for k in self.hyps.conflicting(r, o) {
                alive[k] = false;
            }
            for d in Direction::ALL {
                let (Some(rn), Some(on)) = (self.reference.neighbor(r, d), self.observed.neighbor(o, d)) else {
                    continue;
                };
                if let Some(k) = self.hyps.find(rn, on) {
                    if alive[k] {
                        scores[k] += 1.0 / self.reference.degree(rn) as f64;
                    }
                }
            }

            let bc = self.pool_bound(&alive, picks.len());
            if let Some(obs) = observer.as_deref_mut() {
                obs(&self.snapshot(&picks, &alive, &scores, bc));
            }
            if self.params.pruning && bc <= c_max {
                abandoned = true;
                break;
            }
        }

        if picks.is_empty() {
            return None;
        }
        let pairs: Vec<(usize, usize)> = picks.iter().map(|&(k, _)| self.hyps.ixs(k)).collect();
        let confidence = confidence_of(&pairs, self.reference, self.observed, &self.layout, self.params.lambda_penalty);
        Some(RawFound { confidence, picks, abandoned })
    }

    fn snapshot(&self, picks: &[(usize, f64)], alive: &[bool], scores: &[f64], bound: f64) -> SearchState {
        SearchState {
            picked: self.assignments(picks),
            remaining: (0..alive.len())
                .filter(|&k| alive[k])
                .map(|k| Hypothesis { score: scores[k], ..self.hyps.item(k).clone() })
                .collect(),
            bound,
        }
    }

    pub(crate) fn assignments(&self, picks: &[(usize, f64)]) -> Vec<Assignment> {
        picks
            .iter()
            .map(|&(k, score)| {
                let h = self.hyps.item(k);
                Assignment { ref_node: h.ref_node.clone(), obs_node: h.obs_node.clone(), score }
            })
            .collect()
    }

    pub(crate) fn finish(&self, raw: &RawFound) -> FoundSolution {
        let (k0, s0) = raw.picks[0];
        let seed = Hypothesis { score: s0, ..self.hyps.item(k0).clone() };
        let solution = Solution::new(self.assignments(&raw.picks), raw.confidence, Some(seed.clone()))
            .expect("picks remove every conflicting hypothesis");
        FoundSolution { confidence: raw.confidence, solution, seed, abandoned: raw.abandoned }
    }
}

/// One greedy constrained-assignment pass: repeatedly accept the best-scoring
/// hypothesis, drop the hypotheses that share either of its nodes and boost
/// the hypotheses pairing its coherent neighbors. Stops when nothing reaches
/// `tau`, or (with pruning) when the bound cannot beat `c_max`.
pub fn find_solution(
    hyps: &HypothesisSet,
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    c_max: f64,
    params: &SolverParams,
) -> Result<FoundSolution, SolveError> {
    find_solution_traced(hyps, reference, observed, c_max, params, None)
}

/// [`find_solution`] with a callback invoked after every pick.
pub fn find_solution_traced(
    hyps: &HypothesisSet,
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    c_max: f64,
    params: &SolverParams,
    observer: Option<&mut dyn FnMut(&SearchState)>,
) -> Result<FoundSolution, SolveError> {
    params.validate()?;
    if hyps.is_empty() {
        return Err(SolveError::NoHypotheses);
    }
    let search = Search::new(hyps, reference, observed, params);
    let pool = vec![true; hyps.len()];
    let raw = search.run(&pool, c_max, observer).ok_or(SolveError::BelowThreshold(params.tau))?;
    Ok(search.finish(&raw))
}
