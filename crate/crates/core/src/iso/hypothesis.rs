use std::collections::HashMap;

use crate::model::{Direction, Hypothesis, ObservedPlanogram, ProductId, ReferencePlanogram, ShelfGraph};

/// All candidate (reference, observed) pairings of the same product.
///
/// Hypotheses are stored in (reference index, observed index) order and can
/// be looked up by pair, by reference node or by observed node.
#[derive(Debug, Clone, Default)]
pub struct HypothesisSet {
    items: Vec<Hypothesis>,
    ixs: Vec<(usize, usize)>,
    lookup: HashMap<(usize, usize), usize>,
    by_ref: HashMap<usize, Vec<usize>>,
    by_obs: HashMap<usize, Vec<usize>>,
}

impl HypothesisSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hypothesis> {
        self.items.iter()
    }

    pub fn get(&self, reference: &ReferencePlanogram, observed: &ObservedPlanogram, ref_node: &str, obs_node: &str) -> Option<&Hypothesis> {
        let r = reference.index_of(ref_node)?;
        let o = observed.index_of(obs_node)?;
        self.lookup.get(&(r, o)).map(|&k| &self.items[k])
    }

    pub fn for_ref_node(&self, reference: &ReferencePlanogram, ref_node: &str) -> Vec<&Hypothesis> {
        reference
            .index_of(ref_node)
            .and_then(|r| self.by_ref.get(&r))
            .map(|v| v.iter().map(|&k| &self.items[k]).collect())
            .unwrap_or_default()
    }

    pub fn for_obs_node(&self, observed: &ObservedPlanogram, obs_node: &str) -> Vec<&Hypothesis> {
        observed
            .index_of(obs_node)
            .and_then(|o| self.by_obs.get(&o))
            .map(|v| v.iter().map(|&k| &self.items[k]).collect())
            .unwrap_or_default()
    }

    pub(crate) fn item(&self, k: usize) -> &Hypothesis {
        &self.items[k]
    }

    pub(crate) fn ixs(&self, k: usize) -> (usize, usize) {
        self.ixs[k]
    }

    pub(crate) fn find(&self, r: usize, o: usize) -> Option<usize> {
        self.lookup.get(&(r, o)).copied()
    }

    /// Hypotheses sharing the reference node or the observed node.
    pub(crate) fn conflicting(&self, r: usize, o: usize) -> impl Iterator<Item = usize> + '_ {
        let a = self.by_ref.get(&r).into_iter().flatten();
        let b = self.by_obs.get(&o).into_iter().flatten();
        a.chain(b).copied()
    }

    fn push(&mut self, h: Hypothesis, r: usize, o: usize) {
        let k = self.items.len();
        self.items.push(h);
        self.ixs.push((r, o));
        self.lookup.insert((r, o), k);
        self.by_ref.entry(r).or_default().push(k);
        self.by_obs.entry(o).or_default().push(k);
    }
}

/// Neighbor-coherence score of pairing reference node `r` with observed node `o`:
/// the fraction of `r`'s reference neighbors whose same-direction observed
/// neighbor carries the same product. Isolated reference nodes score 0.
pub fn coherence_score(reference: &ReferencePlanogram, observed: &ObservedPlanogram, r: usize, o: usize) -> f64 {
    let total = reference.degree(r);
    if total == 0 {
        return 0.0;
    }
    let coherent = Direction::ALL
        .into_iter()
        .filter(|&d| match (reference.neighbor(r, d), observed.neighbor(o, d)) {
            (Some(rn), Some(on)) => reference.product(rn) == observed.product(on),
            _ => false,
        })
        .count();
    coherent as f64 / total as f64
}

/// One hypothesis per product-matching (reference, observed) node pair.
pub fn create_hypotheses(reference: &ReferencePlanogram, observed: &ObservedPlanogram) -> HypothesisSet {
    let mut by_product: HashMap<&ProductId, Vec<usize>> = HashMap::new();
    for o in 0..observed.len() {
        by_product.entry(observed.product(o)).or_default().push(o);
    }
    for v in by_product.values_mut() {
        v.sort_by(|&a, &b| observed.node_id(a).cmp(observed.node_id(b)));
    }

    let mut set = HypothesisSet::default();
    for r in 0..reference.len() {
        let Some(candidates) = by_product.get(reference.product(r)) else {
            continue;
        };
        for &o in candidates {
            let h = Hypothesis {
                ref_node: reference.node_id(r).to_string(),
                obs_node: observed.node_id(o).to_string(),
                score: coherence_score(reference, observed, r, o),
            };
            set.push(h, r, o);
        }
    }
    set
}
