use rand::seq::SliceRandom;
use rand::Rng;

use crate::builder::{build_observed, BuilderParams};
use crate::model::{BBox, Detection, GridPos, ObservedPlanogram, Product, ProductId, ReferenceNode, ReferencePlanogram};

use super::{node_id_for, rng, SimError};

/// A small matching problem: a grid reference and an observed graph built
/// from a lightly perturbed copy of it.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub reference: ReferencePlanogram,
    pub observed: ObservedPlanogram,
    pub detections: Vec<Detection>,
    /// Number of observed items whose label was changed.
    pub relabeled: usize,
    /// Observed items that still carry the label planned at their grid cell.
    pub planted: usize,
}

/// Draw an instance with at most 8 nodes per graph, a label alphabet of
/// 3 to 6 products, 0 to 3 relabeled observed items and possibly one
/// dropped item.
pub fn random_instance(seed: u64) -> Result<RandomInstance, SimError> {
    let mut rng = rng::stream(seed, rng::STREAM_INSTANCE);
    let rows = rng.random_range(1..=2usize);
    let cols = rng.random_range(2..=(8 / rows).min(4));
    let alphabet = rng.random_range(3..=6usize);
    let products: Vec<Product> = (0..alphabet)
        .map(|i| Product::new(ProductId::new(format!("p{i}")).expect("valid id")))
        .collect();

    let mut nodes = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            nodes.push(ReferenceNode {
                node_id: node_id_for(r, c, 2),
                product: products[rng.random_range(0..alphabet)].id.clone(),
                grid_pos: GridPos::new(r as i32, c as i32),
            });
        }
    }
    let reference = ReferencePlanogram::new(products.clone(), nodes.clone(), None)?;

    let mut observed_items: Vec<(ProductId, GridPos)> = nodes.iter().map(|n| (n.product.clone(), n.grid_pos)).collect();
    if observed_items.len() > 2 && rng.random_bool(0.5) {
        let drop = rng.random_range(0..observed_items.len());
        observed_items.remove(drop);
    }
    let relabel = rng.random_range(0..=3usize).min(observed_items.len());
    let mut order: Vec<usize> = (0..observed_items.len()).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(relabel) {
        let current = observed_items[k].0.clone();
        let others: Vec<&Product> = products.iter().filter(|p| p.id != current).collect();
        observed_items[k].0 = others[rng.random_range(0..others.len())].id.clone();
    }

    let planted = observed_items
        .iter()
        .filter(|(product, pos)| nodes.iter().any(|n| n.grid_pos == *pos && n.product == *product))
        .count();

    let detections = observed_items
        .iter()
        .enumerate()
        .map(|(i, (product, pos))| {
            let bbox = BBox::new(f64::from(pos.col) * 60.0, f64::from(pos.row) * 80.0, 54.0, 72.0)?;
            Detection::new(format!("d{i}"), product.clone(), bbox, 1.0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let observed = build_observed(&detections, &BuilderParams::default()).expect("grid detections are well-formed");
    Ok(RandomInstance { seed, reference, observed, detections, relabeled: relabel, planted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShelfGraph;

    #[test]
    fn instances_respect_size_limits() {
        for seed in 0..200 {
            let inst = random_instance(seed).unwrap();
            assert!(inst.reference.len() <= 8 && inst.observed.len() <= 8);
            assert!((3..=6).contains(&inst.reference.catalog().len()));
            assert!(inst.relabeled <= 3);
        }
    }

    #[test]
    fn instances_are_deterministic() {
        let a = random_instance(17).unwrap();
        let b = random_instance(17).unwrap();
        assert_eq!(a.reference, b.reference);
        assert_eq!(a.detections, b.detections);
    }
}
