use std::collections::BTreeSet;

use super::InfluenceSet;
use crate::geometry::{dynamically_dominates_coords, Point};

/// Products not dynamically dominated w.r.t. `c` by any other product.
/// Quadratic pairwise scan.
pub fn oracle_dynamic_skyline(c: &Point, products: &[Point]) -> BTreeSet<u64> {
    products
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            !products.iter().enumerate().any(|(j, other)| {
                *i != j && dynamically_dominates_coords(&other.coords, &p.coords, &c.coords)
            })
        })
        .map(|(_, p)| p.id)
        .collect()
}

/// Customers for which no product dynamically dominates `q`.
pub fn oracle_reverse_skyline(q: &Point, products: &[Point], customers: &[Point]) -> InfluenceSet {
    customers
        .iter()
        .filter(|c| {
            !products
                .iter()
                .any(|p| dynamically_dominates_coords(&p.coords, &q.coords, &c.coords))
        })
        .map(|c| c.id)
        .collect()
}
