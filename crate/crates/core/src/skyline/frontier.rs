use crate::geometry::dynamically_dominates_coords;
use crate::region::{covers, surely_dominates, OffsetBox};

/// Products found to dominate the query for some customer, kept minimal:
/// no member covers another.
#[derive(Clone, Debug, Default)]
pub struct SkyFrontier {
    members: Vec<Member>,
}

#[derive(Clone, Debug)]
struct Member {
    coords: Vec<f64>,
    offsets: OffsetBox,
}

impl SkyFrontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Product coordinates of the members, in insertion order.
    pub fn products(&self) -> impl Iterator<Item = &[f64]> {
        self.members.iter().map(|m| m.coords.as_slice())
    }

    /// Midpoints of the members in folded offset space.
    pub fn midpoints(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.members
            .iter()
            .map(|m| m.offsets.lo.iter().map(|d| d.abs() / 2.0).collect())
    }

    /// Exact test for a single customer.
    pub fn dominates_customer(&self, q: &[f64], c: &[f64], checks: &mut u64) -> bool {
        self.members.iter().any(|m| {
            *checks += 1;
            dynamically_dominates_coords(&m.coords, q, c)
        })
    }

    /// Some member beats the query for every customer in `customers`.
    pub fn surely_dominates(&self, customers: &OffsetBox, checks: &mut u64) -> bool {
        self.members.iter().any(|m| {
            *checks += 1;
            surely_dominates(&m.offsets, customers)
        })
    }

    /// Some member covers every product in `products`.
    pub fn covers(&self, products: &OffsetBox, checks: &mut u64) -> bool {
        self.members.iter().any(|m| {
            *checks += 1;
            covers(&m.offsets, products)
        })
    }

    /// Adds a product unless a member already covers it; members it covers
    /// are dropped. Returns whether it was added.
    pub fn insert(&mut self, coords: &[f64], q: &[f64], checks: &mut u64) -> bool {
        let offsets = OffsetBox::of_point(coords, q);
        if self.covers(&offsets, checks) {
            return false;
        }
        self.members.retain(|m| {
            *checks += 1;
            !covers(&offsets, &m.offsets)
        });
        self.members.push(Member {
            coords: coords.to_vec(),
            offsets,
        });
        debug_assert!(self.is_minimal());
        true
    }

    pub fn is_minimal(&self) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !covers(&a.offsets, &b.offsets))
        })
    }
}
