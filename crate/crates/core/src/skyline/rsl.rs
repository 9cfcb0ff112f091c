//! Best-first reverse skyline search. One customer entry is resolved per
//! step; point entries are always examined before node entries, so pages
//! are read only when a decision cannot be made from what is in memory.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound::{Excluded, Unbounded};

use super::{check_query_dims, DirectReader, InfluenceSet, NodeReader, PqKey, QueryStats, SkyFrontier};
use crate::error::Result;
use crate::geometry::{dynamically_dominates_coords, Point};
use crate::index::{ChildRef, NodeEntries, NodeId, RTree, TreeRole};
use crate::region::{covers, is_useful_guarantee, may_dominate, OffsetBox};

/// A queued index entry: a single point or a reference to a node.
#[derive(Clone, Debug)]
pub enum Entry {
    Point(Point),
    Node(ChildRef),
}

impl Entry {
    fn key(&self, q: &[f64]) -> PqKey {
        match self {
            Entry::Point(p) => PqKey::by_level(0, point_dist(&p.coords, q), p.id),
            Entry::Node(r) => PqKey::by_level(r.level + 1, r.rect.mindist(q), r.id.0 as u64),
        }
    }

    fn offsets(&self, q: &[f64]) -> OffsetBox {
        match self {
            Entry::Point(p) => OffsetBox::of_point(&p.coords, q),
            Entry::Node(r) => OffsetBox::of_rect(&r.rect, q),
        }
    }

    /// Number of indexed points behind the entry.
    pub fn count(&self) -> u64 {
        match self {
            Entry::Point(_) => 1,
            Entry::Node(r) => r.count,
        }
    }
}

pub type EntryQueue = BTreeMap<PqKey, Entry>;

fn point_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Customer entries discarded without being resolved to points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pruned {
    Node(NodeId),
    Point(u64),
}

/// Outcome of expanding one node.
#[derive(Debug, Default)]
pub struct Expansion {
    pub pushed: Vec<PqKey>,
    /// Points behind the children that were dropped.
    pub dropped_count: u64,
    pub dropped: Vec<Pruned>,
}

/// Reads the node behind `entry` and queues the children that survive
/// pruning. Customer children are dropped when a frontier member beats the
/// query for the whole child box. Product children are dropped when a
/// product guaranteed to exist in an already kept sibling, or a frontier
/// member, covers the whole child box.
#[allow(clippy::too_many_arguments)]
pub fn entry_expand(
    entry: &ChildRef,
    role: TreeRole,
    q: &[f64],
    frontier: &SkyFrontier,
    queue: &mut EntryQueue,
    tree: &RTree,
    reader: &mut impl NodeReader,
    stats: &mut QueryStats,
) -> Result<Expansion> {
    let node = reader.read(tree, role, entry.id, stats)?;
    let children: Vec<Entry> = match &node.entries {
        NodeEntries::Points(ps) => ps.iter().cloned().map(Entry::Point).collect(),
        NodeEntries::Children(cs) => cs.iter().cloned().map(Entry::Node).collect(),
    };
    let mut out = Expansion::default();
    let mut kept: Vec<(Entry, Vec<OffsetBox>)> = Vec::with_capacity(children.len());
    for child in children {
        let offsets = child.offsets(q);
        let drop = match role {
            TreeRole::Customer => frontier.surely_dominates(&offsets, &mut stats.dominance_checks),
            TreeRole::Product => {
                coverable(&offsets)
                    && (kept.iter().any(|(_, guarantees)| {
                        guarantees.iter().any(|g| {
                            stats.dominance_checks += 1;
                            covers(g, &offsets)
                        })
                    }) || frontier.covers(&offsets, &mut stats.dominance_checks))
            }
        };
        if drop {
            out.dropped_count += child.count();
            out.dropped.push(match &child {
                Entry::Point(p) => Pruned::Point(p.id),
                Entry::Node(r) => Pruned::Node(r.id),
            });
            continue;
        }
        let guarantees = match (role, &child) {
            (TreeRole::Customer, _) => Vec::new(),
            (TreeRole::Product, Entry::Point(_)) => vec![offsets],
            (TreeRole::Product, Entry::Node(_)) => (0..offsets.dim())
                .map(|j| offsets.nearest_face(j))
                .filter(is_useful_guarantee)
                .collect(),
        };
        kept.push((child, guarantees));
    }
    for (child, _) in kept {
        let key = child.key(q);
        queue.insert(key, child);
        out.pushed.push(key);
    }
    Ok(out)
}

/// Only boxes that sit on one side of the query in every dimension can be
/// covered by another product.
fn coverable(b: &OffsetBox) -> bool {
    (0..b.dim()).all(|k| b.lo[k] > 0.0 || b.hi[k] < 0.0 || (b.lo[k] == 0.0 && b.hi[k] == 0.0))
}

/// Resumable state of one reverse skyline query.
#[derive(Debug)]
pub struct RslState<'a> {
    q: Point,
    products: &'a RTree,
    customers: &'a RTree,
    product_queue: EntryQueue,
    customer_queue: EntryQueue,
    frontier: SkyFrontier,
    result: InfluenceSet,
    stats: QueryStats,
    ruled_out: u64,
    prune_log: Option<Vec<Pruned>>,
}

impl<'a> RslState<'a> {
    pub fn new(q: &Point, products: &'a RTree, customers: &'a RTree) -> Result<Self> {
        check_query_dims(q, products, customers)?;
        let mut product_queue = EntryQueue::new();
        let mut customer_queue = EntryQueue::new();
        let root = Entry::Node(products.root_ref());
        product_queue.insert(root.key(&q.coords), root);
        let root = Entry::Node(customers.root_ref());
        customer_queue.insert(root.key(&q.coords), root);
        Ok(RslState {
            q: q.clone(),
            products,
            customers,
            product_queue,
            customer_queue,
            frontier: SkyFrontier::new(),
            result: InfluenceSet::new(),
            stats: QueryStats::default(),
            ruled_out: 0,
            prune_log: None,
        })
    }

    /// Records every customer entry discarded unresolved.
    pub fn with_prune_log(mut self) -> Self {
        self.prune_log = Some(Vec::new());
        self
    }

    pub fn query(&self) -> &Point {
        &self.q
    }

    pub fn is_finished(&self) -> bool {
        self.customer_queue.is_empty()
    }

    pub fn confirmed(&self) -> &InfluenceSet {
        &self.result
    }

    /// Customers known not to be in the result, including those inside
    /// discarded subtrees.
    pub fn ruled_out(&self) -> u64 {
        self.ruled_out
    }

    pub fn lower_bound(&self) -> u64 {
        self.result.len() as u64
    }

    pub fn upper_bound(&self) -> u64 {
        self.customers.len() - self.ruled_out
    }

    pub fn stats(&self) -> &QueryStats {
        &self.stats
    }

    pub fn frontier(&self) -> &SkyFrontier {
        &self.frontier
    }

    pub fn prune_log(&self) -> Option<&[Pruned]> {
        self.prune_log.as_deref()
    }

    pub fn into_parts(self) -> (InfluenceSet, QueryStats) {
        (self.result, self.stats)
    }

    fn rule_out(&mut self, count: u64, what: Pruned) {
        self.ruled_out += count;
        if let Some(log) = &mut self.prune_log {
            log.push(what);
        }
    }

    /// Resolves the customer entry with the smallest key. Returns the id of
    /// a customer confirmed in this step, if any.
    pub fn step(&mut self, reader: &mut impl NodeReader) -> Result<Option<u64>> {
        let Some((_, entry)) = self.customer_queue.pop_first() else {
            return Ok(None);
        };
        let q = self.q.coords.clone();
        match entry {
            Entry::Node(r) => {
                let offsets = OffsetBox::of_rect(&r.rect, &q);
                if self
                    .frontier
                    .surely_dominates(&offsets, &mut self.stats.dominance_checks)
                {
                    self.rule_out(r.count, Pruned::Node(r.id));
                    return Ok(None);
                }
                let exp = entry_expand(
                    &r,
                    TreeRole::Customer,
                    &q,
                    &self.frontier,
                    &mut self.customer_queue,
                    self.customers,
                    reader,
                    &mut self.stats,
                )?;
                self.ruled_out += exp.dropped_count;
                if let Some(log) = &mut self.prune_log {
                    log.extend(exp.dropped);
                }
                Ok(None)
            }
            Entry::Point(c) => {
                if self
                    .frontier
                    .dominates_customer(&q, &c.coords, &mut self.stats.dominance_checks)
                {
                    self.rule_out(1, Pruned::Point(c.id));
                    return Ok(None);
                }
                if self.scan_products(&c, reader)? {
                    self.result.insert(c.id);
                    self.stats.record_emit();
                    Ok(Some(c.id))
                } else {
                    self.ruled_out += 1;
                    Ok(None)
                }
            }
        }
    }

    /// Walks the product queue in key order looking for a product that
    /// beats the query for `c`, expanding nodes that might hold one. Nodes
    /// queued during the walk are visited in key order as well.
    fn scan_products(&mut self, c: &Point, reader: &mut impl NodeReader) -> Result<bool> {
        let q = self.q.coords.clone();
        let customer = OffsetBox::of_point(&c.coords, &q);
        let mut last: Option<PqKey> = None;
        let mut pending: BTreeSet<PqKey> = BTreeSet::new();
        loop {
            let next_main = match last {
                None => self.product_queue.keys().next().copied(),
                Some(k) => self
                    .product_queue
                    .range((Excluded(k), Unbounded))
                    .next()
                    .map(|(k, _)| *k),
            };
            let key = match (next_main, pending.first().copied()) {
                (None, None) => return Ok(true),
                (Some(m), Some(p)) if p < m => {
                    pending.remove(&p);
                    p
                }
                (None, Some(p)) => {
                    pending.remove(&p);
                    p
                }
                (Some(m), _) => {
                    last = Some(m);
                    m
                }
            };
            let expand = match &self.product_queue[&key] {
                Entry::Point(p) => {
                    self.stats.dominance_checks += 1;
                    if dynamically_dominates_coords(&p.coords, &q, &c.coords) {
                        let coords = p.coords.clone();
                        self.frontier
                            .insert(&coords, &q, &mut self.stats.dominance_checks);
                        return Ok(false);
                    }
                    None
                }
                Entry::Node(r) => {
                    self.stats.dominance_checks += 1;
                    may_dominate(&OffsetBox::of_rect(&r.rect, &q), &customer).then(|| r.clone())
                }
            };
            if let Some(r) = expand {
                self.product_queue.remove(&key);
                let exp = entry_expand(
                    &r,
                    TreeRole::Product,
                    &q,
                    &self.frontier,
                    &mut self.product_queue,
                    self.products,
                    reader,
                    &mut self.stats,
                )?;
                if let Some(l) = last {
                    pending.extend(exp.pushed.into_iter().filter(|k| *k < l));
                }
            }
        }
    }

    pub fn run_to_end(
        &mut self,
        reader: &mut impl NodeReader,
        mut emit: impl FnMut(u64),
    ) -> Result<()> {
        while !self.is_finished() {
            if let Some(id) = self.step(reader)? {
                emit(id);
            }
        }
        Ok(())
    }
}

/// Reverse skyline of `q` with best-first traversal of both indexes.
/// Confirmed customers are passed to `emit` as soon as they are known.
pub fn rsl(
    q: &Point,
    products: &RTree,
    customers: &RTree,
    emit: Option<&mut dyn FnMut(u64)>,
) -> Result<(InfluenceSet, QueryStats)> {
    rsl_with_reader(q, products, customers, &mut DirectReader, emit)
}

pub fn rsl_with_reader(
    q: &Point,
    products: &RTree,
    customers: &RTree,
    reader: &mut impl NodeReader,
    emit: Option<&mut dyn FnMut(u64)>,
) -> Result<(InfluenceSet, QueryStats)> {
    let mut state = RslState::new(q, products, customers)?;
    match emit {
        Some(f) => state.run_to_end(reader, f)?,
        None => state.run_to_end(reader, |_| {})?,
    }
    Ok(state.into_parts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skyline::oracle_reverse_skyline;

    fn p(id: u64, v: &[f64]) -> Point {
        Point::new(id, v.to_vec())
    }

    #[test]
    fn small_example_matches_oracle() {
        let products = vec![p(1, &[2., 2.])];
        let customers = vec![p(1, &[0., 0.]), p(2, &[10., 10.])];
        let tp = RTree::bulk_load(&products, 4).unwrap();
        let tc = RTree::bulk_load(&customers, 4).unwrap();
        let q = p(0, &[6., 6.]);
        let (set, stats) = rsl(&q, &tp, &tc, None).unwrap();
        assert_eq!(set, oracle_reverse_skyline(&q, &products, &customers));
        assert_eq!(set, InfluenceSet::from([2]));
        assert!(stats.io.reads_customer >= 1);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let tp = RTree::bulk_load(&[p(1, &[2., 2.])], 4).unwrap();
        let q = p(0, &[1., 2., 3.]);
        assert!(rsl(&q, &tp, &tp, None).is_err());
    }

    #[test]
    fn customer_expand_with_empty_frontier_pushes_all() {
        let customers: Vec<Point> = (0..20).map(|i| p(i, &[i as f64, (i * 3 % 7) as f64])).collect();
        let tc = RTree::bulk_load(&customers, 4).unwrap();
        let mut queue = EntryQueue::new();
        let mut stats = QueryStats::default();
        let root = tc.root_ref();
        let exp = entry_expand(
            &root,
            TreeRole::Customer,
            &[3.0, 3.0],
            &SkyFrontier::new(),
            &mut queue,
            &tc,
            &mut DirectReader,
            &mut stats,
        )
        .unwrap();
        assert_eq!(queue.len(), tc.peek(root.id).unwrap().len());
        assert_eq!(exp.dropped_count, 0);
        assert_eq!(stats.io.reads_customer, 1);
    }

    #[test]
    fn customer_child_inside_frontier_region_dropped() {
        // Two leaves: one far out at (100..101, 100..101), one near the query.
        let customers = vec![
            p(1, &[100., 100.]),
            p(2, &[101., 101.]),
            p(3, &[1., 1.]),
            p(4, &[1.5, 1.2]),
        ];
        let tc = RTree::bulk_load(&customers, 2).unwrap();
        let q = [0.0, 0.0];
        let mut frontier = SkyFrontier::new();
        let mut checks = 0;
        frontier.insert(&[10.0, 10.0], &q, &mut checks);
        let mut queue = EntryQueue::new();
        let mut stats = QueryStats::default();
        let exp = entry_expand(
            &tc.root_ref(),
            TreeRole::Customer,
            &q,
            &frontier,
            &mut queue,
            &tc,
            &mut DirectReader,
            &mut stats,
        )
        .unwrap();
        assert_eq!(exp.dropped_count, 2);
        assert_eq!(queue.len(), 1);
    }

    #[test]
    fn identical_product_siblings_both_kept() {
        let products = vec![p(1, &[5., 5.]), p(2, &[5., 5.]), p(3, &[9., 9.])];
        let tp = RTree::bulk_load(&products, 4).unwrap();
        let mut queue = EntryQueue::new();
        let mut stats = QueryStats::default();
        entry_expand(
            &tp.root_ref(),
            TreeRole::Product,
            &[0.0, 0.0],
            &SkyFrontier::new(),
            &mut queue,
            &tp,
            &mut DirectReader,
            &mut stats,
        )
        .unwrap();
        // (9,9) is covered by (5,5); the two duplicates stay.
        let ids: Vec<u64> = queue
            .values()
            .map(|e| match e {
                Entry::Point(p) => p.id,
                Entry::Node(_) => unreachable!(),
            })
            .collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn emission_is_progressive() {
        let mut seed = 7u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 1000) as f64
        };
        let products: Vec<Point> = (0..150).map(|i| p(i, &[next(), next()])).collect();
        let customers: Vec<Point> = (0..150).map(|i| p(i, &[next(), next()])).collect();
        let tp = RTree::bulk_load(&products, 8).unwrap();
        let tc = RTree::bulk_load(&customers, 8).unwrap();
        let q = p(0, &[500., 500.]);
        let mut emitted = Vec::new();
        let mut emit = |id: u64| emitted.push(id);
        let (set, stats) = rsl(&q, &tp, &tc, Some(&mut emit)).unwrap();
        assert_eq!(set, oracle_reverse_skyline(&q, &products, &customers));
        assert_eq!(emitted.len(), set.len());
        assert!(!set.is_empty());
        assert!(stats.io_to_emit(1).unwrap() < stats.total_io());
        assert!(stats
            .progress
            .windows(2)
            .all(|w| w[0].total_io <= w[1].total_io && w[0].results_emitted <= w[1].results_emitted));
    }
}
