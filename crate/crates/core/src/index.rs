//! Sort-tile-recursive packed R-tree with per-node subtree counts and
//! explicit node-read accounting.
//!
//! Trees are immutable after [`RTree::bulk_load`]. There is no buffer pool:
//! each [`RTree::read_node`] call is one I/O.

use std::cmp::Ordering;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

/// Which index a node belongs to; selects the I/O counter bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeRole {
    Product,
    Customer,
}

/// Reference to a child node as stored in its parent's page.
#[derive(Clone, Debug, PartialEq)]
pub struct ChildRef {
    pub id: NodeId,
    pub rect: Rect,
    pub level: u32,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeEntries {
    Children(Vec<ChildRef>),
    Points(Vec<Point>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RTreeNode {
    pub id: NodeId,
    pub rect: Rect,
    /// 0 for leaves.
    pub level: u32,
    /// Number of points stored in the subtree.
    pub count: u64,
    pub entries: NodeEntries,
}

impl RTreeNode {
    pub fn is_leaf(&self) -> bool {
        self.level == 0
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            NodeEntries::Children(c) => c.len(),
            NodeEntries::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IoCounter {
    pub reads_product: u64,
    pub reads_customer: u64,
}

impl IoCounter {
    pub fn charge(&mut self, role: TreeRole) {
        match role {
            TreeRole::Product => self.reads_product += 1,
            TreeRole::Customer => self.reads_customer += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.reads_product + self.reads_customer
    }

    pub fn add(&mut self, other: &IoCounter) {
        self.reads_product += other.reads_product;
        self.reads_customer += other.reads_customer;
    }
}

/// Entries per page for `dim`-dimensional boxes: two 8-byte bounds per
/// dimension plus an 8-byte child pointer, after a 32-byte page header.
pub fn default_fanout(dim: usize, page_bytes: usize) -> usize {
    let per_entry = 16 * dim + 8;
    (page_bytes.saturating_sub(32) / per_entry).max(4)
}

#[derive(Clone, Debug)]
pub struct RTree {
    nodes: Vec<RTreeNode>,
    root: NodeId,
    fanout: usize,
    dim: usize,
}

impl RTree {
    pub fn bulk_load(points: &[Point], fanout: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if fanout < 2 {
            return Err(Error::InvalidFanout(fanout));
        }
        let dim = points[0].dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }

        let mut nodes: Vec<RTreeNode> = Vec::new();

        let leaf_groups = str_pack(points.to_vec(), fanout, dim, |p| &p.coords, |p| p.id);
        let mut level_refs: Vec<ChildRef> = Vec::with_capacity(leaf_groups.len());
        for group in leaf_groups {
            let mut rect = Rect::from_coords(&group[0].coords);
            for p in &group[1..] {
                rect.expand_to_coords(&p.coords);
            }
            let id = NodeId(nodes.len() as u32);
            let count = group.len() as u64;
            level_refs.push(ChildRef {
                id,
                rect: rect.clone(),
                level: 0,
                count,
            });
            nodes.push(RTreeNode {
                id,
                rect,
                level: 0,
                count,
                entries: NodeEntries::Points(group),
            });
        }

        let mut level = 0;
        while level_refs.len() > 1 {
            level += 1;
            let centers: Vec<(Vec<f64>, ChildRef)> =
                level_refs.into_iter().map(|c| (c.rect.center(), c)).collect();
            let groups = str_pack(centers, fanout, dim, |c| &c.0, |c| c.1.id.0 as u64);
            let mut next = Vec::with_capacity(groups.len());
            for group in groups {
                let children: Vec<ChildRef> = group.into_iter().map(|(_, c)| c).collect();
                let mut rect = children[0].rect.clone();
                for c in &children[1..] {
                    rect.expand_to_rect(&c.rect);
                }
                let count = children.iter().map(|c| c.count).sum();
                let id = NodeId(nodes.len() as u32);
                next.push(ChildRef {
                    id,
                    rect: rect.clone(),
                    level,
                    count,
                });
                nodes.push(RTreeNode {
                    id,
                    rect,
                    level,
                    count,
                    entries: NodeEntries::Children(children),
                });
            }
            level_refs = next;
        }

        let root = level_refs[0].id;
        Ok(RTree {
            nodes,
            root,
            fanout,
            dim,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Entry describing the root, as an engine would hold it before any
    /// page is read.
    pub fn root_ref(&self) -> ChildRef {
        let n = &self.nodes[self.root.0 as usize];
        ChildRef {
            id: n.id,
            rect: n.rect.clone(),
            level: n.level,
            count: n.count,
        }
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of levels; a single-leaf tree has height 1.
    pub fn height(&self) -> u32 {
        self.nodes[self.root.0 as usize].level + 1
    }

    pub fn len(&self) -> u64 {
        self.nodes[self.root.0 as usize].count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Reads a page, charging one I/O to `role`.
    pub fn read_node(&self, id: NodeId, role: TreeRole, counter: &mut IoCounter) -> Result<&RTreeNode> {
        let node = self.peek(id)?;
        counter.charge(role);
        Ok(node)
    }

    /// Access without I/O accounting, for tests and structural checks.
    pub fn peek(&self, id: NodeId) -> Result<&RTreeNode> {
        self.nodes.get(id.0 as usize).ok_or(Error::UnknownNode(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &RTreeNode> {
        self.nodes.iter()
    }

    /// All points, in leaf order.
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.nodes.iter().flat_map(|n| match &n.entries {
            NodeEntries::Points(p) => p.as_slice(),
            NodeEntries::Children(_) => &[],
        })
    }
}

/// R-tree whose nodes carry the number of points in their subtree, so a
/// pruned subtree's size is known without reading it.
#[derive(Clone, Debug)]
pub struct ARTree(RTree);

impl ARTree {
    pub fn build(points: &[Point], fanout: usize) -> Result<Self> {
        Ok(ARTree(RTree::bulk_load(points, fanout)?))
    }

    pub fn count(&self, id: NodeId) -> Result<u64> {
        Ok(self.0.peek(id)?.count)
    }

    pub fn as_rtree(&self) -> &RTree {
        &self.0
    }
}

impl Deref for ARTree {
    type Target = RTree;

    fn deref(&self) -> &RTree {
        &self.0
    }
}

pub fn build_artree(points: &[Point], fanout: usize) -> Result<ARTree> {
    ARTree::build(points, fanout)
}

/// Smallest `s` with `s^k >= n`.
fn int_root_ceil(n: usize, k: usize) -> usize {
    let mut s = (n as f64).powf(1.0 / k as f64).floor().max(1.0) as usize;
    while s.saturating_pow(k as u32) < n {
        s += 1;
    }
    while s > 1 && (s - 1).saturating_pow(k as u32) >= n {
        s -= 1;
    }
    s
}

/// Sort-tile-recursive grouping of `items` into runs of at most `fanout`.
/// Sorting is by coordinate of the current dimension, ties by `key`.
fn str_pack<T>(
    items: Vec<T>,
    fanout: usize,
    dim: usize,
    coords: impl Fn(&T) -> &Vec<f64> + Copy,
    key: impl Fn(&T) -> u64 + Copy,
) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    str_recurse(items, 0, fanout, dim, coords, key, &mut out);
    out
}

fn str_recurse<T>(
    mut items: Vec<T>,
    axis: usize,
    fanout: usize,
    dim: usize,
    coords: impl Fn(&T) -> &Vec<f64> + Copy,
    key: impl Fn(&T) -> u64 + Copy,
    out: &mut Vec<Vec<T>>,
) {
    items.sort_by(|a, b| {
        coords(a)[axis]
            .partial_cmp(&coords(b)[axis])
            .unwrap_or(Ordering::Equal)
            .then_with(|| key(a).cmp(&key(b)))
    });
    if axis + 1 == dim || items.len() <= fanout {
        let mut iter = items.into_iter().peekable();
        while iter.peek().is_some() {
            out.push(iter.by_ref().take(fanout).collect());
        }
        return;
    }
    let pages = items.len().div_ceil(fanout);
    let slabs = int_root_ceil(pages, dim - axis);
    let slab_len = fanout * pages.div_ceil(slabs);
    let mut iter = items.into_iter().peekable();
    while iter.peek().is_some() {
        let slab: Vec<T> = iter.by_ref().take(slab_len).collect();
        str_recurse(slab, axis + 1, fanout, dim, coords, key, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| Point::new(i as u64, vec![(i % 10) as f64, (i / 10) as f64]))
            .collect()
    }

    #[test]
    fn single_point_tree() {
        let t = RTree::bulk_load(&[Point::new(7, vec![1.0, 2.0])], 64).unwrap();
        assert_eq!(t.height(), 1);
        assert_eq!(t.node_count(), 1);
        assert!(t.peek(t.root()).unwrap().is_leaf());
    }

    #[test]
    fn hundred_points_fanout_ten() {
        let t = RTree::bulk_load(&grid(100), 10).unwrap();
        assert_eq!(t.height(), 2);
        assert_eq!(t.nodes().filter(|n| n.is_leaf()).count(), 10);
        assert_eq!(t.node_count(), 11);
        let mut ids: Vec<u64> = t.points().map(|p| p.id).collect();
        ids.sort();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn empty_and_bad_fanout_rejected() {
        assert!(matches!(RTree::bulk_load(&[], 4), Err(Error::EmptyInput)));
        assert!(matches!(RTree::bulk_load(&grid(3), 1), Err(Error::InvalidFanout(1))));
    }

    #[test]
    fn default_fanout_values() {
        assert_eq!(default_fanout(3, 4096), 72);
        assert_eq!(default_fanout(2, 4096), 101);
        assert_eq!(default_fanout(5, 256), 4);
    }

    #[test]
    fn read_node_counts_every_call() {
        let t = RTree::bulk_load(&grid(100), 10).unwrap();
        let mut c = IoCounter::default();
        t.read_node(t.root(), TreeRole::Product, &mut c).unwrap();
        assert_eq!(c.reads_product, 1);
        t.read_node(t.root(), TreeRole::Product, &mut c).unwrap();
        t.read_node(NodeId(0), TreeRole::Customer, &mut c).unwrap();
        assert_eq!(c, IoCounter { reads_product: 2, reads_customer: 1 });
        assert!(matches!(
            t.read_node(NodeId(999), TreeRole::Product, &mut c),
            Err(Error::UnknownNode(NodeId(999)))
        ));
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn artree_counts() {
        let t = build_artree(&grid(100), 7).unwrap();
        assert_eq!(t.count(t.root()).unwrap(), 100);
        for n in t.nodes() {
            match &n.entries {
                NodeEntries::Points(p) => assert_eq!(n.count, p.len() as u64),
                NodeEntries::Children(c) => {
                    assert_eq!(n.count, c.iter().map(|c| c.count).sum::<u64>())
                }
            }
        }
    }

    #[test]
    fn int_root() {
        assert_eq!(int_root_ceil(8, 3), 2);
        assert_eq!(int_root_ceil(9, 3), 3);
        assert_eq!(int_root_ceil(10, 2), 4);
        assert_eq!(int_root_ceil(1, 4), 1);
    }
}
