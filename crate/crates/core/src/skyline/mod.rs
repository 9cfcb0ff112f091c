//! Single-query reverse skyline engines and their brute-force oracles.

mod brs;
mod frontier;
mod oracle;
mod rsl;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::index::{IoCounter, NodeId, RTree, RTreeNode, TreeRole};

pub use brs::brs;
pub use frontier::SkyFrontier;
pub use oracle::{oracle_dynamic_skyline, oracle_reverse_skyline};
pub use rsl::{rsl, rsl_with_reader, Pruned, RslState};

/// Ids of the customers whose dynamic skyline contains the query.
pub type InfluenceSet = BTreeSet<u64>;

/// Priority key. The best-first engine orders by `(level, mindist,
/// tiebreak)` so that point entries come before any node entry; the
/// baseline builds keys with level 0, which reduces the order to
/// `(mindist, tiebreak)`.
#[derive(Clone, Copy, Debug)]
pub struct PqKey {
    pub level: u32,
    pub mindist: f64,
    pub tiebreak: u64,
}

impl PqKey {
    pub fn by_level(level: u32, mindist: f64, tiebreak: u64) -> Self {
        PqKey {
            level,
            mindist,
            tiebreak,
        }
    }

    pub fn by_distance(mindist: f64, tiebreak: u64) -> Self {
        PqKey {
            level: 0,
            mindist,
            tiebreak,
        }
    }
}

impl PartialEq for PqKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PqKey {}

impl PartialOrd for PqKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PqKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.mindist.total_cmp(&other.mindist))
            .then_with(|| self.tiebreak.cmp(&other.tiebreak))
    }
}

/// `(total_io, results_emitted)` observed at an I/O or an emission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProgressSample {
    pub total_io: u64,
    pub results_emitted: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryStats {
    pub io: IoCounter,
    pub dominance_checks: u64,
    pub emitted: u64,
    pub progress: Vec<ProgressSample>,
    /// Every page requested, in order.
    pub reads: Vec<(TreeRole, NodeId)>,
}

impl QueryStats {
    pub fn total_io(&self) -> u64 {
        self.io.total()
    }

    fn sample(&mut self) {
        self.progress.push(ProgressSample {
            total_io: self.io.total(),
            results_emitted: self.emitted,
        });
    }

    pub(crate) fn record_read(&mut self, role: TreeRole, id: NodeId) {
        self.io.charge(role);
        self.reads.push((role, id));
        self.sample();
    }

    pub(crate) fn record_emit(&mut self) {
        self.emitted += 1;
        self.sample();
    }

    /// Smallest total I/O at which at least `n` results had been emitted.
    pub fn io_to_emit(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return Some(0);
        }
        self.progress
            .iter()
            .find(|s| s.results_emitted >= n)
            .map(|s| s.total_io)
    }
}

/// Source of node pages for an engine run. A standalone run charges every
/// read; a batch shares physical reads across its candidates.
pub trait NodeReader {
    fn read<'t>(
        &mut self,
        tree: &'t RTree,
        role: TreeRole,
        id: NodeId,
        stats: &mut QueryStats,
    ) -> Result<&'t RTreeNode>;
}

/// Charges one I/O per read.
#[derive(Debug, Default)]
pub struct DirectReader;

impl NodeReader for DirectReader {
    fn read<'t>(
        &mut self,
        tree: &'t RTree,
        role: TreeRole,
        id: NodeId,
        stats: &mut QueryStats,
    ) -> Result<&'t RTreeNode> {
        let node = tree.peek(id)?;
        stats.record_read(role, id);
        Ok(node)
    }
}

pub(crate) fn check_query_dims(q: &Point, products: &RTree, customers: &RTree) -> Result<()> {
    for found in [products.dim(), customers.dim()] {
        if found != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                found,
            });
        }
    }
    Ok(())
}
