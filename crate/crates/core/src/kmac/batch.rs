//! Batched best-first evaluation. Each candidate keeps its own queues and
//! frontier; pages read by any candidate of a batch are read from the index
//! once and served from the batch's ledger afterwards.

use std::collections::{BTreeMap, HashSet};

use super::{append_progress, hilbert_partition, timed_kgcs, CandidateReport, KmacOutcome};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::greedy::CandidateProfile;
use crate::index::{IoCounter, NodeId, RTree, RTreeNode, TreeRole};
use crate::skyline::{InfluenceSet, NodeReader, ProgressSample, QueryStats, RslState};

/// Reader that charges a page only the first time any candidate asks for
/// it. Candidate statistics still record every request.
#[derive(Debug, Default)]
pub struct SharedReader {
    ledger: HashSet<(TreeRole, NodeId)>,
    io: IoCounter,
}

impl SharedReader {
    pub fn ledger(&self) -> &HashSet<(TreeRole, NodeId)> {
        &self.ledger
    }

    pub fn io(&self) -> IoCounter {
        self.io
    }
}

impl NodeReader for SharedReader {
    fn read<'t>(
        &mut self,
        tree: &'t RTree,
        role: TreeRole,
        id: NodeId,
        stats: &mut QueryStats,
    ) -> Result<&'t RTreeNode> {
        let node = tree.peek(id)?;
        stats.record_read(role, id);
        if self.ledger.insert((role, id)) {
            self.io.charge(role);
        }
        Ok(node)
    }
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub results: BTreeMap<u64, (InfluenceSet, QueryStats)>,
    pub ledger: HashSet<(TreeRole, NodeId)>,
    /// Physical reads; equals the ledger size.
    pub io: IoCounter,
    pub progress: Vec<ProgressSample>,
}

/// Evaluates a batch, servicing candidates round-robin in id order, one
/// customer entry per turn.
pub fn batch_rsa(batch: &[Point], products: &RTree, customers: &RTree) -> Result<BatchOutcome> {
    if batch.is_empty() {
        return Err(Error::InvalidSpec("empty batch".into()));
    }
    let mut order: Vec<&Point> = batch.iter().collect();
    order.sort_by_key(|q| q.id);
    let mut states = order
        .iter()
        .map(|q| RslState::new(q, products, customers))
        .collect::<Result<Vec<_>>>()?;

    let mut reader = SharedReader::default();
    let mut emitted = 0u64;
    let mut progress = Vec::new();
    let mut live = states.len();
    while live > 0 {
        live = 0;
        for state in states.iter_mut() {
            if state.is_finished() {
                continue;
            }
            let before = reader.io.total();
            if state.step(&mut reader)?.is_some() {
                emitted += 1;
                progress.push(ProgressSample {
                    total_io: reader.io.total(),
                    results_emitted: emitted,
                });
            } else if reader.io.total() != before {
                progress.push(ProgressSample {
                    total_io: reader.io.total(),
                    results_emitted: emitted,
                });
            }
            if !state.is_finished() {
                live += 1;
            }
        }
    }

    let results = states
        .into_iter()
        .map(|s| (s.query().id, s.into_parts()))
        .collect();
    Ok(BatchOutcome {
        results,
        io: reader.io,
        ledger: reader.ledger,
        progress,
    })
}

/// Hilbert-partitions the candidates, evaluates every batch, then runs the
/// greedy selector.
pub fn batch_kmac(
    candidates: &[Point],
    products: &RTree,
    customers: &RTree,
    k: usize,
    batch_size: usize,
) -> Result<KmacOutcome> {
    if k == 0 || k > candidates.len() {
        return Err(Error::KOutOfRange {
            k,
            available: candidates.len(),
        });
    }
    let mut io = IoCounter::default();
    let mut checks = 0;
    let mut progress = Vec::new();
    let mut emitted = 0;
    let mut by_id: BTreeMap<u64, CandidateReport> = BTreeMap::new();
    for batch in hilbert_partition(candidates, batch_size)? {
        let out = batch_rsa(&batch.candidates, products, customers)?;
        append_progress(&mut progress, &out.progress, io.total(), emitted);
        io.add(&out.io);
        for (id, (influence, stats)) in out.results {
            checks += stats.dominance_checks;
            emitted += stats.emitted;
            by_id.insert(
                id,
                CandidateReport {
                    id,
                    influence,
                    stats,
                    discarded: false,
                },
            );
        }
    }
    // Report candidates in input order.
    let candidates: Vec<CandidateReport> = candidates
        .iter()
        .map(|q| by_id.remove(&q.id).expect("every candidate evaluated"))
        .collect();
    let profiles: Vec<CandidateProfile> = candidates
        .iter()
        .map(|r| CandidateProfile {
            id: r.id,
            influence: r.influence.clone(),
        })
        .collect();
    let (selection, selection_time) = timed_kgcs(&profiles, k)?;
    Ok(KmacOutcome {
        selection,
        candidates,
        io,
        dominance_checks: checks,
        progress,
        selection_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skyline::rsl;

    fn p(id: u64, v: &[f64]) -> Point {
        Point::new(id, v.to_vec())
    }

    fn data() -> (Vec<Point>, Vec<Point>) {
        let mut s = 12345u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % 1000) as f64
        };
        let products = (0..120).map(|i| p(i, &[next(), next()])).collect();
        let customers = (0..120).map(|i| p(i, &[next(), next()])).collect();
        (products, customers)
    }

    #[test]
    fn batch_of_one_matches_standalone() {
        let (products, customers) = data();
        let tp = RTree::bulk_load(&products, 6).unwrap();
        let tc = RTree::bulk_load(&customers, 6).unwrap();
        let q = p(7, &[400., 420.]);
        let (set, stats) = rsl(&q, &tp, &tc, None).unwrap();
        let out = batch_rsa(std::slice::from_ref(&q), &tp, &tc).unwrap();
        let (bset, bstats) = &out.results[&7];
        assert_eq!(*bset, set);
        assert_eq!(bstats.io, stats.io);
        assert_eq!(out.io, stats.io);
    }

    #[test]
    fn identical_candidates_share_all_reads() {
        let (products, customers) = data();
        let tp = RTree::bulk_load(&products, 6).unwrap();
        let tc = RTree::bulk_load(&customers, 6).unwrap();
        let (_, stats) = rsl(&p(1, &[300., 600.]), &tp, &tc, None).unwrap();
        let out = batch_rsa(&[p(1, &[300., 600.]), p(2, &[300., 600.])], &tp, &tc).unwrap();
        assert_eq!(out.io.total(), stats.total_io());
        assert_eq!(out.results[&1].0, out.results[&2].0);
    }
}
