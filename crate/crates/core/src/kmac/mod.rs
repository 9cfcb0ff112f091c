//! Evaluators for the k-most-attractive-candidates query: pick `k`
//! candidates whose combined influence sets cover the most customers.

mod batch;
mod bb;
mod hilbert;

use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::greedy::{kgcs, CandidateProfile, Selection};
use crate::index::{IoCounter, RTree};
use crate::skyline::{brs, rsl, InfluenceSet, ProgressSample, QueryStats};

pub use batch::{batch_kmac, batch_rsa, BatchOutcome, SharedReader};
pub use bb::{bb_kmac, bb_kmac_observed, BbStep, CandidateBounds};
pub use hilbert::{hilbert_index, hilbert_keys, HILBERT_BITS};

/// Default number of candidates processed together.
pub const DEFAULT_BATCH_SIZE: usize = 10;

/// Single-query engine used by the basic evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingleEngine {
    Brs,
    Rsl,
}

impl FromStr for SingleEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brs" => Ok(SingleEngine::Brs),
            "rsl" => Ok(SingleEngine::Rsl),
            other => Err(Error::InvalidSpec(format!("unknown engine {other:?}"))),
        }
    }
}

/// Candidates that are contiguous in Hilbert order.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub candidates: Vec<Point>,
}

impl Batch {
    pub fn ids(&self) -> Vec<u64> {
        self.candidates.iter().map(|c| c.id).collect()
    }
}

/// Sorts candidates along a Hilbert curve over their bounding box (ties by
/// id) and cuts the order into runs of `batch_size`.
pub fn hilbert_partition(candidates: &[Point], batch_size: usize) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::InvalidSpec("batch size must be at least 1".into()));
    }
    let keys = hilbert_keys(candidates);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (keys[i], candidates[i].id));
    Ok(order
        .chunks(batch_size)
        .map(|chunk| Batch {
            candidates: chunk.iter().map(|&i| candidates[i].clone()).collect(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateReport {
    pub id: u64,
    /// Exact influence set, or the confirmed part of it when `discarded`.
    pub influence: InfluenceSet,
    /// Work the candidate requested; inside a batch, reads shared with
    /// other candidates are counted here but charged once in the outcome.
    pub stats: QueryStats,
    pub discarded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KmacOutcome {
    pub selection: Selection,
    pub candidates: Vec<CandidateReport>,
    /// Physical page reads.
    pub io: IoCounter,
    pub dominance_checks: u64,
    /// Workload-level `(physical io, results emitted)` samples.
    pub progress: Vec<ProgressSample>,
    /// Wall time of the greedy selection stage alone.
    pub selection_time: Duration,
}

pub(crate) fn timed_kgcs(profiles: &[CandidateProfile], k: usize) -> Result<(Selection, Duration)> {
    let start = Instant::now();
    let selection = kgcs(profiles, k)?;
    Ok((selection, start.elapsed()))
}

/// Appends one run's samples to a workload-level series, offset by the
/// work done before it.
pub(crate) fn append_progress(
    series: &mut Vec<ProgressSample>,
    run: &[ProgressSample],
    io_before: u64,
    emitted_before: u64,
) {
    series.extend(run.iter().map(|s| ProgressSample {
        total_io: io_before + s.total_io,
        results_emitted: emitted_before + s.results_emitted,
    }));
}

/// Runs the chosen single-query engine for every candidate, then the greedy
/// selector over the resulting influence sets.
pub fn basic_kmac(
    candidates: &[Point],
    products: &RTree,
    customers: &RTree,
    k: usize,
    engine: SingleEngine,
) -> Result<KmacOutcome> {
    if k == 0 || k > candidates.len() {
        return Err(Error::KOutOfRange {
            k,
            available: candidates.len(),
        });
    }
    let mut reports = Vec::with_capacity(candidates.len());
    let mut io = IoCounter::default();
    let mut checks = 0;
    let mut progress = Vec::new();
    let mut emitted = 0;
    for q in candidates {
        let (influence, stats) = match engine {
            SingleEngine::Brs => brs(q, products, customers, None)?,
            SingleEngine::Rsl => rsl(q, products, customers, None)?,
        };
        append_progress(&mut progress, &stats.progress, io.total(), emitted);
        io.add(&stats.io);
        checks += stats.dominance_checks;
        emitted += stats.emitted;
        reports.push(CandidateReport {
            id: q.id,
            influence,
            stats,
            discarded: false,
        });
    }
    let profiles: Vec<CandidateProfile> = reports
        .iter()
        .map(|r| CandidateProfile {
            id: r.id,
            influence: r.influence.clone(),
        })
        .collect();
    let (selection, selection_time) = timed_kgcs(&profiles, k)?;
    Ok(KmacOutcome {
        selection,
        candidates: reports,
        io,
        dominance_checks: checks,
        progress,
        selection_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: u64, v: &[f64]) -> Point {
        Point::new(id, v.to_vec())
    }

    #[test]
    fn partition_sizes() {
        let q: Vec<Point> = (0..10).map(|i| p(i, &[i as f64, (i * 7 % 10) as f64])).collect();
        let sizes = |b: usize| -> Vec<usize> {
            hilbert_partition(&q, b)
                .unwrap()
                .iter()
                .map(|b| b.candidates.len())
                .collect()
        };
        assert_eq!(sizes(10), vec![10]);
        assert_eq!(sizes(3), vec![3, 3, 3, 1]);
        assert!(hilbert_partition(&q, 0).is_err());
    }

    #[test]
    fn collinear_candidates_group_in_order() {
        let q = vec![p(0, &[0., 0.]), p(1, &[1., 0.]), p(2, &[2., 0.]), p(3, &[100., 0.])];
        let batches = hilbert_partition(&q, 2).unwrap();
        let ids: Vec<Vec<u64>> = batches.iter().map(|b| b.ids()).collect();
        assert_eq!(ids, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn basic_single_candidate() {
        let products = vec![p(1, &[2., 2.]), p(2, &[8., 3.])];
        let customers = vec![p(1, &[0., 0.]), p(2, &[10., 10.]), p(3, &[7., 1.])];
        let tp = RTree::bulk_load(&products, 4).unwrap();
        let tc = RTree::bulk_load(&customers, 4).unwrap();
        let q = vec![p(0, &[6., 6.])];
        let expected = crate::skyline::oracle_reverse_skyline(&q[0], &products, &customers);
        for engine in [SingleEngine::Brs, SingleEngine::Rsl] {
            let out = basic_kmac(&q, &tp, &tc, 1, engine).unwrap();
            assert_eq!(out.selection.chosen, vec![0]);
            assert_eq!(out.selection.joint_score, expected.len());
        }
        assert!(basic_kmac(&q, &tp, &tc, 2, SingleEngine::Rsl).is_err());
    }
}
