//! Branch-and-bound evaluation over an aggregate customer index. Every
//! candidate runs its own resumable query; the one with the largest upper
//! bound advances by one customer entry at a time, and candidates whose
//! optimistic contribution cannot reach the current greedy lower bound are
//! dropped.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::{timed_kgcs, CandidateReport, KmacOutcome};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::greedy::{kgcs, CandidateProfile};
use crate::index::{ARTree, IoCounter, RTree};
use crate::skyline::{DirectReader, ProgressSample, RslState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateBounds {
    pub id: u64,
    /// Customers confirmed so far.
    pub lower: u64,
    /// Customers not yet ruled out.
    pub upper: u64,
    pub finished: bool,
    pub discarded: bool,
}

/// Snapshot handed to the observer after every step.
#[derive(Clone, Debug)]
pub struct BbStep {
    pub step: u64,
    /// Candidate advanced in this step.
    pub advanced: u64,
    /// Candidates discarded after this step.
    pub discarded: Vec<u64>,
    pub lower_bound: usize,
    /// One entry per candidate, in input order.
    pub bounds: Vec<CandidateBounds>,
}

type Key = (u64, Reverse<u64>, usize);

struct Search<'a> {
    states: Vec<RslState<'a>>,
    discarded: Vec<bool>,
    k: usize,
    /// Non-discarded candidates keyed by upper bound.
    kept: BTreeSet<Key>,
    /// Non-discarded, unfinished candidates.
    live: BTreeSet<Key>,
    lower_bound: usize,
    lb_dirty: bool,
}

impl<'a> Search<'a> {
    fn key(&self, i: usize) -> Key {
        (self.states[i].upper_bound(), Reverse(self.states[i].query().id), i)
    }

    /// Sum of the `k - 1` largest upper bounds among kept candidates other
    /// than `i`.
    fn others_sum(&self, i: usize) -> u64 {
        self.kept
            .iter()
            .rev()
            .filter(|&&(_, _, j)| j != i)
            .take(self.k - 1)
            .map(|&(u, _, _)| u)
            .sum()
    }

    /// Greedy score over the confirmed sets, recomputed only when a
    /// confirmed set grew and the cheap ceiling says it could matter.
    fn refresh_lower_bound(&mut self, smallest_ub: u64) -> Result<()> {
        if !self.lb_dirty {
            return Ok(());
        }
        let mut lens: Vec<u64> = self.states.iter().map(|s| s.lower_bound()).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        let ceiling: u64 = lens.iter().take(self.k).sum();
        if ceiling <= smallest_ub {
            // No candidate can be dropped yet; keep the stale value.
            return Ok(());
        }
        let profiles: Vec<CandidateProfile> = self
            .states
            .iter()
            .map(|s| CandidateProfile {
                id: s.query().id,
                influence: s.confirmed().clone(),
            })
            .collect();
        self.lower_bound = kgcs(&profiles, self.k)?.joint_score;
        self.lb_dirty = false;
        Ok(())
    }

    /// Drops live candidates whose bound falls below the lower bound. Scans
    /// from the smallest upper bound; the first survivor ends the scan since
    /// everything after it has a bound at least as large.
    fn prune(&mut self) -> Result<Vec<u64>> {
        let mut dropped = Vec::new();
        while let Some(&first) = self.live.first() {
            let i = first.2;
            let ub = first.0 + self.others_sum(i);
            self.refresh_lower_bound(ub)?;
            if ub >= self.lower_bound as u64 {
                break;
            }
            self.live.remove(&first);
            self.kept.remove(&first);
            self.discarded[i] = true;
            dropped.push(self.states[i].query().id);
        }
        Ok(dropped)
    }

    fn bounds(&self) -> Vec<CandidateBounds> {
        self.states
            .iter()
            .zip(&self.discarded)
            .map(|(s, &discarded)| CandidateBounds {
                id: s.query().id,
                lower: s.lower_bound(),
                upper: s.upper_bound(),
                finished: s.is_finished(),
                discarded,
            })
            .collect()
    }
}

/// Branch-and-bound k-MAC evaluation.
pub fn bb_kmac(
    candidates: &[Point],
    products: &RTree,
    customers: &ARTree,
    k: usize,
) -> Result<KmacOutcome> {
    bb_kmac_observed(candidates, products, customers, k, None)
}

/// [`bb_kmac`] with a hook called after every step.
pub fn bb_kmac_observed(
    candidates: &[Point],
    products: &RTree,
    customers: &ARTree,
    k: usize,
    mut observer: Option<&mut dyn FnMut(&BbStep)>,
) -> Result<KmacOutcome> {
    if k == 0 || k > candidates.len() {
        return Err(Error::KOutOfRange {
            k,
            available: candidates.len(),
        });
    }
    let tc = customers.as_rtree();
    let states = candidates
        .iter()
        .map(|q| RslState::new(q, products, tc))
        .collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        discarded: vec![false; states.len()],
        states,
        k,
        kept: BTreeSet::new(),
        live: BTreeSet::new(),
        lower_bound: 0,
        lb_dirty: false,
    };
    for i in 0..search.states.len() {
        let key = search.key(i);
        search.kept.insert(key);
        if !search.states[i].is_finished() {
            search.live.insert(key);
        }
    }

    let mut reader = DirectReader;
    let mut io_total = 0u64;
    let mut emitted = 0u64;
    let mut progress = Vec::new();
    let mut step = 0u64;
    while let Some(top) = search.live.pop_last() {
        let i = top.2;
        search.kept.remove(&top);
        let state = &mut search.states[i];
        let before = state.stats().total_io();
        let confirmed = state.step(&mut reader)?;
        let read = state.stats().total_io() - before;
        let finished = state.is_finished();
        io_total += read;
        if confirmed.is_some() {
            emitted += 1;
            search.lb_dirty = true;
        }
        if read > 0 || confirmed.is_some() {
            progress.push(ProgressSample {
                total_io: io_total,
                results_emitted: emitted,
            });
        }
        let key = search.key(i);
        search.kept.insert(key);
        if !finished {
            search.live.insert(key);
        }
        let dropped = search.prune()?;
        step += 1;
        if let Some(obs) = observer.as_deref_mut() {
            obs(&BbStep {
                step,
                advanced: search.states[i].query().id,
                discarded: dropped,
                lower_bound: search.lower_bound,
                bounds: search.bounds(),
            });
        }
    }

    let mut io = IoCounter::default();
    let mut checks = 0;
    let mut reports = Vec::with_capacity(search.states.len());
    for (state, discarded) in search.states.into_iter().zip(search.discarded) {
        let id = state.query().id;
        let (influence, stats) = state.into_parts();
        io.add(&stats.io);
        checks += stats.dominance_checks;
        reports.push(CandidateReport {
            id,
            influence,
            stats,
            discarded,
        });
    }
    let profiles: Vec<CandidateProfile> = reports
        .iter()
        .filter(|r| !r.discarded)
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
