//! Maximum k-coverage over candidate influence sets: the k-stage greedy
//! selector and an exhaustive optimum for small inputs.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::skyline::InfluenceSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateProfile {
    pub id: u64,
    pub influence: InfluenceSet,
}

impl CandidateProfile {
    pub fn new(id: u64, influence: impl IntoIterator<Item = u64>) -> Self {
        CandidateProfile {
            id,
            influence: influence.into_iter().collect(),
        }
    }
}

/// Chosen candidate ids in selection order, and the size of the union of
/// their influence sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub chosen: Vec<u64>,
    pub joint_score: usize,
}

/// Upper limit on the number of subsets [`exhaustive_opt`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

pub fn joint_influence_score<'a>(sets: impl IntoIterator<Item = &'a InfluenceSet>) -> usize {
    let mut union = BTreeSet::new();
    for s in sets {
        union.extend(s.iter().copied());
    }
    union.len()
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 || k > available {
        return Err(Error::KOutOfRange { k, available });
    }
    Ok(())
}

/// Greedy selection: `k` rounds, each adding the candidate whose influence
/// set grows the covered customers the most. Ties go to the smallest id.
/// The joint score is within `1 - 1/e` of the optimum.
pub fn kgcs(profiles: &[CandidateProfile], k: usize) -> Result<Selection> {
    check_k(k, profiles.len())?;
    let mut order: Vec<&CandidateProfile> = profiles.iter().collect();
    order.sort_by_key(|p| p.id);
    let mut taken = vec![false; order.len()];
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, usize)> = None;
        for (i, p) in order.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain = p.influence.iter().filter(|c| !covered.contains(c)).count();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("k <= number of profiles");
        taken[i] = true;
        covered.extend(order[i].influence.iter().copied());
        chosen.push(order[i].id);
    }
    Ok(Selection {
        chosen,
        joint_score: covered.len(),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Best achievable joint score and every k-subset (ids ascending, subsets in
/// lexicographic order) that reaches it.
pub fn exhaustive_optima(profiles: &[CandidateProfile], k: usize) -> Result<(usize, Vec<Vec<u64>>)> {
    check_k(k, profiles.len())?;
    let n = profiles.len();
    if binomial(n, k) > EXHAUSTIVE_LIMIT as u128 {
        return Err(Error::SearchTooLarge {
            n,
            k,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut order: Vec<&CandidateProfile> = profiles.iter().collect();
    order.sort_by_key(|p| p.id);

    // Dense bitsets over the customer universe.
    let mut dense: HashMap<u64, usize> = HashMap::new();
    for p in &order {
        for c in &p.influence {
            let next = dense.len();
            dense.entry(*c).or_insert(next);
        }
    }
    let words = dense.len().div_ceil(64).max(1);
    let bits: Vec<Vec<u64>> = order
        .iter()
        .map(|p| {
            let mut b = vec![0u64; words];
            for c in &p.influence {
                let i = dense[c];
                b[i / 64] |= 1 << (i % 64);
            }
            b
        })
        .collect();

    let mut best = 0usize;
    let mut optima: Vec<Vec<u64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut acc = vec![0u64; words];
    loop {
        acc.iter_mut().for_each(|w| *w = 0);
        for &i in &idx {
            for (a, b) in acc.iter_mut().zip(&bits[i]) {
                *a |= b;
            }
        }
        let score = acc.iter().map(|w| w.count_ones() as usize).sum();
        let ids = || idx.iter().map(|&i| order[i].id).collect::<Vec<_>>();
        if score > best || optima.is_empty() {
            best = score;
            optima = vec![ids()];
        } else if score == best {
            optima.push(ids());
        }

        // Next combination in lexicographic order.
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok((best, optima))
}

/// A k-subset with maximum joint score; the lexicographically smallest one
/// among ties.
pub fn exhaustive_opt(profiles: &[CandidateProfile], k: usize) -> Result<Selection> {
    let (joint_score, mut optima) = exhaustive_optima(profiles, k)?;
    Ok(Selection {
        chosen: optima.swap_remove(0),
        joint_score,
    })
}
