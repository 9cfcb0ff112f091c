#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rskyline_core::datagen::{generate, Distribution, GenSpec};
use rskyline_core::Point;

pub struct Instance {
    pub products: Vec<Point>,
    pub customers: Vec<Point>,
    pub candidates: Vec<Point>,
    pub fanout: usize,
    pub dim: usize,
}

pub const DISTS: [Distribution; 3] = [
    Distribution::Uniform,
    Distribution::AntiCorrelated,
    Distribution::Correlated,
];

/// Rounds every coordinate to a multiple of `step`, producing ties.
pub fn snap(points: &mut [Point], step: f64) {
    for p in points {
        for v in &mut p.coords {
            *v = (*v / step).round() * step;
        }
    }
}

/// Random workload: D in {2,3,4}, |P| and |C| in [20, 200], distribution
/// cycling through UN/AC/CO. Every fourth instance is snapped to a coarse
/// grid so equal distances show up.
pub fn instance(seed: u64, n_candidates: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(2..=4);
    let dist = DISTS[(seed % 3) as usize];
    let np = rng.random_range(20..=200);
    let nc = rng.random_range(20..=200);
    let gen = |n: usize, s: u64| {
        generate(&GenSpec {
            distribution: dist,
            n,
            dim,
            seed: s,
        })
        .unwrap()
    };
    let mut products = gen(np, rng.random());
    let mut customers = gen(nc, rng.random());
    let mut candidates: Vec<Point> = (0..n_candidates)
        .map(|i| {
            let coords: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1000.0)).collect();
            Point::new(10_000 + i as u64, coords)
        })
        .collect();
    if seed % 4 == 3 {
        snap(&mut products, 100.0);
        snap(&mut customers, 100.0);
        snap(&mut candidates, 100.0);
    }
    Instance {
        products,
        customers,
        candidates,
        fanout: rng.random_range(3..=8),
        dim,
    }
}

/// Candidates scattered within `radius` of one random centre.
pub fn clustered_candidates(seed: u64, dim: usize, n: usize, radius: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let centre: Vec<f64> = (0..dim).map(|_| rng.random_range(radius..1000.0 - radius)).collect();
    (0..n)
        .map(|i| {
            let coords: Vec<f64> = centre
                .iter()
                .map(|c| c + rng.random_range(-radius..radius))
                .collect();
            Point::new(20_000 + i as u64, coords)
        })
        .collect()
}
