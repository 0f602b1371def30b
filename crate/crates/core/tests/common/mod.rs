//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use mvmr_fs::{FeatureMask, FeatureMetricsCache};

/// Exhaustive minimum of the subset score. Recomputes the closed form from
/// the cached `sim`/`red` values without going through the library scorer.
pub fn exhaustive_minimum(cache: &FeatureMetricsCache) -> (f64, Vec<FeatureMask>) {
    let d = cache.n_features();
    assert!(d <= 16, "exhaustive search is for small d");
    let mut best = f64::INFINITY;
    let mut scores = Vec::with_capacity(1 << d);
    for bits in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|&i| bits & (1 << i) != 0).collect();
        let k = idx.len() as f64;
        let sim_sum: f64 = idx.iter().map(|&i| cache.sim()[i]).sum();
        let mut pairs = 0.0;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                pairs += cache.red(idx[a], idx[b]);
            }
        }
        let score = k.sqrt() * (sim_sum / k) / (k + k * (k - 1.0) * (pairs / k)).sqrt();
        best = best.min(score);
        scores.push((score, idx));
    }
    let minimizers = scores
        .into_iter()
        .filter(|(s, _)| (s - best).abs() <= 1e-12)
        .map(|(_, idx)| FeatureMask::from_indices(d, &idx))
        .collect();
    (best, minimizers)
}

/// W1 between two densities sampled on the same nodes, via the explicit
/// monotone coupling of the node masses (optimal in one dimension).
pub fn transport_w1(nodes: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let masses = |f: &[f64]| {
        let h = nodes[1] - nodes[0];
        let mut m: Vec<f64> = f.iter().map(|v| v * h).collect();
        m[0] *= 0.5;
        *m.last_mut().unwrap() *= 0.5;
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= total);
        m
    };
    let (mut a, mut b) = (masses(p), masses(q));
    let (mut i, mut j) = (0, 0);
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let moved = a[i].min(b[j]);
        cost += moved * (nodes[i] - nodes[j]).abs();
        a[i] -= moved;
        b[j] -= moved;
        if a[i] <= 1e-300 {
            i += 1;
        }
        if b[j] <= 1e-300 {
            j += 1;
        }
    }
    cost
}
