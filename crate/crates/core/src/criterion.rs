//! Subset scoring from class-density overlap and Wasserstein redundancy.
//!
//! For a subset of `k` features with overlap ratios `sim_i` and pairwise
//! distances `red_ij`:
//!
//! ```text
//! corr  = Σ sim_i / k
//! red   = Σ_{i<j} red_ij / k
//! score = √k · corr / √(k + k(k-1) · red)
//! ```
//!
//! Lower scores are better: low overlap means the feature separates the
//! classes, a large distance between two features means they carry different
//! information.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{min_max_normalize, Dataset, FeatureMask};
use crate::density::{estimate_feature, kde, make_grid, trapezoid, ClassDensities, DensityEstimate};
use crate::error::{Error, Result};

/// Pointwise maximum and second largest value over the class densities.
pub fn class_envelopes(skde: &[DensityEstimate]) -> Result<(Vec<f64>, Vec<f64>)> {
    if skde.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "class envelopes need at least 2 classes, got {}",
            skde.len()
        )));
    }
    let grid = skde[0].grid;
    if skde.iter().any(|e| e.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let mut outer = Vec::with_capacity(grid.points());
    let mut overlap = Vec::with_capacity(grid.points());
    for g in 0..grid.points() {
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for est in skde {
            let v = est.pdf[g];
            if v >= first {
                second = first;
                first = v;
            } else if v > second {
                second = v;
            }
        }
        outer.push(first);
        overlap.push(second);
    }
    Ok((outer, overlap))
}

/// Ratio of the area under the second-largest class density to the area
/// under the largest one. In `[0, 1]`; lower means better class separation.
pub fn compute_sim(cd: &ClassDensities) -> Result<f64> {
    let (outer, overlap) = class_envelopes(&cd.skde)?;
    let h = cd.grid().spacing();
    let union = trapezoid(&outer, h);
    if !(union > 0.0) {
        return Err(Error::Numerical(format!(
            "class density envelope of feature {} has non-positive area",
            cd.feature_index
        )));
    }
    Ok((trapezoid(&overlap, h) / union).clamp(0.0, 1.0))
}

/// Wasserstein-1 distance as the integral of the absolute CDF difference.
pub fn wasserstein1(u: &DensityEstimate, v: &DensityEstimate) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = u.cdf.iter().zip(&v.cdf).map(|(a, b)| (a - b).abs()).collect();
    Ok(trapezoid(&diff, u.grid.spacing()))
}

/// Per-feature overlap ratios and pairwise W1 distances, computed once.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureMetricsCache {
    sim: Vec<f64>,
    red: Vec<Vec<f64>>,
    normalized: bool,
}

impl FeatureMetricsCache {
    /// Assembles a cache from precomputed values, checking ranges and symmetry.
    pub fn new(sim: Vec<f64>, red: Vec<Vec<f64>>, normalized: bool) -> Result<Self> {
        let d = sim.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty cache".into()));
        }
        if let Some(i) = sim.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidInput(format!("sim[{i}] = {} outside [0, 1]", sim[i])));
        }
        if red.len() != d || red.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput(format!("redundancy matrix must be {d}x{d}")));
        }
        for i in 0..d {
            if red[i][i] != 0.0 {
                return Err(Error::InvalidInput(format!("red[{i}][{i}] must be 0")));
            }
            for j in 0..i {
                if !(red[i][j] >= 0.0 && red[i][j].is_finite()) || red[i][j] != red[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "red[{i}][{j}] must be finite, non-negative and symmetric"
                    )));
                }
            }
        }
        Ok(Self { sim, red, normalized })
    }

    pub fn n_features(&self) -> usize {
        self.sim.len()
    }

    pub fn sim(&self) -> &[f64] {
        &self.sim
    }

    pub fn red(&self, i: usize, j: usize) -> f64 {
        self.red[i][j]
    }

    pub fn red_matrix(&self) -> &[Vec<f64>] {
        &self.red
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

/// Computes every per-feature `sim` and every pairwise `red`.
///
/// Each feature's `sim` uses a grid spanning that feature's padded range.
/// Each pair's W1 uses one grid spanning both features' padded ranges, with
/// pooled (label-free) densities.
pub fn build_cache(
    ds: &Dataset,
    bandwidth: f64,
    points: usize,
    normalize: bool,
) -> Result<FeatureMetricsCache> {
    let normalized;
    let ds = if normalize {
        normalized = min_max_normalize(ds);
        &normalized
    } else {
        ds
    };
    let d = ds.n_features();
    let sim = (0..d)
        .into_par_iter()
        .map(|j| estimate_feature(ds, j, bandwidth, points).and_then(|cd| compute_sim(&cd)))
        .collect::<Result<Vec<_>>>()?;

    let columns: Vec<Vec<f64>> = (0..d).map(|j| ds.column(j)).collect();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let distances = pairs
        .par_iter()
        .map(|&(i, j)| {
            let union: Vec<f64> = columns[i].iter().chain(&columns[j]).copied().collect();
            let grid = make_grid(&union, bandwidth, points)?;
            let u = kde(&columns[i], bandwidth, &grid)?;
            let v = kde(&columns[j], bandwidth, &grid)?;
            wasserstein1(&u, &v)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut red = vec![vec![0.0; d]; d];
    for (&(i, j), &w) in pairs.iter().zip(&distances) {
        red[i][j] = w;
        red[j][i] = w;
    }
    log::debug!("built metrics cache for {d} features ({} pairs)", pairs.len());
    FeatureMetricsCache::new(sim, red, normalize)
}

/// Score of the features at `indices`. Indices may repeat.
pub(crate) fn score_indices(cache: &FeatureMetricsCache, indices: &[usize]) -> Result<f64> {
    let k = indices.len();
    if k == 0 {
        return Err(Error::EmptySubset);
    }
    let kf = k as f64;
    let corr = indices.iter().map(|&i| cache.sim[i]).sum::<f64>() / kf;
    let mut pair_sum = 0.0;
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            pair_sum += cache.red[i][j];
        }
    }
    let red = pair_sum / kf;
    Ok(kf.sqrt() * corr / (kf + kf * (kf - 1.0) * red).sqrt())
}

/// Subset score for a feature mask; lower is better.
pub fn mvmr_score(cache: &FeatureMetricsCache, mask: &FeatureMask) -> Result<f64> {
    if mask.len() != cache.n_features() {
        return Err(Error::InvalidInput(format!(
            "mask has {} entries, cache has {} features",
            mask.len(),
            cache.n_features()
        )));
    }
    score_indices(cache, &mask.indices())
}

/// Score of every feature pair. The diagonal pairs a feature with itself,
/// which reduces to its `sim`.
pub fn pairwise_mvmr_matrix(cache: &FeatureMetricsCache) -> Vec<Vec<f64>> {
    let d = cache.n_features();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| score_indices(cache, &[i, j]).expect("pair is non-empty"))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{iris, make_artificial_iris};
    use crate::density::GridSpec;
    use proptest::prelude::*;

    fn est(samples: &[f64], h: f64, grid: &GridSpec) -> DensityEstimate {
        kde(samples, h, grid).unwrap()
    }

    #[test]
    fn envelope_order_statistics() {
        let g = GridSpec::new(0.0, 1.0, 16).unwrap();
        let mk = |v: f64| DensityEstimate {
            grid: g,
            pdf: vec![v; 16],
            cdf: vec![0.0; 16],
            bandwidth: 1.0,
            sample_count: 1,
        };
        let (outer, overlap) = class_envelopes(&[mk(0.1), mk(0.5), mk(0.3)]).unwrap();
        assert_eq!((outer[3], overlap[3]), (0.5, 0.3));
        let (outer, overlap) = class_envelopes(&[mk(0.4), mk(0.4)]).unwrap();
        assert_eq!(outer, overlap);
        assert!(class_envelopes(&[mk(0.4)]).is_err());
    }

    #[test]
    fn disjoint_classes_have_no_overlap() {
        let g = GridSpec::new(-4.0, 104.0, 4096).unwrap();
        let a = est(&[0.0], 1.0, &g);
        let b = est(&[100.0], 1.0, &g);
        let (_, overlap) = class_envelopes(&[a.clone(), b.clone()]).unwrap();
        assert!(overlap.iter().all(|&v| v < 1e-100));
        let cd = ClassDensities {
            feature_index: 0,
            ukde: a.clone(),
            skde: vec![a, b],
        };
        assert!(compute_sim(&cd).unwrap() < 1e-6);
    }

    #[test]
    fn identical_classes_have_unit_sim() {
        let g = GridSpec::new(-5.0, 6.0, 512).unwrap();
        let a = est(&[0.0, 0.3, 1.0], 1.0, &g);
        let cd = ClassDensities {
            feature_index: 0,
            ukde: a.clone(),
            skde: vec![a.clone(), a],
        };
        assert!((compute_sim(&cd).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn w1_identity_and_grid_check() {
        let g = GridSpec::new(-5.0, 6.0, 512).unwrap();
        let a = est(&[0.0, 0.3, 1.0], 1.0, &g);
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        let other = est(&[0.0], 1.0, &GridSpec::new(-5.0, 6.0, 513).unwrap());
        assert!(matches!(wasserstein1(&a, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn cache_examples() {
        let ds = Dataset::new(
            vec![vec![0.0, 0.0], vec![0.2, 0.2], vec![0.9, 0.9], vec![1.0, 1.0]],
            vec![0, 0, 1, 1],
            vec!["a".into(), "b".into()],
            vec!["p".into(), "q".into()],
        )
        .unwrap();
        let cache = build_cache(&ds, 0.3, 256, false).unwrap();
        assert!(cache.red(0, 1).abs() < 1e-9);
        assert_eq!(cache.sim()[0], cache.sim()[1]);

        let one = ds.select_columns(&[0]).unwrap();
        let cache = build_cache(&one, 0.3, 256, true).unwrap();
        assert_eq!(cache.red_matrix(), &[vec![0.0]]);
        assert_eq!(pairwise_mvmr_matrix(&cache), vec![vec![cache.sim()[0]]]);
    }

    #[test]
    fn artificial_iris_normalized_rows_match() {
        let art = make_artificial_iris(&iris()).unwrap();
        let cache = build_cache(&art, 1.0, 512, true).unwrap();
        assert!(cache.red(0, 4) <= 1e-9);
        for j in 0..5 {
            assert!((cache.red(0, j) - cache.red(4, j)).abs() <= 1e-9);
        }
        let m = pairwise_mvmr_matrix(&cache);
        for j in 0..5 {
            assert!((m[j][0] - m[j][4]).abs() <= 1e-9);
        }
        let s = cache.sim();
        // PW < PL < SL < SW
        assert!(s[3] < s[2] && s[2] < s[0] && s[0] < s[1], "{s:?}");
    }

    fn fixed_cache(sim: Vec<f64>, pair: f64) -> FeatureMetricsCache {
        FeatureMetricsCache::new(sim, vec![vec![0.0, pair], vec![pair, 0.0]], true).unwrap()
    }

    #[test]
    fn score_examples() {
        let cache = fixed_cache(vec![0.2, 0.4], 0.0);
        assert_eq!(mvmr_score(&cache, &FeatureMask::from_indices(2, &[1])).unwrap(), 0.4);
        // two copies of one feature: score collapses to its sim
        assert!((score_indices(&cache, &[0, 0]).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            mvmr_score(&cache, &FeatureMask::empty(2)),
            Err(Error::EmptySubset)
        ));
        assert!(mvmr_score(&cache, &FeatureMask::empty(3)).is_err());

        // values from a standalone evaluation of the closed form:
        //   0.3*sqrt(2)/sqrt(2 + 2*0.5)  = 0.24494897427831780
        //   0.3*sqrt(2)/sqrt(2 + 2*0.25) = 0.26832815729997480
        let both = FeatureMask::from_indices(2, &[0, 1]);
        let subset_red_half = fixed_cache(vec![0.2, 0.4], 1.0);
        assert!((mvmr_score(&subset_red_half, &both).unwrap() - 0.244_948_974_278_317_8).abs() < 1e-12);
        let pair_red_half = fixed_cache(vec![0.2, 0.4], 0.5);
        assert!((mvmr_score(&pair_red_half, &both).unwrap() - 0.268_328_157_299_974_8).abs() < 1e-12);
    }

    #[test]
    fn cache_validation() {
        assert!(FeatureMetricsCache::new(vec![1.5], vec![vec![0.0]], true).is_err());
        assert!(FeatureMetricsCache::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![2.0, 0.0]], true).is_err());
        assert!(FeatureMetricsCache::new(vec![0.5], vec![vec![0.1]], true).is_err());
    }

    proptest! {
        #[test]
        fn score_monotone_in_parts(
            s0 in 0.01f64..0.99, s1 in 0.01f64..0.99,
            r in 0.0f64..2.0, bump in 1e-3f64..1.0,
        ) {
            let both = FeatureMask::from_indices(2, &[0, 1]);
            let base = mvmr_score(&fixed_cache(vec![s0, s1], r), &both).unwrap();
            let more_red = mvmr_score(&fixed_cache(vec![s0, s1], r + bump), &both).unwrap();
            prop_assert!(more_red < base);
            let s0b = (s0 + bump).min(1.0);
            prop_assume!(s0b > s0);
            let more_sim = mvmr_score(&fixed_cache(vec![s0b, s1], r), &both).unwrap();
            prop_assert!(more_sim > base);
            prop_assert!(base >= 0.0);
            let no_red = mvmr_score(&fixed_cache(vec![s0, s1], 0.0), &both).unwrap();
            prop_assert!((no_red - 0.5 * (s0 + s1)).abs() < 1e-12);
        }

        #[test]
        fn pairwise_matrix_symmetric_with_sim_diagonal(seed in 0u64..1000) {
            let ds = crate::dataset::make_planted(&crate::dataset::SyntheticSpec {
                classes: 2, samples_per_class: 12, informative: 2, duplicated: 1, noise: 1,
                separation: 2.0, seed,
            }).unwrap();
            let cache = build_cache(&ds, 1.0, 64, true).unwrap();
            let m = pairwise_mvmr_matrix(&cache);
            for i in 0..4 {
                prop_assert!((m[i][i] - cache.sim()[i]).abs() < 1e-15);
                for j in 0..4 {
                    prop_assert_eq!(m[i][j], m[j][i]);
                }
            }
        }

        #[test]
        fn normalized_metrics_ignore_positive_rescaling(
            seed in 0u64..1000, scale in 0.1f64..50.0,
        ) {
            let ds = crate::dataset::make_planted(&crate::dataset::SyntheticSpec {
                classes: 3, samples_per_class: 10, informative: 2, duplicated: 0, noise: 1,
                separation: 2.0, seed,
            }).unwrap();
            let scaled: Vec<f64> = ds.column(1).iter().map(|v| v * scale).collect();
            let wider = ds.with_column("scaled", &scaled).unwrap();
            let cache = build_cache(&wider, 1.0, 128, true).unwrap();
            prop_assert!((cache.sim()[1] - cache.sim()[3]).abs() <= 1e-9);
            prop_assert!(cache.red(1, 3) <= 1e-9);
            for j in 0..3 {
                prop_assert!((cache.red(1, j) - cache.red(3, j)).abs() <= 1e-9);
            }
        }
    }
}
