//! Gaussian kernel density estimates sampled on uniform grids.
//!
//! Every estimate carries its grid, the pdf at each node and the cumulative
//! trapezoid integral of the pdf. Estimates that are compared with each
//! other (class envelopes, Wasserstein distances) must share a grid.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Grid padding on each side of the data range, in bandwidths.
pub const GRID_PADDING: f64 = 4.0;
pub const DEFAULT_GRID_POINTS: usize = 512;
pub const MIN_GRID_POINTS: usize = 16;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `points` equally spaced nodes from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDensity(format!("grid bounds [{lo}, {hi}] are not increasing")));
        }
        if points < MIN_GRID_POINTS {
            return Err(Error::InvalidDensity(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }

    /// Same node count, both ends moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::new(self.lo + delta, self.hi + delta, self.points)
    }
}

/// Trapezoid rule for values sampled at uniform `spacing`.
pub fn trapezoid(values: &[f64], spacing: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => spacing * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Running trapezoid integral, starting at zero on the first node.
pub fn cumulative_trapezoid(values: &[f64], spacing: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.extend(values.first().map(|_| 0.0));
    for w in values.windows(2) {
        acc += 0.5 * spacing * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    pub grid: GridSpec,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub bandwidth: f64,
    pub sample_count: usize,
}

impl DensityEstimate {
    /// Probability mass captured by the grid.
    pub fn mass(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }
}

/// Gaussian KDE `(1/(m h)) Σ φ((x - x_i)/h)` evaluated at every grid node.
pub fn kde(samples: &[f64], bandwidth: f64, grid: &GridSpec) -> Result<DensityEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidDensity("no samples".into()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidDensity(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDensity("non-finite sample".into()));
    }
    let norm = INV_SQRT_2PI / (samples.len() as f64 * bandwidth);
    let inv_h = 1.0 / bandwidth;
    let pdf: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let s: f64 = samples
                .iter()
                .map(|&xi| {
                    let u = (x - xi) * inv_h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            norm * s
        })
        .collect();
    let cdf = cumulative_trapezoid(&pdf, grid.spacing());
    Ok(DensityEstimate {
        grid: *grid,
        pdf,
        cdf,
        bandwidth,
        sample_count: samples.len(),
    })
}

/// Grid spanning the samples padded by `GRID_PADDING` bandwidths on each side.
pub fn make_grid(samples: &[f64], bandwidth: f64, points: usize) -> Result<GridSpec> {
    if samples.is_empty() {
        return Err(Error::InvalidDensity("no samples".into()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidDensity(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    GridSpec::new(
        lo - GRID_PADDING * bandwidth,
        hi + GRID_PADDING * bandwidth,
        points,
    )
}

/// Pooled and per-class densities of one feature on a shared grid.
#[derive(Debug, Clone, Serialize)]
pub struct ClassDensities {
    pub feature_index: usize,
    pub ukde: DensityEstimate,
    pub skde: Vec<DensityEstimate>,
}

impl ClassDensities {
    pub fn grid(&self) -> &GridSpec {
        &self.ukde.grid
    }
}

pub fn estimate_feature(
    ds: &Dataset,
    feature_index: usize,
    bandwidth: f64,
    points: usize,
) -> Result<ClassDensities> {
    if feature_index >= ds.n_features() {
        return Err(Error::InvalidInput(format!(
            "feature {feature_index} out of range for {} features",
            ds.n_features()
        )));
    }
    let column = ds.column(feature_index);
    let grid = make_grid(&column, bandwidth, points)?;
    let ukde = kde(&column, bandwidth, &grid)?;
    let skde = (0..ds.class_count())
        .map(|c| {
            let values = ds.class_column(feature_index, c);
            if values.is_empty() {
                return Err(Error::InvalidDataset(format!(
                    "class `{}` has no samples",
                    ds.class_names()[c]
                )));
            }
            kde(&values, bandwidth, &grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassDensities {
        feature_index,
        ukde,
        skde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, points: usize) -> GridSpec {
        GridSpec::new(lo, hi, points).unwrap()
    }

    #[test]
    fn single_kernel_peak_and_symmetry() {
        let g = grid(-5.0, 5.0, 1001);
        let est = kde(&[0.0], 1.0, &g).unwrap();
        assert!((est.pdf[500] - 0.398_942_280_401_432_7).abs() < 1e-6);
        assert_eq!(g.node(500), 0.0);
        // nodes 400 and 600 are -1 and +1
        assert!((est.pdf[400] - est.pdf[600]).abs() < 1e-15);
    }

    #[test]
    fn two_point_mixture_integrates_to_one() {
        // analytic mass of N(-1, .25) + N(1, .25) on [-4, 4]:
        // 0.5 * [Φ(6) - Φ(-10)] + 0.5 * [Φ(10) - Φ(-6)] = 1 - Φ(-6) ≈ 1 - 9.9e-10
        let g = grid(-4.0, 4.0, 2001);
        let est = kde(&[-1.0, 1.0], 0.5, &g).unwrap();
        assert!((trapezoid(&est.pdf, g.spacing()) - 1.0).abs() < 0.01);
        assert!((est.mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_padding_examples() {
        let g = make_grid(&[0.0, 0.3, 1.0], 1.0, 512).unwrap();
        assert_eq!((g.lo(), g.hi(), g.points()), (-4.0, 5.0, 512));
        let g = make_grid(&[3.0, 3.0], 0.5, 64).unwrap();
        assert_eq!((g.lo(), g.hi()), (1.0, 5.0));
    }

    #[test]
    fn padding_truncates_little_mass() {
        // Φ(-4) ≈ 3.17e-5 per side
        let est = kde(&[0.0], 1.0, &make_grid(&[0.0], 1.0, 2048).unwrap()).unwrap();
        assert!(1.0 - est.mass() < 1e-4);
        assert!(1.0 - est.mass() > 5e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = grid(0.0, 1.0, 16);
        assert!(kde(&[], 1.0, &g).is_err());
        assert!(kde(&[0.5], 0.0, &g).is_err());
        assert!(kde(&[0.5], -1.0, &g).is_err());
        assert!(make_grid(&[], 1.0, 16).is_err());
        assert!(GridSpec::new(1.0, 1.0, 16).is_err());
        assert!(GridSpec::new(0.0, 1.0, 15).is_err());
    }

    fn dataset(rows: Vec<(f64, usize)>, classes: usize) -> Dataset {
        let (vals, labels): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Dataset::new(
            vals.into_iter().map(|v| vec![v]).collect(),
            labels,
            vec!["x".into()],
            (0..classes).map(|c| format!("c{c}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_classes_give_identical_skde() {
        let ds = dataset(vec![(0.1, 0), (0.7, 0), (0.1, 1), (0.7, 1)], 2);
        let cd = estimate_feature(&ds, 0, 0.3, 128).unwrap();
        assert_eq!(cd.skde[0].pdf, cd.skde[1].pdf);
        for ((u, a), b) in cd.ukde.pdf.iter().zip(&cd.skde[0].pdf).zip(&cd.skde[1].pdf) {
            assert!((u - (0.5 * a + 0.5 * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn iris_petal_width_setosa_is_sharpest() {
        let ds = crate::dataset::min_max_normalize(&crate::dataset::iris());
        let cd = estimate_feature(&ds, 3, 1.0, 512).unwrap();
        let peak = |e: &DensityEstimate| e.pdf.iter().cloned().fold(0.0, f64::max);
        let setosa = peak(&cd.skde[0]);
        assert!(setosa > peak(&cd.skde[1]));
        assert!(setosa > peak(&cd.skde[2]));
        // setosa mode sits leftmost
        let argmax = |e: &DensityEstimate| {
            e.pdf
                .iter()
                .enumerate()
                .fold((0, 0.0), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                .0
        };
        assert!(argmax(&cd.skde[0]) < argmax(&cd.skde[1]));
        assert!(argmax(&cd.skde[1]) < argmax(&cd.skde[2]));
    }

    #[test]
    fn feature_index_out_of_range() {
        let ds = dataset(vec![(0.0, 0), (1.0, 1)], 2);
        assert!(estimate_feature(&ds, 1, 1.0, 64).is_err());
    }

    proptest! {
        #[test]
        fn mixture_identity_holds(
            rows in prop::collection::vec((-5f64..5.0, 0usize..3), 6..60),
            h in 0.05f64..2.0,
        ) {
            let mut rows = rows;
            // make sure each class is represented
            for c in 0..3 {
                rows[c].1 = c;
            }
            let n = rows.len() as f64;
            let ds = dataset(rows, 3);
            let cd = estimate_feature(&ds, 0, h, 256).unwrap();
            let sizes = ds.class_sizes();
            for g in 0..256 {
                let mix: f64 = cd.skde.iter().zip(&sizes).map(|(s, &k)| k as f64 / n * s.pdf[g]).sum();
                prop_assert!((cd.ukde.pdf[g] - mix).abs() <= 1e-10);
            }
            for est in std::iter::once(&cd.ukde).chain(&cd.skde) {
                prop_assert!(est.mass() >= 0.999 && est.mass() <= 1.0001, "mass {}", est.mass());
                prop_assert!(est.pdf.iter().all(|&p| p >= 0.0));
                prop_assert!(est.cdf.windows(2).all(|w| w[1] >= w[0]));
            }
        }

        #[test]
        fn translation_equivariance(
            samples in prop::collection::vec(-3f64..3.0, 1..30),
            delta in -10f64..10.0,
        ) {
            let g = make_grid(&samples, 0.5, 128).unwrap();
            let moved: Vec<f64> = samples.iter().map(|v| v + delta).collect();
            let a = kde(&samples, 0.5, &g).unwrap();
            let b = kde(&moved, 0.5, &g.shifted(delta).unwrap()).unwrap();
            for (x, y) in a.pdf.iter().zip(&b.pdf) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
