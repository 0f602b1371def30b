//! Downstream evaluation: KNN, Gaussian naive Bayes and CART trained on the
//! selected columns, plus the summary statistics used in reports.
//!
//! All three classifiers break ties deterministically so that reports are
//! reproducible bit-for-bit.

use serde::Serialize;

use crate::dataset::{Dataset, FeatureMask, SplitPair};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;
const GNB_VAR_FLOOR: f64 = 1e-9;

fn check_width(train: &Dataset, queries: &[&[f64]]) -> Result<()> {
    match queries.iter().find(|q| q.len() != train.n_features()) {
        Some(q) => Err(Error::InvalidInput(format!(
            "query has {} values, training data has {} features",
            q.len(),
            train.n_features()
        ))),
        None => Ok(()),
    }
}

/// Index of the largest count; ties go to the smallest class id.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

/// k-nearest-neighbour vote under Euclidean distance.
pub fn knn_predict(train: &Dataset, queries: &[&[f64]], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > train.n_samples() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must be in 1..={}",
            train.n_samples()
        )));
    }
    check_width(train, queries)?;
    let labels = train.labels();
    Ok(queries
        .iter()
        .map(|q| {
            let mut dist: Vec<(f64, usize)> = train
                .rows()
                .enumerate()
                .map(|(i, r)| {
                    let d2: f64 = r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2, i)
                })
                .collect();
            // (distance, row) ordering puts lower rows first among equal distances
            dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; train.class_count()];
            for &(_, i) in &dist[..k] {
                votes[labels[i]] += 1;
            }
            majority(&votes)
        })
        .collect())
}

/// Gaussian naive Bayes with per-class, per-feature variances floored at 1e-9.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(train: &Dataset) -> Self {
        let c = train.class_count();
        let d = train.n_features();
        let sizes = train.class_sizes();
        let n = train.n_samples() as f64;
        let mut mean = vec![vec![0.0; d]; c];
        let mut var = vec![vec![0.0; d]; c];
        for (row, &y) in train.rows().zip(train.labels()) {
            for (m, v) in mean[y].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &k) in mean.iter_mut().zip(&sizes) {
            m.iter_mut().for_each(|v| *v /= k as f64);
        }
        for (row, &y) in train.rows().zip(train.labels()) {
            for j in 0..d {
                let dev = row[j] - mean[y][j];
                var[y][j] += dev * dev;
            }
        }
        for (v, &k) in var.iter_mut().zip(&sizes) {
            v.iter_mut().for_each(|s| *s = (*s / k as f64).max(GNB_VAR_FLOOR));
        }
        Self {
            log_prior: sizes.iter().map(|&k| (k as f64 / n).ln()).collect(),
            mean,
            var,
        }
    }

    pub fn log_posterior(&self, x: &[f64]) -> Vec<f64> {
        (0..self.log_prior.len())
            .map(|c| {
                let ll: f64 = x
                    .iter()
                    .zip(&self.mean[c])
                    .zip(&self.var[c])
                    .map(|((&v, &m), &s)| {
                        -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s)
                    })
                    .sum();
                self.log_prior[c] + ll
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let post = self.log_posterior(x);
        let mut best = 0;
        for (c, &p) in post.iter().enumerate() {
            if p > post[best] {
                best = c;
            }
        }
        best
    }
}

pub fn gnb_predict(train: &Dataset, queries: &[&[f64]]) -> Result<Vec<usize>> {
    check_width(train, queries)?;
    let model = GaussianNb::fit(train);
    Ok(queries.iter().map(|q| model.predict(q)).collect())
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// CART classifier with Gini impurity and no depth limit.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// An impure node is split on the candidate with the largest impurity
/// decrease (lowest feature, then lowest threshold, on ties), even when that
/// decrease is zero; a node becomes a leaf only once it is pure or has no
/// candidate left.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    root: Node,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&k| (k as f64 / t).powi(2)).sum::<f64>()
}

impl DecisionTree {
    pub fn fit(train: &Dataset) -> Self {
        let rows: Vec<usize> = (0..train.n_samples()).collect();
        Self {
            root: Self::grow(train, rows),
        }
    }

    fn grow(ds: &Dataset, rows: Vec<usize>) -> Node {
        let c = ds.class_count();
        let labels = ds.labels();
        let mut counts = vec![0usize; c];
        for &i in &rows {
            counts[labels[i]] += 1;
        }
        let leaf = majority(&counts);
        if counts.iter().filter(|&&k| k > 0).count() <= 1 {
            return Node::Leaf(leaf);
        }
        let parent = gini(&counts, rows.len());
        let n = rows.len();

        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..ds.n_features() {
            let mut order = rows.clone();
            order.sort_by(|&a, &b| ds.value(a, f).total_cmp(&ds.value(b, f)).then(a.cmp(&b)));
            let mut left = vec![0usize; c];
            for pos in 0..n - 1 {
                left[labels[order[pos]]] += 1;
                let (lo, hi) = (ds.value(order[pos], f), ds.value(order[pos + 1], f));
                if lo == hi {
                    continue;
                }
                let n_left = pos + 1;
                let right: Vec<usize> = counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let child = (n_left as f64 * gini(&left, n_left)
                    + (n - n_left) as f64 * gini(&right, n - n_left))
                    / n as f64;
                let gain = parent - child;
                if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return Node::Leaf(leaf);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| ds.value(i, feature) <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(Self::grow(ds, l)),
            right: Box::new(Self::grow(ds, r)),
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }
}

pub fn dt_predict(train: &Dataset, queries: &[&[f64]]) -> Result<Vec<usize>> {
    check_width(train, queries)?;
    let tree = DecisionTree::fit(train);
    Ok(queries.iter().map(|q| tree.predict(q)).collect())
}

/// Fraction of predictions equal to the truth.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("no predictions".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divisor n).
pub fn variance(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("variance of empty vector".into()));
    }
    let m = mean(values);
    Ok(values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64)
}

/// Pearson correlation from population moments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "pearson needs two equal-length vectors of length >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let n = x.len() as f64;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let sx = (x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>() / n).sqrt();
    let sy = (y.iter().map(|b| (b - my) * (b - my)).sum::<f64>() / n).sqrt();
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::InvalidInput("pearson of a constant vector".into()));
    }
    Ok((cov / (sx * sy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub knn: f64,
    pub gnb: f64,
    pub dt: f64,
    pub avg_acc: f64,
    pub variance: f64,
    pub selected: Vec<usize>,
    pub seed: u64,
}

/// Trains all three classifiers on the listed train columns and scores them
/// on the same test columns. Columns may repeat.
pub fn evaluate_columns(split: &SplitPair, columns: &[usize], seed: u64) -> Result<EvalReport> {
    let train = split.train.select_columns(columns)?;
    let test = split.test.select_columns(columns)?;
    let queries: Vec<&[f64]> = test.rows().collect();
    let truth = test.labels();
    let k = DEFAULT_K.min(train.n_samples());
    let knn = accuracy(&knn_predict(&train, &queries, k)?, truth)?;
    let gnb = accuracy(&gnb_predict(&train, &queries)?, truth)?;
    let dt = accuracy(&dt_predict(&train, &queries)?, truth)?;
    let accs = [knn, gnb, dt];
    Ok(EvalReport {
        knn,
        gnb,
        dt,
        avg_acc: mean(&accs),
        variance: variance(&accs)?,
        selected: columns.to_vec(),
        seed,
    })
}

pub fn evaluate_subset(split: &SplitPair, mask: &FeatureMask, seed: u64) -> Result<EvalReport> {
    if mask.len() != split.train.n_features() {
        return Err(Error::InvalidInput(format!(
            "mask has {} entries, dataset has {} features",
            mask.len(),
            split.train.n_features()
        )));
    }
    let cols = mask.indices();
    if cols.is_empty() {
        return Err(Error::EmptySubset);
    }
    evaluate_columns(split, &cols, seed)
}
