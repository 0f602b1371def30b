//! Dataset ingestion, normalisation and splitting.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// A dense real-valued feature matrix with integer class labels.
///
/// Rows are stored contiguously. Labels are contiguous ids `0..class_count`
/// and every id occurs at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    d: usize,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row vectors, checking every invariant.
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(features, labels, feature_names, class_names)
    }

    pub(crate) fn from_flat(
        features: Vec<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let n = labels.len();
        let c = class_names.len();
        if d == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 rows, got {n}")));
        }
        if features.len() != n * d {
            return Err(Error::InvalidDataset("feature matrix shape mismatch".into()));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        let mut seen = HashMap::with_capacity(d);
        for name in &feature_names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidDataset(format!("duplicate feature name `{name}`")));
            }
        }
        let mut counts = vec![0usize; c];
        for &y in &labels {
            if y >= c {
                return Err(Error::InvalidDataset(format!("label {y} out of range 0..{c}")));
            }
            counts[y] += 1;
        }
        if let Some(missing) = counts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidDataset(format!("class {missing} has no samples")));
        }
        Ok(Self {
            features,
            n,
            d,
            labels,
            feature_names,
            class_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.d + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows().map(|r| r[col]).collect()
    }

    /// Values of column `col` restricted to samples of class `class`.
    pub fn class_column(&self, col: usize, class: usize) -> Vec<f64> {
        self.rows()
            .zip(&self.labels)
            .filter(|(_, &y)| y == class)
            .map(|(r, _)| r[col])
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// New dataset made of the given columns, in the given order.
    /// Repeated indices are allowed; repeated names get a `#k` suffix.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.d) {
            return Err(Error::InvalidInput(format!(
                "column {bad} out of range for {} features",
                self.d
            )));
        }
        let mut names = Vec::with_capacity(cols.len());
        for (k, &c) in cols.iter().enumerate() {
            let base = &self.feature_names[c];
            if cols[..k].contains(&c) {
                names.push(format!("{base}#{k}"));
            } else {
                names.push(base.clone());
            }
        }
        let mut features = Vec::with_capacity(self.n * cols.len());
        for row in self.rows() {
            features.extend(cols.iter().map(|&c| row[c]));
        }
        Self::from_flat(features, self.labels.clone(), names, self.class_names.clone())
    }

    /// New dataset made of the given rows. Every class must still be present.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.d);
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            if i >= self.n {
                return Err(Error::InvalidInput(format!("row {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::from_flat(
            features,
            labels,
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Appends a column; used to build derived datasets.
    pub fn with_column(&self, name: &str, values: &[f64]) -> Result<Self> {
        if values.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "column has {} values, dataset has {} rows",
                values.len(),
                self.n
            )));
        }
        let mut features = Vec::with_capacity(self.n * (self.d + 1));
        for (row, &v) in self.rows().zip(values) {
            features.extend_from_slice(row);
            features.push(v);
        }
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        Self::from_flat(features, self.labels.clone(), names, self.class_names.clone())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(s) => write!(f, "`{s}`"),
        }
    }
}

/// Loads a headered CSV file. Labels are encoded by order of first appearance.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label)
}

pub fn read_csv<R: Read>(reader: R, label: &LabelColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() {
        return Err(Error::InvalidDataset("empty header".into()));
    }
    let label_idx = match label {
        LabelColumn::Last => header.len() - 1,
        // a column literally named like the requested index wins
        LabelColumn::Index(i) => match header.iter().position(|h| *h == i.to_string()) {
            Some(p) => p,
            None if *i < header.len() => *i,
            None => return Err(Error::MissingLabelColumn(label.to_string())),
        },
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn(label.to_string()))?,
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                line,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseCell {
                    line,
                    column: header[j].clone(),
                    value: cell.to_string(),
                });
            }
            features.push(v);
        }
        let name = record[label_idx].to_string();
        let next = class_names.len();
        let id = *class_ids.entry(name.clone()).or_insert_with(|| {
            class_names.push(name);
            next
        });
        labels.push(id);
    }
    if labels.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 data rows, got {}",
            labels.len()
        )));
    }
    if class_names.len() < 2 {
        return Err(Error::InvalidDataset("need at least 2 classes".into()));
    }
    Dataset::from_flat(features, labels, feature_names, class_names)
}

/// The 150-sample Iris dataset, bundled with the crate.
pub fn iris() -> Dataset {
    read_csv(IRIS_CSV.as_bytes(), &LabelColumn::Last).expect("bundled iris.csv is valid")
}

/// Maps every column affinely onto `[0, 1]`. Constant columns become zeros.
pub fn min_max_normalize(ds: &Dataset) -> Dataset {
    let mut out = ds.clone();
    for j in 0..ds.d {
        let (lo, hi) = ds
            .rows()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        for i in 0..ds.n {
            let idx = i * ds.d + j;
            out.features[idx] = if range > 0.0 {
                (ds.features[idx] - lo) / range
            } else {
                0.0
            };
        }
    }
    out
}

/// A train/test partition of one dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Per-class shuffled split. Each class contributes `round(n_c * test_fraction)`
/// test rows, clamped so both sides keep at least one sample of every class.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for class in 0..ds.class_count() {
        let mut members: Vec<usize> = (0..ds.n).filter(|&i| ds.labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::InvalidSplit(format!(
                "class `{}` has {} sample(s); need at least 2",
                ds.class_names[class],
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64 * test_fraction).round() as usize)
            .clamp(1, members.len() - 1);
        test_indices.extend_from_slice(&members[..n_test]);
        train_indices.extend_from_slice(&members[n_test..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(SplitPair {
        train: ds.select_rows(&train_indices)?,
        test: ds.select_rows(&test_indices)?,
        train_indices,
        test_indices,
        seed,
    })
}

/// Iris plus a fifth column holding twice the first (sepal length).
pub fn make_artificial_iris(iris: &Dataset) -> Result<Dataset> {
    if iris.n_features() != 4 {
        return Err(Error::InvalidDataset(format!(
            "expected the 4-feature Iris dataset, got {} features",
            iris.n_features()
        )));
    }
    let doubled: Vec<f64> = iris.column(0).iter().map(|v| 2.0 * v).collect();
    let ds = iris.with_column("2SL", &doubled)?;
    let names = ["SL", "SW", "PL", "PW", "2SL"].map(String::from).to_vec();
    Dataset::from_flat(ds.features, ds.labels, names, ds.class_names)
}

/// Layout of a synthetic dataset with planted structure.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub samples_per_class: usize,
    /// Columns whose mean shifts with the class.
    pub informative: usize,
    /// Positively rescaled copies of informative columns.
    pub duplicated: usize,
    /// Standard normal columns independent of the class.
    pub noise: usize,
    /// Distance between consecutive class means on informative columns.
    pub separation: f64,
    pub seed: u64,
}

/// Generates `informative` columns first, then `duplicated`, then `noise`.
pub fn make_planted(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.classes < 2 || spec.samples_per_class < 1 || spec.informative < 1 {
        return Err(Error::InvalidInput(
            "need at least 2 classes, 1 sample per class and 1 informative column".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let d = spec.informative + spec.duplicated + spec.noise;
    let n = spec.classes * spec.samples_per_class;

    // each informative column gets its own random class ordering and spread
    let offsets: Vec<Vec<f64>> = (0..spec.informative)
        .map(|_| {
            let mut order: Vec<usize> = (0..spec.classes).collect();
            order.shuffle(&mut rng);
            let spread = spec.separation * (0.5 + rand::Rng::random::<f64>(&mut rng));
            order.iter().map(|&o| o as f64 * spread).collect()
        })
        .collect();
    let sources: Vec<(usize, f64)> = (0..spec.duplicated)
        .map(|k| {
            let scale = 0.5 + 2.0 * rand::Rng::random::<f64>(&mut rng);
            (k % spec.informative, scale)
        })
        .collect();

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for class in 0..spec.classes {
        for _ in 0..spec.samples_per_class {
            let start = features.len();
            for off in &offsets {
                features.push(off[class] + unit.sample(&mut rng));
            }
            for &(src, scale) in &sources {
                let v = features[start + src] * scale;
                features.push(v);
            }
            for _ in 0..spec.noise {
                features.push(unit.sample(&mut rng));
            }
            labels.push(class);
        }
    }
    let mut names = Vec::with_capacity(d);
    names.extend((0..spec.informative).map(|i| format!("inf{i}")));
    names.extend(sources.iter().enumerate().map(|(k, (s, _))| format!("dup{k}_of_inf{s}")));
    names.extend((0..spec.noise).map(|i| format!("noise{i}")));
    let class_names = (0..spec.classes).map(|c| format!("c{c}")).collect();
    Dataset::from_flat(features, labels, names, class_names)
}

/// Binary feature-selection mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMask(Vec<bool>);

impl FeatureMask {
    pub fn empty(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut m = Self::empty(len);
        for &i in indices {
            m.0[i] = true;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.0[i] = on;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_class(n_per: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..2 {
            for i in 0..n_per {
                rows.push(vec![i as f64 + 10.0 * c as f64]);
                labels.push(c);
            }
        }
        Dataset::new(rows, labels, vec!["x".into()], vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn loads_small_csv_with_first_appearance_labels() {
        let csv = "f1,f2,f3,cls\n1,2,3,a\n4,5,6,a\n7,8,9,b\n1.5,2.5,3.5,b\n";
        let ds = read_csv(csv.as_bytes(), &LabelColumn::Last).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.n_features(), 3);
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
        assert_eq!(ds.row(3), &[1.5, 2.5, 3.5]);
    }

    #[test]
    fn label_column_by_name_and_index() {
        let csv = "cls,x,y\nb,1,2\na,3,4\nb,5,6\n";
        let by_name = read_csv(csv.as_bytes(), &"cls".parse().unwrap()).unwrap();
        let by_index = read_csv(csv.as_bytes(), &"0".parse().unwrap()).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name.labels(), &[0, 1, 0]);
        assert_eq!(by_name.class_names(), &["b", "a"]);
        assert_eq!(by_name.feature_names(), &["x", "y"]);
    }

    #[test]
    fn unparseable_cell_names_line_and_column() {
        let csv = "f1,f2,cls\n1,2,a\n3,abc,b\n";
        let err = read_csv(csv.as_bytes(), &LabelColumn::Last).unwrap_err();
        match err {
            Error::ParseCell { line, column, value } => {
                assert_eq!(line, 3);
                assert_eq!(column, "f2");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_missing_label_and_degenerate_files() {
        let csv = "f1,cls\n1,a\n2,b\n";
        assert!(matches!(
            read_csv(csv.as_bytes(), &"label".parse().unwrap()),
            Err(Error::MissingLabelColumn(_))
        ));
        assert!(matches!(
            read_csv(csv.as_bytes(), &LabelColumn::Index(7)),
            Err(Error::MissingLabelColumn(_))
        ));
        assert!(read_csv("f1,cls\n1,a\n".as_bytes(), &LabelColumn::Last).is_err());
        assert!(read_csv("f1,cls\n1,a\n2,a\n".as_bytes(), &LabelColumn::Last).is_err());
        assert!(matches!(
            load_csv("/nonexistent/data.csv", &LabelColumn::Last),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn bundled_iris_shape() {
        let ds = iris();
        assert_eq!(ds.n_samples(), 150);
        assert_eq!(ds.n_features(), 4);
        assert_eq!(ds.class_count(), 3);
        assert_eq!(ds.class_sizes(), vec![50, 50, 50]);
    }

    #[test]
    fn normalize_examples() {
        let ds = Dataset::new(
            vec![vec![0.0, 7.0], vec![5.0, 7.0], vec![10.0, 7.0]],
            vec![0, 1, 1],
            vec!["a".into(), "b".into()],
            vec!["p".into(), "q".into()],
        )
        .unwrap();
        let n = min_max_normalize(&ds);
        assert_eq!(n.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(n.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(n.labels(), ds.labels());
    }

    #[test]
    fn artificial_iris_doubles_sepal_length() {
        let iris = iris();
        let art = make_artificial_iris(&iris).unwrap();
        assert_eq!(art.n_features(), 5);
        assert_eq!(art.n_samples(), 150);
        assert_eq!(art.class_count(), 3);
        assert_eq!(art.value(0, 0), 5.1);
        assert_eq!(art.value(0, 4), 10.2);
        for i in 0..150 {
            assert_eq!(art.value(i, 4), 2.0 * art.value(i, 0));
        }
        let norm = min_max_normalize(&art);
        assert_eq!(norm.column(0), norm.column(4));
        assert!(make_artificial_iris(&art).is_err());
    }

    #[test]
    fn split_examples() {
        let ds = two_class(5);
        let s = stratified_split(&ds, 0.2, 7).unwrap();
        assert_eq!(s.test.class_sizes(), vec![1, 1]);
        assert_eq!(s.train.class_sizes(), vec![4, 4]);
        let again = stratified_split(&ds, 0.2, 7).unwrap();
        assert_eq!(s.test_indices, again.test_indices);

        let iris = stratified_split(&iris(), 0.2, 0).unwrap();
        assert_eq!(iris.test.n_samples(), 30);
        assert_eq!(iris.test.class_sizes(), vec![10, 10, 10]);
        assert_eq!(iris.train.n_samples(), 120);
    }

    #[test]
    fn split_rejects_singleton_class() {
        let ds = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 0, 1],
            vec!["x".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(matches!(stratified_split(&ds, 0.2, 1), Err(Error::InvalidSplit(_))));
    }

    #[test]
    fn dataset_invariants_enforced() {
        let names = vec!["x".to_string(), "x".to_string()];
        assert!(Dataset::new(vec![vec![0.0, 1.0]; 2], vec![0, 1], names, vec!["a".into(), "b".into()]).is_err());
        assert!(Dataset::new(
            vec![vec![f64::NAN], vec![1.0]],
            vec![0, 1],
            vec!["x".into()],
            vec!["a".into(), "b".into()]
        )
        .is_err());
        assert!(Dataset::new(
            vec![vec![0.0], vec![1.0]],
            vec![0, 0],
            vec!["x".into()],
            vec!["a".into(), "b".into()]
        )
        .is_err());
    }

    #[test]
    fn planted_layout() {
        let ds = make_planted(&SyntheticSpec {
            classes: 3,
            samples_per_class: 20,
            informative: 2,
            duplicated: 1,
            noise: 2,
            separation: 3.0,
            seed: 5,
        })
        .unwrap();
        assert_eq!(ds.n_features(), 5);
        assert_eq!(ds.n_samples(), 60);
        let src = ds.column(0);
        let dup = ds.column(2);
        let ratio = dup[0] / src[0];
        for (a, b) in src.iter().zip(&dup) {
            assert!((b - a * ratio).abs() < 1e-9);
        }
    }

    fn column_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 4..40)
    }

    fn single_column(values: Vec<f64>) -> Dataset {
        let n = values.len();
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::new(
            values.into_iter().map(|v| vec![v]).collect(),
            labels,
            vec!["x".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(values in column_strategy()) {
            let once = min_max_normalize(&single_column(values));
            let twice = min_max_normalize(&once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn normalize_ignores_positive_affine_maps(
            values in prop::collection::vec(-10f64..10.0, 4..40),
            scale in 0.5f64..4.0,
            shift in -10f64..10.0,
        ) {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assume!(hi - lo >= 1.0);
            let mapped: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
            let a = min_max_normalize(&single_column(values)).column(0);
            let b = min_max_normalize(&single_column(mapped)).column(0);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
            }
        }

        #[test]
        fn split_partitions_indices(n_per in 2usize..30, frac in 0.05f64..0.95, seed: u64) {
            let ds = two_class(n_per);
            let s = stratified_split(&ds, frac, seed).unwrap();
            let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.n_samples()).collect::<Vec<_>>());
            prop_assert_eq!(s.train.n_samples() + s.test.n_samples(), ds.n_samples());
        }
    }
}
