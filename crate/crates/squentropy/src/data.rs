//! Datasets: synthetic spirals, CSV loading, standardization, splitting.
//!
//! A dataset is a dense feature matrix plus one integer label per row.
//! Labels are compact class indices `0..class_count`; when a CSV uses other
//! label values the mapping back to the original names is kept so exports
//! stay faithful.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Feature matrix with aligned labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_count: usize,
    /// Original label spellings by class index, when the data came from a
    /// file whose labels were not already `0..C`.
    class_names: Option<Vec<String>>,
}

impl Dataset {
    /// Wraps raw parts, checking that labels are in range and the shapes
    /// agree. `class_count` must be at least 2.
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if class_count < 2 {
            return Err(Error::Data(format!(
                "need at least two classes, got {class_count}"
            )));
        }
        if let Some(bad) = labels.iter().find(|l| **l >= class_count) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            class_count,
            class_names: None,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.class_count {
            return Err(Error::Data(format!(
                "{} class names for {} classes",
                names.len(),
                self.class_count
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Number of samples in each class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.class_count];
        for l in &self.labels {
            sizes[*l] += 1;
        }
        sizes
    }

    /// Builds a new dataset from a subset of row indices, in the given
    /// order. Class count and names carry over.
    fn select(&self, indices: &[usize]) -> Dataset {
        let rows: Vec<Vec<f64>> = indices.iter().map(|i| self.sample(*i).to_vec()).collect();
        Dataset {
            features: Matrix::from_rows(&rows),
            labels: indices.iter().map(|i| self.label(*i)).collect(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        }
    }

    /// Writes the dataset as CSV, features first and the label last. No
    /// header row. Floats use the shortest representation that parses back
    /// to the same value, so save and load round-trip exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for v in self.sample(i) {
                out.push_str(&format!("{v}"));
                out.push(',');
            }
            match &self.class_names {
                Some(names) => out.push_str(&names[self.label(i)]),
                None => out.push_str(&self.label(i).to_string()),
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// One-hot encoding of `label` among `classes`. Panics when out of range.
pub fn one_hot(label: usize, classes: usize) -> Vec<f64> {
    assert!(
        label < classes,
        "label {label} out of range for {classes} classes"
    );
    let mut v = vec![0.0; classes];
    v[label] = 1.0;
    v
}

/// Parameters of the two-class spiral generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralConfig {
    pub n_train: usize,
    pub n_test: usize,
    /// Gaussian noise added to each coordinate.
    pub noise_sigma: f64,
    /// Full turns each arm makes around the origin.
    pub rotations: f64,
    pub seed: u64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        SpiralConfig {
            n_train: 1000,
            n_test: 500,
            noise_sigma: 0.05,
            rotations: 2.0,
            seed: 0,
        }
    }
}

/// Draws one spiral dataset of `n` points (`n/2` per class).
///
/// Per point pair: one angle `theta` uniform in `[0, rotations * 2 pi)`,
/// radius `theta / (rotations * 2 pi)`, class 0 at
/// `r * (cos theta, sin theta)`, class 1 at the exact negation of that
/// point (a half-turn phase shift), then independent Gaussian noise on
/// every coordinate. Draw order per pair: angle, then the four noise
/// coordinates class 0 first. With `noise_sigma = 0` the two classes are
/// exact reflections of each other through the origin.
fn spiral_points(n: usize, sigma: f64, rotations: f64, rng: &mut Rng) -> Dataset {
    let span = rotations * std::f64::consts::TAU;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let theta = rng.uniform(0.0, span);
        let r = theta / span;
        let x = r * theta.cos();
        let y = r * theta.sin();
        rows.push(vec![x + rng.gaussian(0.0, sigma), y + rng.gaussian(0.0, sigma)]);
        labels.push(0);
        rows.push(vec![-x + rng.gaussian(0.0, sigma), -y + rng.gaussian(0.0, sigma)]);
        labels.push(1);
    }
    Dataset {
        features: Matrix::from_rows(&rows),
        labels,
        class_count: 2,
        class_names: None,
    }
}

/// Generates balanced train and test spirals from independent substreams
/// of `config.seed` (train stream 0, test stream 1), so changing the test
/// size never perturbs the training set.
///
/// Counts must be even and at least 2; noise must be non-negative and
/// rotations positive.
pub fn generate_spiral(config: &SpiralConfig) -> Result<(Dataset, Dataset)> {
    for (what, n) in [("n_train", config.n_train), ("n_test", config.n_test)] {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "{what} must be even and at least 2 for balanced classes, got {n}"
            )));
        }
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be finite and non-negative, got {}",
            config.noise_sigma
        )));
    }
    if !(config.rotations > 0.0 && config.rotations.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rotations must be positive and finite, got {}",
            config.rotations
        )));
    }
    let mut train_rng = Rng::substream(config.seed, 0);
    let mut test_rng = Rng::substream(config.seed, 1);
    let train = spiral_points(config.n_train, config.noise_sigma, config.rotations, &mut train_rng);
    let test = spiral_points(config.n_test, config.noise_sigma, config.rotations, &mut test_rng);
    Ok((train, test))
}

/// CSV parsing options.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Skip the first line.
    pub has_header: bool,
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
    pub delimiter: char,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: false,
            label_column: None,
            delimiter: ',',
        }
    }
}

/// Loads a dataset from a delimiter-separated file.
///
/// Every non-label cell must parse as a finite `f64`. Labels may be
/// anything: when every label parses as an integer the distinct values are
/// sorted numerically, otherwise the distinct strings are sorted
/// lexicographically, and either order defines class indices `0..C`.
/// Errors name the offending 1-based line. At least one data row and two
/// distinct labels are required.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    parse_csv(&text, &path_str, options)
}

fn parse_csv(text: &str, path: &str, options: &CsvOptions) -> Result<Dataset> {
    let raw = parse_rows(text, path, options)?;
    let vocabulary = label_vocabulary(&[&raw.raw_labels]);
    if vocabulary.len() < 2 {
        return Err(Error::Data(format!(
            "{path}: all rows share the label \"{}\"; need at least two classes",
            vocabulary[0]
        )));
    }
    index_labels(raw, &vocabulary)
}

/// Loads a train/test pair under one shared label vocabulary (the union
/// of both files' labels), so a class absent from one file cannot shift
/// the label-to-index mapping of the other. Both files must agree on the
/// feature count.
pub fn load_csv_pair(
    train_path: &Path,
    test_path: &Path,
    options: &CsvOptions,
) -> Result<(Dataset, Dataset)> {
    let train_text = std::fs::read_to_string(train_path)?;
    let test_text = std::fs::read_to_string(test_path)?;
    let train_raw = parse_rows(&train_text, &train_path.display().to_string(), options)?;
    let test_raw = parse_rows(&test_text, &test_path.display().to_string(), options)?;
    if train_raw.rows[0].len() != test_raw.rows[0].len() {
        return Err(Error::Data(format!(
            "{} has {} feature column(s) but {} has {}",
            train_path.display(),
            train_raw.rows[0].len(),
            test_path.display(),
            test_raw.rows[0].len()
        )));
    }
    let vocabulary = label_vocabulary(&[&train_raw.raw_labels, &test_raw.raw_labels]);
    if vocabulary.len() < 2 {
        return Err(Error::Data(format!(
            "{} and {}: all rows share the label \"{}\"; need at least two classes",
            train_path.display(),
            test_path.display(),
            vocabulary[0]
        )));
    }
    let train = index_labels(train_raw, &vocabulary)?;
    let test = index_labels(test_raw, &vocabulary)?;
    Ok((train, test))
}

/// Cells of one parsed file before labels are turned into class indices.
struct RawCsv {
    rows: Vec<Vec<f64>>,
    raw_labels: Vec<String>,
}

fn parse_rows(text: &str, path: &str, options: &CsvOptions) -> Result<RawCsv> {
    let err = |line: usize, message: String| Error::Csv {
        path: path.to_string(),
        line,
        message,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_col = 0usize;

    let skip = if options.has_header { 1 } else { 0 };
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx < skip {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(options.delimiter).map(str::trim).collect();
        match width {
            None => {
                let w = cells.len();
                if w < 2 {
                    return Err(err(
                        line_no,
                        format!("need at least one feature and a label, got {w} column(s)"),
                    ));
                }
                label_col = match options.label_column {
                    Some(c) if c >= w => {
                        return Err(err(
                            line_no,
                            format!("label column {c} out of range for {w} columns"),
                        ))
                    }
                    Some(c) => c,
                    None => w - 1,
                };
                width = Some(w);
            }
            Some(w) if cells.len() != w => {
                return Err(err(
                    line_no,
                    format!("row has {} columns, expected {w}", cells.len()),
                ));
            }
            Some(_) => {}
        }
        let mut features = Vec::with_capacity(cells.len() - 1);
        for (c, cell) in cells.iter().enumerate() {
            if c == label_col {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                err(line_no, format!("column {c}: \"{cell}\" is not a number"))
            })?;
            if !v.is_finite() {
                return Err(err(line_no, format!("column {c}: non-finite value {v}")));
            }
            features.push(v);
        }
        rows.push(features);
    }

    if rows.is_empty() {
        return Err(err(1, "no data rows".into()));
    }
    Ok(RawCsv { rows, raw_labels })
}

/// Class index order over one or more raw label sets: numeric when every
/// label is an integer, lexicographic otherwise.
fn label_vocabulary(raw_label_sets: &[&Vec<String>]) -> Vec<String> {
    let mut distinct: Vec<String> = raw_label_sets
        .iter()
        .flat_map(|s| s.iter().cloned())
        .collect();
    distinct.sort();
    distinct.dedup();
    let all_integers = distinct.iter().all(|s| s.parse::<i64>().is_ok());
    if all_integers {
        distinct.sort_by_key(|s| s.parse::<i64>().expect("checked integer"));
    }
    distinct
}

fn index_labels(raw: RawCsv, vocabulary: &[String]) -> Result<Dataset> {
    let labels: Vec<usize> = raw
        .raw_labels
        .iter()
        .map(|l| {
            vocabulary
                .iter()
                .position(|d| d == l)
                .expect("label present in vocabulary")
        })
        .collect();

    // Keep class names only when the labels are not already the compact
    // integers 0..C in order.
    let already_compact = vocabulary
        .iter()
        .enumerate()
        .all(|(i, s)| s.parse::<i64>() == Ok(i as i64));
    let dataset = Dataset::new(Matrix::from_rows(&raw.rows), labels, vocabulary.len())?;
    if already_compact {
        Ok(dataset)
    } else {
        dataset.with_class_names(vocabulary.to_vec())
    }
}

/// Per-feature statistics from a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    /// Population standard deviation (divides by n).
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Measures `train` column-wise.
    pub fn measure(train: &Dataset) -> FeatureStats {
        let n = train.n() as f64;
        let d = train.d();
        let mut mean = vec![0.0; d];
        for i in 0..train.n() {
            for (m, v) in mean.iter_mut().zip(train.sample(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for i in 0..train.n() {
            for (j, v) in train.sample(i).iter().enumerate() {
                let c = v - mean[j];
                var[j] += c * c;
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt()).collect();
        FeatureStats { mean, std }
    }

    /// Applies `(x - mean) / std` column-wise. Near-constant columns
    /// (std below 1e-12) map to exactly zero instead of blowing up.
    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.d() != self.mean.len() {
            return Err(Error::Data(format!(
                "dataset has {} features, statistics have {}",
                dataset.d(),
                self.mean.len()
            )));
        }
        let mut rows = Vec::with_capacity(dataset.n());
        for i in 0..dataset.n() {
            let row = dataset
                .sample(i)
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if self.std[j] < 1e-12 {
                        0.0
                    } else {
                        (v - self.mean[j]) / self.std[j]
                    }
                })
                .collect();
            rows.push(row);
        }
        Ok(Dataset {
            features: Matrix::from_rows(&rows),
            labels: dataset.labels.clone(),
            class_count: dataset.class_count,
            class_names: dataset.class_names.clone(),
        })
    }
}

/// Standardizes both sets with statistics measured on `train` only, so no
/// information leaks from the test set.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, FeatureStats)> {
    let stats = FeatureStats::measure(train);
    let train_std = stats.apply(train)?;
    let test_std = stats.apply(test)?;
    Ok((train_std, test_std, stats))
}

/// Splits a dataset into train and test parts.
///
/// When every class has at least two samples the split is stratified:
/// each class contributes `round(test_fraction * class size)` test samples,
/// shuffled within the class. Otherwise a plain shuffled split is used.
/// Both parts must end up non-empty. Deterministic in `seed`.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must be strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let mut rng = Rng::new(seed);
    let stratified = dataset.class_sizes().iter().all(|s| *s >= 2);

    let mut test_idx: Vec<usize> = Vec::new();
    let mut train_idx: Vec<usize> = Vec::new();
    if stratified {
        for class in 0..dataset.class_count() {
            let mut members: Vec<usize> = (0..dataset.n())
                .filter(|i| dataset.label(*i) == class)
                .collect();
            rng.shuffle(&mut members);
            let k = (test_fraction * members.len() as f64).round() as usize;
            test_idx.extend(&members[..k]);
            train_idx.extend(&members[k..]);
        }
    } else {
        let mut all: Vec<usize> = (0..dataset.n()).collect();
        rng.shuffle(&mut all);
        let k = (test_fraction * all.len() as f64).round() as usize;
        test_idx.extend(&all[..k]);
        train_idx.extend(&all[k..]);
    }

    if test_idx.is_empty() || train_idx.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} leaves an empty part for {} samples",
            dataset.n()
        )));
    }
    Ok((dataset.select(&train_idx), dataset.select(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(features: &[Vec<f64>], labels: &[usize], classes: usize) -> Dataset {
        Dataset::new(Matrix::from_rows(features), labels.to_vec(), classes).unwrap()
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(0, 2), vec![1.0, 0.0]);
        assert_eq!(one_hot(2, 3), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn one_hot_argmax_round_trip() {
        for classes in 2..=10 {
            for label in 0..classes {
                let v = one_hot(label, classes);
                let argmax = v
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap()
                    .0;
                assert_eq!(argmax, label);
            }
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn one_hot_rejects_bad_label() {
        one_hot(3, 3);
    }

    #[test]
    fn noiseless_spiral_classes_mirror_each_other() {
        let config = SpiralConfig {
            n_train: 4,
            n_test: 2,
            noise_sigma: 0.0,
            ..SpiralConfig::default()
        };
        let (train, _) = generate_spiral(&config).unwrap();
        assert_eq!(train.n(), 4);
        // Points come in (class 0, class 1) pairs; the pair members are
        // exact negations when the noise is off.
        for pair in 0..2 {
            let a = train.sample(2 * pair);
            let b = train.sample(2 * pair + 1);
            assert_eq!(train.label(2 * pair), 0);
            assert_eq!(train.label(2 * pair + 1), 1);
            assert_eq!(a[0], -b[0]);
            assert_eq!(a[1], -b[1]);
        }
    }

    #[test]
    fn spiral_radii_stay_bounded() {
        let config = SpiralConfig::default();
        let (train, test) = generate_spiral(&config).unwrap();
        let limit = 1.0 + 5.0 * config.noise_sigma;
        for ds in [&train, &test] {
            for i in 0..ds.n() {
                let p = ds.sample(i);
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!(r <= limit, "point {p:?} has radius {r} > {limit}");
            }
        }
    }

    #[test]
    fn spiral_is_deterministic_and_balanced() {
        let config = SpiralConfig {
            seed: 9,
            ..SpiralConfig::default()
        };
        let (a_train, a_test) = generate_spiral(&config).unwrap();
        let (b_train, b_test) = generate_spiral(&config).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        assert_eq!(a_train.class_sizes(), vec![500, 500]);
        assert_eq!(a_test.class_sizes(), vec![250, 250]);
    }

    #[test]
    fn spiral_rejects_bad_counts_and_noise() {
        let odd = SpiralConfig {
            n_train: 999,
            ..SpiralConfig::default()
        };
        assert!(generate_spiral(&odd).is_err());
        let negative = SpiralConfig {
            noise_sigma: -0.1,
            ..SpiralConfig::default()
        };
        assert!(generate_spiral(&negative).is_err());
        let flat = SpiralConfig {
            rotations: 0.0,
            ..SpiralConfig::default()
        };
        assert!(generate_spiral(&flat).is_err());
    }

    #[test]
    fn spiral_is_not_linearly_separable() {
        // The best single linear cut through the origin-centered spiral
        // should do barely better than chance; anything under 70% is a
        // comfortable witness that the classes interleave.
        let (train, _) = generate_spiral(&SpiralConfig::default()).unwrap();
        let mut best = 0.0f64;
        for step in 0..180 {
            let angle = step as f64 * std::f64::consts::PI / 180.0;
            let (nx, ny) = (angle.cos(), angle.sin());
            let correct = (0..train.n())
                .filter(|&i| {
                    let p = train.sample(i);
                    let side = (p[0] * nx + p[1] * ny) >= 0.0;
                    (train.label(i) == 0) == side
                })
                .count();
            let acc = correct as f64 / train.n() as f64;
            best = best.max(acc.max(1.0 - acc));
        }
        assert!(best < 0.7, "a linear probe reached {best}");
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_basic_parse() {
        let f = write_temp("1.5,2.0,0\n-0.5,1.0,1\n");
        let ds = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.sample(0), &[1.5, 2.0]);
        assert_eq!(ds.labels(), &[0, 1]);
        assert!(ds.class_names().is_none(), "compact integer labels keep no names");
    }

    #[test]
    fn csv_header_is_skipped_when_asked() {
        let f = write_temp("x,y,label\n1.0,2.0,0\n3.0,4.0,1\n");
        let options = CsvOptions {
            has_header: true,
            ..CsvOptions::default()
        };
        let ds = load_csv(f.path(), &options).unwrap();
        assert_eq!(ds.n(), 2);
    }

    #[test]
    fn csv_string_labels_sort_lexicographically() {
        let f = write_temp("1,cat\n2,ant\n3,bee\n4,cat\n");
        let ds = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.class_names().unwrap(), &["ant", "bee", "cat"]);
        assert_eq!(ds.labels(), &[2, 0, 1, 2]);
    }

    #[test]
    fn csv_integer_labels_sort_numerically() {
        // Lexicographic order would put "10" before "2".
        let f = write_temp("1,10\n2,2\n3,10\n4,2\n");
        let ds = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.class_names().unwrap(), &["2", "10"]);
        assert_eq!(ds.labels(), &[1, 0, 1, 0]);
    }

    #[test]
    fn csv_ragged_row_names_its_line() {
        let f = write_temp("1,2,0\n3,4\n");
        let e = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        assert!(e.to_string().contains(":2:"), "got {e}");
    }

    #[test]
    fn csv_non_numeric_feature_names_its_line() {
        let f = write_temp("1,2,0\noops,4,1\n");
        let e = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains(":2:") && msg.contains("oops"), "got {msg}");
    }

    #[test]
    fn csv_empty_file_errors() {
        let f = write_temp("");
        assert!(load_csv(f.path(), &CsvOptions::default()).is_err());
    }

    #[test]
    fn csv_single_class_errors() {
        let f = write_temp("1,0\n2,0\n3,0\n");
        let e = load_csv(f.path(), &CsvOptions::default()).unwrap_err();
        assert!(e.to_string().contains("two classes"), "got {e}");
    }

    #[test]
    fn csv_label_column_can_be_first() {
        let f = write_temp("0,1.5,2.5\n1,3.5,4.5\n");
        let options = CsvOptions {
            label_column: Some(0),
            ..CsvOptions::default()
        };
        let ds = load_csv(f.path(), &options).unwrap();
        assert_eq!(ds.sample(0), &[1.5, 2.5]);
        assert_eq!(ds.labels(), &[0, 1]);
    }

    #[test]
    fn csv_save_load_round_trips() {
        let (train, _) = generate_spiral(&SpiralConfig {
            n_train: 20,
            n_test: 2,
            ..SpiralConfig::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spiral.csv");
        train.save_csv(&path).unwrap();
        let loaded = load_csv(&path, &CsvOptions::default()).unwrap();
        assert_eq!(train, loaded, "shortest-round-trip floats reload exactly");
        loaded.save_csv(&path).unwrap();
        let again = load_csv(&path, &CsvOptions::default()).unwrap();
        assert_eq!(loaded, again);
    }

    #[test]
    fn standardize_two_point_example() {
        let train = toy(&[vec![0.0], vec![2.0]], &[0, 1], 2);
        let test = toy(&[vec![4.0]], &[0], 2);
        let (train_s, test_s, stats) = standardize(&train, &test).unwrap();
        assert_eq!(stats.mean, vec![1.0]);
        assert_eq!(stats.std, vec![1.0]);
        assert_eq!(train_s.sample(0), &[-1.0]);
        assert_eq!(train_s.sample(1), &[1.0]);
        assert_eq!(test_s.sample(0), &[3.0], "test uses train statistics");
    }

    #[test]
    fn standardize_zeroes_constant_features() {
        let train = toy(&[vec![5.0, 1.0], vec![5.0, 3.0]], &[0, 1], 2);
        let (train_s, _, _) = standardize(&train, &train).unwrap();
        assert_eq!(train_s.sample(0)[0], 0.0);
        assert_eq!(train_s.sample(1)[0], 0.0);
        assert_eq!(train_s.sample(0)[1], -1.0);
    }

    #[test]
    fn standardized_train_has_zero_mean_unit_std() {
        let (train, test) = generate_spiral(&SpiralConfig {
            n_train: 100,
            n_test: 10,
            ..SpiralConfig::default()
        })
        .unwrap();
        let (train_s, _, _) = standardize(&train, &test).unwrap();
        let stats = FeatureStats::measure(&train_s);
        for m in &stats.mean {
            assert!(m.abs() < 1e-12, "mean {m}");
        }
        for s in &stats.std {
            assert!((s - 1.0).abs() < 1e-12, "std {s}");
        }
    }

    #[test]
    fn split_is_a_partition_with_expected_sizes() {
        let ds = toy(
            &(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>(),
            &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
            2,
        );
        let (train, test) = split(&ds, 0.2, 3).unwrap();
        assert_eq!(train.n(), 8);
        assert_eq!(test.n(), 2);
        let mut seen: Vec<f64> = Vec::new();
        for ds in [&train, &test] {
            for i in 0..ds.n() {
                seen.push(ds.sample(i)[0]);
            }
        }
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(seen, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_stratified_when_possible() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let ds = toy(
            &(0..30).map(|i| vec![i as f64]).collect::<Vec<_>>(),
            &labels,
            3,
        );
        let (train, test) = split(&ds, 0.2, 11).unwrap();
        assert_eq!(test.class_sizes(), vec![2, 2, 2]);
        assert_eq!(train.class_sizes(), vec![8, 8, 8]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(
            &(0..20).map(|i| vec![i as f64, -(i as f64)]).collect::<Vec<_>>(),
            &(0..20).map(|i| i % 2).collect::<Vec<_>>(),
            2,
        );
        let a = split(&ds, 0.25, 7).unwrap();
        let b = split(&ds, 0.25, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_empty_parts() {
        let ds = toy(&[vec![1.0], vec![2.0]], &[0, 1], 2);
        assert!(split(&ds, 0.05, 1).is_err(), "rounds to an empty test set");
        assert!(split(&ds, 1.5, 1).is_err());
    }

    fn write_csv(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn pair_loading_shares_the_label_vocabulary() {
        let dir = tempfile::tempdir().unwrap();
        // The test file has no class-1 row; loaded alone it would call
        // label 2 "class 1".
        let train = write_csv(dir.path(), "train.csv", "0,0,0\n1,1,1\n2,2,2\n");
        let test = write_csv(dir.path(), "test.csv", "0.5,0.5,0\n2.5,2.5,2\n");
        let (train_set, test_set) = load_csv_pair(&train, &test, &CsvOptions::default()).unwrap();
        assert_eq!(train_set.class_count(), 3);
        assert_eq!(test_set.class_count(), 3);
        assert_eq!(test_set.labels(), &[0, 2]);
        assert_eq!(test_set.class_names(), None, "labels are already compact");
    }

    #[test]
    fn pair_loading_merges_string_labels() {
        let dir = tempfile::tempdir().unwrap();
        let train = write_csv(dir.path(), "train.csv", "1,cat\n2,dog\n");
        let test = write_csv(dir.path(), "test.csv", "3,dog\n4,fish\n");
        let (train_set, test_set) = load_csv_pair(&train, &test, &CsvOptions::default()).unwrap();
        let names: Vec<String> = ["cat", "dog", "fish"].map(String::from).into();
        assert_eq!(train_set.class_names(), Some(&names[..]));
        assert_eq!(train_set.labels(), &[0, 1]);
        assert_eq!(test_set.labels(), &[1, 2]);
    }

    #[test]
    fn pair_loading_rejects_feature_width_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let train = write_csv(dir.path(), "train.csv", "0,0,0\n1,1,1\n");
        let test = write_csv(dir.path(), "test.csv", "0,0\n1,1\n");
        let e = load_csv_pair(&train, &test, &CsvOptions::default()).unwrap_err();
        assert!(e.to_string().contains("feature column"), "got {e}");
    }
}
