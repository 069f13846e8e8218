//! Tabular datasets: loading, encoding, scaling, splitting and a seeded
//! synthetic generator for fairness experiments.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Declares which raw value of a protected column is privileged.
///
/// After loading, the column holds 1.0 for the privileged group and 0.0 for
/// the unprivileged group. Datasets constructed in memory use the canonical
/// `"1"`/`"0"` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedSpec {
    pub name: String,
    pub privileged_value: String,
    pub unprivileged_value: String,
}

impl ProtectedSpec {
    pub fn new(name: &str, privileged: &str, unprivileged: &str) -> Result<Self> {
        if privileged == unprivileged {
            return Err(Error::Config(format!(
                "protected attribute {name}: privileged and unprivileged values are both {privileged:?}"
            )));
        }
        Ok(ProtectedSpec {
            name: name.to_string(),
            privileged_value: privileged.to_string(),
            unprivileged_value: unprivileged.to_string(),
        })
    }

    /// Canonical spec for a column that is already 0/1 encoded.
    pub fn canonical(name: &str) -> Self {
        ProtectedSpec {
            name: name.to_string(),
            privileged_value: "1".to_string(),
            unprivileged_value: "0".to_string(),
        }
    }
}

/// How to turn a raw categorical column into numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoding {
    /// Map each raw string to a declared numeric value.
    Ordinal(BTreeMap<String, f64>),
    /// Expand the column into one 0/1 indicator column per observed value,
    /// named `column=value`, ordered by value.
    OneHot,
}

/// Everything `load_csv` needs besides the file path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadSpec {
    pub target_column: String,
    pub favorable_raw: String,
    pub protected: Vec<ProtectedSpec>,
    pub encodings: BTreeMap<String, Encoding>,
}

/// Immutable tabular data: a column-major feature matrix, canonical binary
/// target (favorable label = 1) and canonicalized binary protected columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Vec<u8>,
    target_name: String,
    protected: Vec<ProtectedSpec>,
    row_count: usize,
}

impl Dataset {
    /// Build a dataset from parts, validating the structural invariants.
    pub fn new(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Vec<u8>,
        target_name: String,
        protected: Vec<ProtectedSpec>,
    ) -> Result<Self> {
        if feature_names.len() != columns.len() {
            return Err(Error::Usage(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        let row_count = target.len();
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != row_count {
                return Err(Error::Data(format!(
                    "column {name} has {} values, expected {row_count}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "column {name} contains non-finite values"
                )));
            }
            // Line-oriented serializations reserve these characters.
            if name.contains([',', ' ', ';', '\n']) {
                return Err(Error::Data(format!(
                    "feature name {name:?} contains a reserved character (',', ';', ' ' or newline)"
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &feature_names {
            if !seen.insert(name.clone()) {
                return Err(Error::Data(format!("duplicate feature name {name}")));
            }
        }
        if target.iter().any(|&t| t > 1) {
            return Err(Error::Data(
                "target contains values outside {0,1}".to_string(),
            ));
        }
        for spec in &protected {
            let idx = feature_names
                .iter()
                .position(|n| n == &spec.name)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "protected attribute {} is not a feature",
                        spec.name
                    ))
                })?;
            if columns[idx].iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Data(format!(
                    "protected column {} is not binary after mapping",
                    spec.name
                )));
            }
        }
        Ok(Dataset {
            feature_names,
            columns,
            target,
            target_name,
            protected,
            row_count,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        let idx = self.feature_index(name)?;
        Ok(&self.columns[idx])
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Config(format!("no column named {name}")))
    }

    /// Column indices for a model schema, erroring on any missing feature.
    pub fn column_indices_for(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::Usage(format!("row is missing feature {n}")))
            })
            .collect()
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn protected(&self) -> &[ProtectedSpec] {
        &self.protected
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    /// Copy row `i` in feature order.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// New dataset with the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| indices.iter().map(|&i| c[i]).collect())
            .collect();
        let target = indices.iter().map(|&i| self.target[i]).collect();
        Dataset {
            feature_names: self.feature_names.clone(),
            columns,
            target,
            target_name: self.target_name.clone(),
            protected: self.protected.clone(),
            row_count: indices.len(),
        }
    }

    /// Write as RFC-4180 CSV: feature columns then the target column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.target_name);
        w.write_record(&header).map_err(csv_err)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.row_count {
            record.clear();
            for col in &self.columns {
                record.push(format!("{}", col[i]));
            }
            record.push(format!("{}", self.target[i]));
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

/// 70/10/20 split plan. `(seed, repeat index)` fully determines the
/// partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub repeats: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            train_fraction: 0.70,
            valid_fraction: 0.10,
            test_fraction: 0.20,
            seed: 42,
            repeats: 20,
        }
    }
}

impl SplitPlan {
    pub fn with_seed(seed: u64) -> Self {
        SplitPlan {
            seed,
            ..Default::default()
        }
    }
}

/// Load a CSV file, apply the declared encodings, canonicalize the target
/// and protected columns.
///
/// The file must have a header row. Cells of columns without a declared
/// encoding must parse as numbers. Protected columns are matched first
/// against the spec's raw values, then through the column's ordinal map;
/// anything else is a data error.
pub fn load_csv(path: &Path, spec: &LoadSpec) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut raw_columns: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", row_idx + 2)))?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "row {}: {} fields, expected {}",
                row_idx + 2,
                record.len(),
                header.len()
            )));
        }
        for (col, cell) in raw_columns.iter_mut().zip(record.iter()) {
            col.push(cell.trim().to_string());
        }
    }

    let target_idx = header
        .iter()
        .position(|h| h == &spec.target_column)
        .ok_or_else(|| Error::Config(format!("missing target column {}", spec.target_column)))?;
    for p in &spec.protected {
        if !header.iter().any(|h| h == &p.name) {
            return Err(Error::Config(format!(
                "missing protected column {}",
                p.name
            )));
        }
    }

    // Target: favorable value maps to 1, everything else to 0.
    let target_raw = &raw_columns[target_idx];
    if !target_raw.iter().any(|v| v == &spec.favorable_raw) {
        return Err(Error::Config(format!(
            "favorable value {:?} never occurs in target column {}",
            spec.favorable_raw, spec.target_column
        )));
    }
    let target: Vec<u8> = target_raw
        .iter()
        .map(|v| u8::from(v == &spec.favorable_raw))
        .collect();

    let mut feature_names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (idx, name) in header.iter().enumerate() {
        if idx == target_idx {
            continue;
        }
        let raw = &raw_columns[idx];
        if let Some(p) = spec.protected.iter().find(|p| &p.name == name) {
            columns.push(canonicalize_protected(
                name,
                raw,
                p,
                spec.encodings.get(name),
            )?);
            feature_names.push(name.clone());
            continue;
        }
        match spec.encodings.get(name) {
            Some(Encoding::Ordinal(map)) => {
                let col = raw
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        ordinal_value(map, v).ok_or_else(|| {
                            Error::Data(format!(
                                "row {}, column {name}: value {v:?} not covered by the encoding map",
                                i + 2
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                columns.push(col);
                feature_names.push(name.clone());
            }
            Some(Encoding::OneHot) => {
                let mut values: Vec<&String> = raw.iter().collect();
                values.sort();
                values.dedup();
                for value in values {
                    let col = raw
                        .iter()
                        .map(|v| f64::from(u8::from(v == value)))
                        .collect();
                    columns.push(col);
                    feature_names.push(format!("{name}={value}"));
                }
            }
            None => {
                let col = raw
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.parse::<f64>().map_err(|_| {
                            Error::Data(format!(
                                "row {}, column {name}: cannot parse {v:?} as a number",
                                i + 2
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                columns.push(col);
                feature_names.push(name.clone());
            }
        }
    }

    let protected = spec
        .protected
        .iter()
        .map(|p| ProtectedSpec::canonical(&p.name))
        .collect();
    Dataset::new(
        feature_names,
        columns,
        target,
        spec.target_column.clone(),
        protected,
    )
}

fn ordinal_value(map: &BTreeMap<String, f64>, raw: &str) -> Option<f64> {
    map.get(raw).copied().or_else(|| raw.parse::<f64>().ok())
}

fn canonicalize_protected(
    name: &str,
    raw: &[String],
    spec: &ProtectedSpec,
    encoding: Option<&Encoding>,
) -> Result<Vec<f64>> {
    if matches!(encoding, Some(Encoding::OneHot)) {
        return Err(Error::Config(format!(
            "protected column {name} cannot be one-hot encoded"
        )));
    }
    let map = match encoding {
        Some(Encoding::Ordinal(m)) => Some(m),
        _ => None,
    };
    let (priv_num, unpriv_num) = match map {
        Some(m) => (
            ordinal_value(m, &spec.privileged_value),
            ordinal_value(m, &spec.unprivileged_value),
        ),
        None => (
            spec.privileged_value.parse().ok(),
            spec.unprivileged_value.parse().ok(),
        ),
    };
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            if v == &spec.privileged_value {
                return Ok(1.0);
            }
            if v == &spec.unprivileged_value {
                return Ok(0.0);
            }
            let encoded = map
                .and_then(|m| ordinal_value(m, v))
                .or_else(|| v.parse().ok());
            match (encoded, priv_num, unpriv_num) {
                (Some(e), Some(p), _) if e == p => Ok(1.0),
                (Some(e), _, Some(u)) if e == u => Ok(0.0),
                _ => Err(Error::Data(format!(
                    "row {}, protected column {name}: value {v:?} maps to neither group; \
                     column is not binary after mapping",
                    i + 2
                ))),
            }
        })
        .collect()
}

/// Affinely rescale every non-constant feature column to `[0,1]`.
///
/// Constant columns map to all zeros. Target and canonical protected
/// columns are already in {0,1} and come out unchanged.
pub fn min_max_scale(d: &Dataset) -> Dataset {
    let columns = d
        .columns
        .iter()
        .map(|col| {
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max > min {
                col.iter().map(|v| (v - min) / (max - min)).collect()
            } else {
                vec![0.0; col.len()]
            }
        })
        .collect();
    Dataset {
        columns,
        ..d.clone()
    }
}

/// Mix a split seed with a repeat index into one 64-bit stream seed
/// (splitmix64 finalizer; stable across platforms).
fn mix_seed(seed: u64, repeat_index: u64) -> u64 {
    let mut z = seed ^ repeat_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fisher-Yates over a ChaCha8 stream. The modulo bias is far below any
/// statistical resolution at these sizes and keeps the shuffle independent
/// of rand's uniform-sampling internals.
fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    idx
}

/// Disjoint train/valid/test row partition: sizes are `floor(0.7 n)`,
/// `floor(0.1 n)` and the remainder, over indices shuffled by
/// `(plan.seed, repeat_index)`.
pub fn split(
    d: &Dataset,
    plan: &SplitPlan,
    repeat_index: usize,
) -> Result<(Dataset, Dataset, Dataset)> {
    let n = d.row_count;
    if n < 10 {
        return Err(Error::Data(format!(
            "cannot split {n} rows; need at least 10"
        )));
    }
    let frac_sum = plan.train_fraction + plan.valid_fraction + plan.test_fraction;
    if (frac_sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions sum to {frac_sum}, expected 1.0"
        )));
    }
    let idx = shuffled_indices(n, mix_seed(plan.seed, repeat_index as u64));
    let n_train = (plan.train_fraction * n as f64).floor() as usize;
    let n_valid = (plan.valid_fraction * n as f64).floor() as usize;
    let train = d.subset(&idx[..n_train]);
    let valid = d.subset(&idx[n_train..n_train + n_valid]);
    let test = d.subset(&idx[n_train + n_valid..]);
    Ok((train, valid, test))
}

/// Standard normal via Box-Muller on the raw ChaCha stream.
fn next_gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // 53-bit mantissa uniform in (0,1]; never zero, so ln is finite.
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Seeded synthetic dataset with one binary protected attribute `group`
/// and four numeric features.
///
/// Generator, in order per row:
///   a  ~ Bernoulli(0.5)                        (protected attribute)
///   y  ~ Bernoulli(0.5 + bias_strength * (a - 0.5))
///   x1 = 1.0*y + 0.9*N(0,1)
///   x2 = 1.0*y + 1.1*N(0,1)
///   x3 = 0.6*y + 0.5*a + 0.8*N(0,1)            (weak proxy for the group)
///   x4 = 0.4*y + 0.7*a + 0.9*N(0,1)            (strong proxy for the group)
///
/// so P(Y=1|A=1) - P(Y=1|A=0) = bias_strength up to sampling noise, the
/// features carry the class signal, and x3/x4 leak group membership.
pub fn make_synthetic_biased(n: usize, bias_strength: f64, seed: u64) -> Result<Dataset> {
    if n < 100 {
        return Err(Error::Usage(format!(
            "synthetic dataset needs n >= 100, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&bias_strength) {
        return Err(Error::Usage(format!(
            "bias_strength {bias_strength} outside [0,1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut group = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    let mut x = vec![
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for _ in 0..n {
        let a = f64::from(u8::from(rng.next_u64() & 1 == 1));
        let p_y = 0.5 + bias_strength * (a - 0.5);
        let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let y = u8::from(u < p_y);
        let yf = f64::from(y);
        group.push(a);
        target.push(y);
        x[0].push(yf + 0.9 * next_gaussian(&mut rng));
        x[1].push(yf + 1.1 * next_gaussian(&mut rng));
        x[2].push(0.6 * yf + 0.5 * a + 0.8 * next_gaussian(&mut rng));
        x[3].push(0.4 * yf + 0.7 * a + 0.9 * next_gaussian(&mut rng));
    }
    let [x1, x2, x3, x4] = x.try_into().expect("four feature columns");
    Dataset::new(
        vec![
            "group".into(),
            "x1".into(),
            "x2".into(),
            "x3".into(),
            "x4".into(),
        ],
        vec![group, x1, x2, x3, x4],
        target,
        "label".into(),
        vec![ProtectedSpec::canonical("group")],
    )
}
