//! Experiment front end: configuration resolution, the train / evaluate /
//! compare / sweep / synth commands and report rendering.
//!
//! Configuration is a line-oriented `key = value` file with `[section]`
//! headers; every key is also exposed as a command-line flag that overrides
//! the file. Reports are plain-text aligned tables plus comma-separated
//! exports, written one file per protected attribute.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::{
    load_csv, make_synthetic_biased, min_max_scale, split, Dataset, Encoding, LoadSpec,
    ProtectedSpec, SplitPlan,
};
use crate::ensemble::{train_adaboost, train_groupcart, EnsembleConfig, EnsembleModel, Mode};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::moo::{Direction, DominationMode, ObjectiveSpec};
use crate::stats::{scott_knott, RankTable, TrialSeries};
use crate::tree::{fit, Hyper, WeightConfig};

/// Where the experiment's rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic { rows: usize, bias: f64 },
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub load: LoadSpec,
    pub plan: SplitPlan,
    pub ensemble: EnsembleConfig,
    pub out_dir: PathBuf,
    pub report_decimals: usize,
}

/// Partially specified configuration; flags and file sections fill it in,
/// `finalize` applies defaults and validates.
#[derive(Debug, Clone, Default)]
pub struct ConfigDraft {
    pub data_path: Option<PathBuf>,
    pub synthetic_rows: Option<usize>,
    pub synthetic_bias: Option<f64>,
    pub target: Option<String>,
    pub favorable: Option<String>,
    pub protected: Vec<ProtectedSpec>,
    pub encodings: BTreeMap<String, Encoding>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub size: Option<usize>,
    pub mode: Option<Mode>,
    pub domination: Option<DominationMode>,
    pub objectives: Option<Vec<ObjectiveSpec>>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub min_gain: Option<Option<f64>>,
    pub pa_proportions: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
    pub decimals: Option<usize>,
}

/// Known metric names with their directions and ideal values.
pub fn objective_from_name(name: &str) -> Result<ObjectiveSpec> {
    match name {
        "accuracy" | "precision" | "recall" | "f1" => Ok(ObjectiveSpec::maximize(name, 1.0)),
        "aod" | "eod" | "spd" | "di_deviation" | "flip_rate" => {
            Ok(ObjectiveSpec::minimize(name, 0.0))
        }
        other => Err(Error::Config(format!("unknown objective metric {other:?}"))),
    }
}

fn parse_protected_decl(name: &str, value: &str) -> Result<ProtectedSpec> {
    let (privileged, unprivileged) = value.split_once(':').ok_or_else(|| {
        Error::Config(format!(
            "protected declaration {name}={value} is not privileged:unprivileged"
        ))
    })?;
    ProtectedSpec::new(name.trim(), privileged.trim(), unprivileged.trim())
}

impl ConfigDraft {
    /// Merge a config file into this draft (file values do not override
    /// values that are already set, so flags read first win).
    pub fn merge_file(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                section = header
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        Error::Config(format!("line {}: malformed section {line:?}", lineno + 1))
                    })?
                    .trim()
                    .to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got {line:?}",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            self.apply_entry(&section, key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    fn apply_entry(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let bad_num =
            |what: &str| Error::Config(format!("{what} is not a valid number: {value:?}"));
        match (section, key) {
            ("data", "path") => set_if_empty(&mut self.data_path, PathBuf::from(value)),
            ("data", "target") => set_if_empty(&mut self.target, value.to_string()),
            ("data", "favorable") => set_if_empty(&mut self.favorable, value.to_string()),
            ("synthetic", "rows") => set_if_empty(
                &mut self.synthetic_rows,
                value.parse().map_err(|_| bad_num("rows"))?,
            ),
            ("synthetic", "bias") => set_if_empty(
                &mut self.synthetic_bias,
                value.parse().map_err(|_| bad_num("bias"))?,
            ),
            ("protected", name) => {
                let spec = parse_protected_decl(name, value)?;
                if !self.protected.iter().any(|p| p.name == spec.name) {
                    self.protected.push(spec);
                }
                Ok(())
            }
            ("split", "seed") => {
                set_if_empty(&mut self.seed, value.parse().map_err(|_| bad_num("seed"))?)
            }
            ("split", "repeats") => set_if_empty(
                &mut self.repeats,
                value.parse().map_err(|_| bad_num("repeats"))?,
            ),
            ("ensemble", "size") => {
                set_if_empty(&mut self.size, value.parse().map_err(|_| bad_num("size"))?)
            }
            ("ensemble", "mode") => set_if_empty(&mut self.mode, value.parse()?),
            ("ensemble", "domination") => set_if_empty(&mut self.domination, value.parse()?),
            ("ensemble", "objectives") => {
                let specs = value
                    .split(',')
                    .map(|n| objective_from_name(n.trim()))
                    .collect::<Result<Vec<_>>>()?;
                set_if_empty(&mut self.objectives, specs)
            }
            ("ensemble", "max_depth") => set_if_empty(
                &mut self.max_depth,
                value.parse().map_err(|_| bad_num("max_depth"))?,
            ),
            ("ensemble", "min_samples_leaf") => set_if_empty(
                &mut self.min_samples_leaf,
                value.parse().map_err(|_| bad_num("min_samples_leaf"))?,
            ),
            ("ensemble", "min_gain") => {
                let parsed = match value {
                    "auto" => None,
                    v => Some(v.parse().map_err(|_| bad_num("min_gain"))?),
                };
                set_if_empty(&mut self.min_gain, parsed)
            }
            ("ensemble", "pa_proportions") => {
                let props = value
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| bad_num("pa_proportions"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                set_if_empty(&mut self.pa_proportions, props)
            }
            ("output", "dir") => set_if_empty(&mut self.out_dir, PathBuf::from(value)),
            ("output", "decimals") => set_if_empty(
                &mut self.decimals,
                value.parse().map_err(|_| bad_num("decimals"))?,
            ),
            (section, _) if section.starts_with("encoding.") => {
                let column = section.trim_start_matches("encoding.").to_string();
                if key == "onehot" && value == "true" {
                    self.encodings.insert(column, Encoding::OneHot);
                } else {
                    let number: f64 = value.parse().map_err(|_| bad_num("encoding value"))?;
                    match self
                        .encodings
                        .entry(column)
                        .or_insert_with(|| Encoding::Ordinal(BTreeMap::new()))
                    {
                        Encoding::Ordinal(map) => {
                            map.insert(key.to_string(), number);
                        }
                        Encoding::OneHot => {
                            return Err(Error::Config(format!(
                                "column {} is one-hot encoded and cannot also carry an ordinal map",
                                section.trim_start_matches("encoding.")
                            )))
                        }
                    }
                }
                Ok(())
            }
            _ => Err(Error::Config(format!(
                "unknown configuration key [{section}] {key}"
            ))),
        }
    }

    /// Apply defaults, consult `GROUPCART_SEED` when no seed is set, and
    /// validate the combination.
    pub fn finalize(self) -> Result<ExperimentConfig> {
        let has_synthetic = self.synthetic_rows.is_some() || self.synthetic_bias.is_some();
        let source = match &self.data_path {
            Some(_) if has_synthetic => {
                return Err(Error::Config(
                    "both a data path and a synthetic source are configured".into(),
                ))
            }
            Some(path) => DataSource::Csv(path.clone()),
            None if has_synthetic => DataSource::Synthetic {
                rows: self.synthetic_rows.unwrap_or(1000),
                bias: self.synthetic_bias.unwrap_or(0.4),
            },
            None => {
                return Err(Error::Config(
                    "no data source: set [data] path or [synthetic] rows/bias".into(),
                ))
            }
        };
        if matches!(source, DataSource::Csv(_)) {
            if self.target.is_none() {
                return Err(Error::Config("csv data needs a target column".into()));
            }
            if self.favorable.is_none() {
                return Err(Error::Config(
                    "csv data needs a favorable target value".into(),
                ));
            }
            if self.protected.is_empty() {
                return Err(Error::Config(
                    "csv data needs at least one protected attribute".into(),
                ));
            }
        }
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var("GROUPCART_SEED") {
                Ok(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("GROUPCART_SEED={v:?} is not a number")))?,
                Err(_) => 42,
            },
        };
        let repeats = self.repeats.unwrap_or(20);
        if repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        let load = match &source {
            DataSource::Csv(_) => LoadSpec {
                target_column: self.target.clone().unwrap(),
                favorable_raw: self.favorable.clone().unwrap(),
                protected: self.protected.clone(),
                encodings: self.encodings.clone(),
            },
            DataSource::Synthetic { .. } => LoadSpec {
                target_column: "label".into(),
                favorable_raw: "1".into(),
                protected: vec![ProtectedSpec::canonical("group")],
                encodings: BTreeMap::new(),
            },
        };
        let ensemble = EnsembleConfig {
            size_n: self.size.unwrap_or(20),
            mode: self.mode.unwrap_or(Mode::Plain),
            domination: self.domination.unwrap_or(DominationMode::Binary),
            objective_specs: self
                .objectives
                .unwrap_or_else(crate::ensemble::default_objectives),
            pa_proportions: self.pa_proportions,
            hyper: Hyper {
                max_depth: self.max_depth.unwrap_or(8),
                min_samples_leaf: self.min_samples_leaf.unwrap_or(5),
                min_gain: self.min_gain.unwrap_or(None),
            },
        };
        Ok(ExperimentConfig {
            source,
            load,
            plan: SplitPlan {
                seed,
                repeats,
                ..Default::default()
            },
            ensemble,
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            report_decimals: self.decimals.unwrap_or(1),
        })
    }
}

fn set_if_empty<T>(slot: &mut Option<T>, value: T) -> Result<()> {
    if slot.is_none() {
        *slot = Some(value);
    }
    Ok(())
}

/// Load (or generate) the configured dataset and min-max scale it.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let raw = match &cfg.source {
        DataSource::Csv(path) => load_csv(path, &cfg.load)?,
        DataSource::Synthetic { rows, bias } => make_synthetic_biased(*rows, *bias, cfg.plan.seed)?,
    };
    Ok(min_max_scale(&raw))
}

/// The comparison baselines and treatments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cart,
    GroupCart,
    GroupCartAdaboost,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cart => "cart",
            Method::GroupCart => "groupcart",
            Method::GroupCartAdaboost => "groupcart_adaboost",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cart" => Ok(Method::Cart),
            "groupcart" => Ok(Method::GroupCart),
            "groupcart_adaboost" => Ok(Method::GroupCartAdaboost),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected cart, groupcart or groupcart_adaboost)"
            ))),
        }
    }
}

/// Evaluate one method on one repeat's split.
fn run_method(
    method: Method,
    train: &Dataset,
    valid: &Dataset,
    test: &Dataset,
    ensemble: &EnsembleConfig,
) -> Result<MetricReport> {
    match method {
        Method::Cart => {
            let tree = fit(train, &WeightConfig::cart(), &ensemble.hyper)?;
            MetricReport::compute(&tree, test)
        }
        Method::GroupCart => {
            let model = train_groupcart(train, valid, ensemble)?;
            MetricReport::compute(&model, test)
        }
        Method::GroupCartAdaboost => {
            let (model, _) = train_adaboost(train, valid, ensemble)?;
            MetricReport::compute(&model, test)
        }
    }
}

/// The nine report metrics for one protected attribute, in table order.
pub const REPORT_METRICS: [(&str, Direction); 9] = [
    ("accuracy", Direction::Maximize),
    ("precision", Direction::Maximize),
    ("recall", Direction::Maximize),
    ("f1", Direction::Maximize),
    ("aod", Direction::Minimize),
    ("eod", Direction::Minimize),
    ("spd", Direction::Minimize),
    ("di_deviation", Direction::Minimize),
    ("flip_rate", Direction::Minimize),
];

fn metric_value(report: &MetricReport, metric: &str, pa: &str) -> f64 {
    let key = match metric {
        "accuracy" | "precision" | "recall" | "f1" => metric.to_string(),
        _ => format!("{metric}:{pa}"),
    };
    report.value(&key).expect("known metric name")
}

/// Distance to heaven over the nine-metric report for one protected
/// attribute, with every metric clamped into `[0,1]`. Maximum 3.
pub fn report_d2h(report: &MetricReport, pa: &str) -> f64 {
    let mut sum = 0.0;
    for (metric, direction) in REPORT_METRICS {
        let v = metric_value(report, metric, pa).clamp(0.0, 1.0);
        let d = match direction {
            Direction::Maximize => 1.0 - v,
            Direction::Minimize => v,
        };
        sum += d * d;
    }
    sum.sqrt()
}

/// All per-repeat metric reports of a comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub method_labels: Vec<String>,
    /// `cells[method][repeat]`.
    pub cells: Vec<Vec<MetricReport>>,
    pub pa_names: Vec<String>,
    pub decimals: usize,
}

fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl TrialReport {
    /// Per-repeat values of one metric for one method.
    pub fn values(&self, method_idx: usize, metric: &str, pa: &str) -> Vec<f64> {
        self.cells[method_idx]
            .iter()
            .map(|r| {
                if metric == "d2h" {
                    report_d2h(r, pa)
                } else {
                    metric_value(r, metric, pa)
                }
            })
            .collect()
    }

    pub fn median(&self, method_idx: usize, metric: &str, pa: &str) -> f64 {
        median_of(&self.values(method_idx, metric, pa))
    }

    /// Scott-Knott rank table for one metric across methods.
    pub fn rank_table(&self, metric: &str, direction: Direction, pa: &str) -> Result<RankTable> {
        let series: Vec<TrialSeries> = self
            .method_labels
            .iter()
            .enumerate()
            .map(|(i, label)| TrialSeries::new(label, self.values(i, metric, pa)))
            .collect();
        scott_knott(&series, direction)
    }

    /// Aligned text table: median percentages (1 decimal by default) with
    /// Scott-Knott ranks as the color-band annotations.
    pub fn render_text(&self, pa: &str) -> Result<String> {
        let mut columns: Vec<(String, Vec<String>)> = Vec::new();
        let mut method_col = vec!["Method".to_string()];
        method_col.extend(self.method_labels.iter().cloned());
        columns.push(("".into(), method_col));
        for (metric, direction) in REPORT_METRICS {
            let table = self.rank_table(metric, direction, pa)?;
            let mut col = vec![display_metric_name(metric).to_string()];
            for (i, label) in self.method_labels.iter().enumerate() {
                let median = self.median(i, metric, pa);
                let rank = table.rank(label).expect("ranked method");
                col.push(format!("{:.*} ({rank})", self.decimals, median * 100.0));
            }
            columns.push((metric.to_string(), col));
        }
        {
            let table = self.rank_table("d2h", Direction::Minimize, pa)?;
            let mut col = vec!["d2h".to_string()];
            for (i, label) in self.method_labels.iter().enumerate() {
                let rank = table.rank(label).expect("ranked method");
                col.push(format!("{:.4} ({rank})", self.median(i, "d2h", pa)));
            }
            columns.push(("d2h".into(), col));
        }

        let widths: Vec<usize> = columns
            .iter()
            .map(|(_, col)| col.iter().map(|c| c.len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        writeln!(out, "protected attribute: {pa}").unwrap();
        writeln!(
            out,
            "medians over {} repeats, percentages; (n) = Scott-Knott rank, 1 is best",
            self.cells[0].len()
        )
        .unwrap();
        for row in 0..=self.method_labels.len() {
            let line: Vec<String> = columns
                .iter()
                .zip(&widths)
                .map(|((_, col), w)| format!("{:>w$}", col[row], w = w))
                .collect();
            writeln!(out, "{}", line.join("  ")).unwrap();
        }
        Ok(out)
    }

    /// Long-format summary: method,metric,median,rank.
    pub fn render_csv(&self, pa: &str) -> Result<String> {
        let mut out = String::from("method,metric,median,rank\n");
        let mut all: Vec<(&str, Direction)> = REPORT_METRICS.to_vec();
        all.push(("d2h", Direction::Minimize));
        for (metric, direction) in all {
            let table = self.rank_table(metric, direction, pa)?;
            for (i, label) in self.method_labels.iter().enumerate() {
                let median = self.median(i, metric, pa);
                let rank = table.rank(label).expect("ranked method");
                writeln!(out, "{label},{metric},{median},{rank}").unwrap();
            }
        }
        Ok(out)
    }

    /// Full-precision per-repeat cells: repeat,method,metric,value.
    pub fn render_cells_csv(&self, pa: &str) -> String {
        let mut out = String::from("repeat,method,metric,value\n");
        for (i, label) in self.method_labels.iter().enumerate() {
            for (repeat, report) in self.cells[i].iter().enumerate() {
                for (metric, _) in REPORT_METRICS {
                    writeln!(
                        out,
                        "{repeat},{label},{metric},{}",
                        metric_value(report, metric, pa)
                    )
                    .unwrap();
                }
                writeln!(out, "{repeat},{label},d2h,{}", report_d2h(report, pa)).unwrap();
            }
        }
        out
    }
}

fn display_metric_name(metric: &str) -> &'static str {
    match metric {
        "accuracy" => "Accuracy",
        "precision" => "Precision",
        "recall" => "Recall",
        "f1" => "F1",
        "aod" => "AOD",
        "eod" => "EOD",
        "spd" => "SPD",
        "di_deviation" => "DI",
        "flip_rate" => "FR",
        _ => "?",
    }
}

pub struct TrainOutput {
    pub model: EnsembleModel,
    pub model_path: PathBuf,
    pub frontier_path: PathBuf,
}

/// Train one ensemble on repeat 0's split and write the model bundle plus
/// the frontier export.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutput> {
    let dataset = load_dataset(cfg)?;
    let (train, valid, _test) = split(&dataset, &cfg.plan, 0)?;
    let model = match cfg.ensemble.mode {
        Mode::Plain => train_groupcart(&train, &valid, &cfg.ensemble)?,
        Mode::Adaboost => train_adaboost(&train, &valid, &cfg.ensemble)?.0,
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let model_path = cfg.out_dir.join("model.txt");
    let frontier_path = cfg.out_dir.join("frontier.txt");
    std::fs::write(&model_path, model.serialize())?;
    std::fs::write(&frontier_path, model.frontier_table())?;
    Ok(TrainOutput {
        model,
        model_path,
        frontier_path,
    })
}

pub struct EvaluateOutput {
    pub report: MetricReport,
    /// Per protected attribute d2h over the nine-metric report.
    pub d2h: Vec<(String, f64)>,
    pub text: String,
    pub report_path: PathBuf,
}

/// Evaluate a stored model bundle on a dataset and write/return the
/// nine-metric report with d2h.
pub fn cmd_evaluate(
    model_path: &Path,
    data: &Dataset,
    out_dir: &Path,
    decimals: usize,
) -> Result<EvaluateOutput> {
    let bundle = std::fs::read_to_string(model_path).map_err(|e| {
        Error::Config(format!(
            "cannot read model bundle {}: {e}",
            model_path.display()
        ))
    })?;
    let model = EnsembleModel::parse(&bundle)?;
    let report = MetricReport::compute(&model, data)?;
    let d2h: Vec<(String, f64)> = data
        .protected()
        .iter()
        .map(|p| (p.name.clone(), report_d2h(&report, &p.name)))
        .collect();

    let mut text = String::new();
    writeln!(text, "accuracy  {:.*}", decimals, report.accuracy * 100.0).unwrap();
    writeln!(text, "precision {:.*}", decimals, report.precision * 100.0).unwrap();
    writeln!(text, "recall    {:.*}", decimals, report.recall * 100.0).unwrap();
    writeln!(text, "f1        {:.*}", decimals, report.f1 * 100.0).unwrap();
    for pa in &report.fairness {
        writeln!(text, "[{}]", pa.attribute).unwrap();
        writeln!(text, "aod          {:.*}", decimals, pa.aod * 100.0).unwrap();
        writeln!(text, "eod          {:.*}", decimals, pa.eod * 100.0).unwrap();
        writeln!(text, "spd          {:.*}", decimals, pa.spd * 100.0).unwrap();
        writeln!(
            text,
            "di_deviation {:.*}",
            decimals,
            pa.di_deviation * 100.0
        )
        .unwrap();
        writeln!(text, "flip_rate    {:.*}", decimals, pa.flip_rate * 100.0).unwrap();
        let (_, d) = d2h
            .iter()
            .find(|(n, _)| n == &pa.attribute)
            .expect("computed above");
        writeln!(text, "d2h          {d:.4}").unwrap();
    }
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("evaluate.txt");
    std::fs::write(&report_path, &text)?;
    Ok(EvaluateOutput {
        report,
        d2h,
        text,
        report_path,
    })
}

pub struct CompareOutput {
    pub report: TrialReport,
    pub files: Vec<PathBuf>,
}

/// Run every method over shared per-repeat splits and emit median tables,
/// rank tables and the raw cells, one file set per protected attribute.
pub fn cmd_compare(cfg: &ExperimentConfig, methods: &[(String, Method)]) -> Result<CompareOutput> {
    if methods.is_empty() {
        return Err(Error::Config("compare needs at least one method".into()));
    }
    if cfg.plan.repeats < 2 {
        return Err(Error::Config(
            "compare needs at least 2 repeats for ranking".into(),
        ));
    }
    let mut labels = std::collections::BTreeSet::new();
    for (label, _) in methods {
        if !labels.insert(label.clone()) {
            return Err(Error::Config(format!("duplicate method label {label:?}")));
        }
    }
    let dataset = load_dataset(cfg)?;
    let mut cells: Vec<Vec<MetricReport>> = vec![Vec::new(); methods.len()];
    for repeat in 0..cfg.plan.repeats {
        let (train, valid, test) = split(&dataset, &cfg.plan, repeat)?;
        for (i, (_, method)) in methods.iter().enumerate() {
            cells[i].push(run_method(*method, &train, &valid, &test, &cfg.ensemble)?);
        }
    }
    let report = TrialReport {
        method_labels: methods.iter().map(|(l, _)| l.clone()).collect(),
        cells,
        pa_names: dataset.protected().iter().map(|p| p.name.clone()).collect(),
        decimals: cfg.report_decimals,
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut files = Vec::new();
    for pa in &report.pa_names {
        let txt = cfg.out_dir.join(format!("compare_{pa}.txt"));
        std::fs::write(&txt, report.render_text(pa)?)?;
        let csv = cfg.out_dir.join(format!("compare_{pa}.csv"));
        std::fs::write(&csv, report.render_csv(pa)?)?;
        let cells_csv = cfg.out_dir.join(format!("cells_{pa}.csv"));
        std::fs::write(&cells_csv, report.render_cells_csv(pa))?;
        files.extend([txt, csv, cells_csv]);
    }
    Ok(CompareOutput { report, files })
}

pub struct SweepRow {
    pub size: usize,
    /// (attribute, median flip rate, median d2h) per protected attribute.
    pub per_pa: Vec<(String, f64, f64)>,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// First size whose median flip rate is 0 for every protected
    /// attribute, if any.
    pub stopping_size: Option<usize>,
    pub text: String,
    pub files: Vec<PathBuf>,
}

/// Train ensembles at each size and report median flip rate and d2h per
/// size; flags the first size reaching a zero median flip rate.
pub fn cmd_sweep(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<SweepOutput> {
    if sizes.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one ensemble size".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sweep sizes must be strictly ascending".into(),
        ));
    }
    let dataset = load_dataset(cfg)?;
    let pa_names: Vec<String> = dataset.protected().iter().map(|p| p.name.clone()).collect();
    let mut rows = Vec::new();
    let mut stopping_size = None;
    for &size in sizes {
        let ensemble = EnsembleConfig {
            size_n: size,
            ..cfg.ensemble.clone()
        };
        let mut frs: Vec<Vec<f64>> = vec![Vec::new(); pa_names.len()];
        let mut d2hs: Vec<Vec<f64>> = vec![Vec::new(); pa_names.len()];
        let method = match cfg.ensemble.mode {
            Mode::Plain => Method::GroupCart,
            Mode::Adaboost => Method::GroupCartAdaboost,
        };
        for repeat in 0..cfg.plan.repeats {
            let (train, valid, test) = split(&dataset, &cfg.plan, repeat)?;
            let report = run_method(method, &train, &valid, &test, &ensemble)?;
            for (k, pa) in pa_names.iter().enumerate() {
                frs[k].push(report.pa(pa).expect("declared attribute").flip_rate);
                d2hs[k].push(report_d2h(&report, pa));
            }
        }
        let per_pa: Vec<(String, f64, f64)> = pa_names
            .iter()
            .enumerate()
            .map(|(k, pa)| (pa.clone(), median_of(&frs[k]), median_of(&d2hs[k])))
            .collect();
        if stopping_size.is_none() && per_pa.iter().all(|(_, fr, _)| *fr == 0.0) {
            stopping_size = Some(size);
        }
        rows.push(SweepRow { size, per_pa });
    }

    let mut text = String::new();
    writeln!(
        text,
        "ensemble-size sweep, {} repeats, medians",
        cfg.plan.repeats
    )
    .unwrap();
    writeln!(
        text,
        "{:>6}  {:<12} {:>10} {:>10}",
        "size", "attribute", "flip_rate", "d2h"
    )
    .unwrap();
    for row in &rows {
        for (pa, fr, d2h) in &row.per_pa {
            writeln!(
                text,
                "{:>6}  {:<12} {:>10.4} {:>10.4}",
                row.size, pa, fr, d2h
            )
            .unwrap();
        }
    }
    match stopping_size {
        Some(s) => writeln!(text, "stopping size (median flip rate 0): {s}").unwrap(),
        None => writeln!(text, "stopping size (median flip rate 0): not reached").unwrap(),
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    let txt = cfg.out_dir.join("sweep.txt");
    std::fs::write(&txt, &text)?;
    let mut csv = String::from("size,attribute,median_flip_rate,median_d2h\n");
    for row in &rows {
        for (pa, fr, d2h) in &row.per_pa {
            writeln!(csv, "{},{pa},{fr},{d2h}", row.size).unwrap();
        }
    }
    let csv_path = cfg.out_dir.join("sweep.csv");
    std::fs::write(&csv_path, csv)?;
    Ok(SweepOutput {
        rows,
        stopping_size,
        text,
        files: vec![txt, csv_path],
    })
}

/// Generate a synthetic biased dataset and write it as CSV.
pub fn cmd_synth(rows: usize, bias: f64, seed: u64, out: &Path) -> Result<()> {
    let d = make_synthetic_biased(rows, bias, seed)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    d.write_csv(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[data]
path = data/german.csv
target = Probability
favorable = 1

[protected]
sex = 1:0

[encoding.sex]
A91 = 1
A92 = 0

[encoding.4]
onehot = true

[split]
seed = 7
repeats = 3

[ensemble]
size = 5
mode = plain
domination = continuous
objectives = accuracy, f1, aod, di_deviation

[output]
dir = /tmp/out
decimals = 2
";

    #[test]
    fn config_file_round_trips_into_experiment() {
        let mut draft = ConfigDraft::default();
        draft.merge_file(SAMPLE).unwrap();
        let cfg = draft.finalize().unwrap();
        assert_eq!(
            cfg.source,
            DataSource::Csv(PathBuf::from("data/german.csv"))
        );
        assert_eq!(cfg.load.target_column, "Probability");
        assert_eq!(cfg.plan.seed, 7);
        assert_eq!(cfg.plan.repeats, 3);
        assert_eq!(cfg.ensemble.size_n, 5);
        assert_eq!(cfg.ensemble.domination, DominationMode::Continuous);
        assert_eq!(cfg.report_decimals, 2);
        assert!(matches!(
            cfg.load.encodings.get("4"),
            Some(Encoding::OneHot)
        ));
        match cfg.load.encodings.get("sex") {
            Some(Encoding::Ordinal(map)) => assert_eq!(map.get("A91"), Some(&1.0)),
            other => panic!("expected ordinal sex encoding, got {other:?}"),
        }
    }

    #[test]
    fn flags_take_precedence_over_file() {
        // The seed is set by a flag before the file is merged.
        let mut draft = ConfigDraft {
            seed: Some(99),
            ..ConfigDraft::default()
        };
        draft.merge_file(SAMPLE).unwrap();
        let cfg = draft.finalize().unwrap();
        assert_eq!(cfg.plan.seed, 99);
    }

    #[test]
    fn env_seed_is_a_fallback() {
        let draft = ConfigDraft {
            synthetic_rows: Some(200),
            ..ConfigDraft::default()
        };
        std::env::set_var("GROUPCART_SEED", "1234");
        let cfg = draft.finalize().unwrap();
        std::env::remove_var("GROUPCART_SEED");
        assert_eq!(cfg.plan.seed, 1234);
    }

    #[test]
    fn unknown_keys_and_metrics_are_rejected() {
        let mut draft = ConfigDraft::default();
        assert!(draft.merge_file("[data]\nbanana = 1\n").is_err());
        let mut draft = ConfigDraft::default();
        assert!(draft
            .merge_file("[ensemble]\nobjectives = accuracy, banana\n")
            .is_err());
        assert!(objective_from_name("banana").is_err());
    }

    #[test]
    fn csv_source_requires_target_and_protected() {
        let mut draft = ConfigDraft {
            data_path: Some(PathBuf::from("x.csv")),
            ..ConfigDraft::default()
        };
        assert!(matches!(draft.clone().finalize(), Err(Error::Config(_))));
        draft.target = Some("y".into());
        draft.favorable = Some("1".into());
        assert!(matches!(draft.clone().finalize(), Err(Error::Config(_))));
        draft.protected.push(ProtectedSpec::canonical("pa"));
        assert!(draft.finalize().is_ok());
    }

    #[test]
    fn report_d2h_is_zero_at_heaven_and_bounded() {
        let perfect = MetricReport {
            accuracy: 1.0,
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            fairness: vec![crate::metrics::PaReport {
                attribute: "pa".into(),
                aod: 0.0,
                eod: 0.0,
                spd: 0.0,
                di_deviation: 0.0,
                flip_rate: 0.0,
            }],
        };
        assert_eq!(report_d2h(&perfect, "pa"), 0.0);

        let worst = MetricReport {
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            fairness: vec![crate::metrics::PaReport {
                attribute: "pa".into(),
                aod: 1.0,
                eod: 1.0,
                spd: 1.0,
                di_deviation: 5.0, // clamped to 1
                flip_rate: 1.0,
            }],
        };
        assert_eq!(report_d2h(&worst, "pa"), 3.0);
    }
}
