//! Weight-spectrum tree ensembles: build one fairness-aware tree per IGS
//! weight step, keep the Pareto frontier on validation objectives, and vote.
//!
//! Plain mode trains member `i` of `N` with total IGS weight `i/N`
//! (i = 1..N) and votes by averaging the frontier trees' leaf positive
//! fractions. AdaBoost mode additionally reweights training rows between
//! iterations and votes with the per-member `alpha` weights.

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::moo::{
    nd_sort_indices, to_minimization, Candidate, DominationMode, ObjectiveSpec, ObjectiveVector,
};
use crate::tree::{fit_weighted, FairTree, Hyper, WeightConfig};
use crate::Predictor;

/// Denominator guard in the AdaBoost model-weight formula.
pub const EPSILON_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Adaboost,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Adaboost => "adaboost",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "adaboost" => Ok(Mode::Adaboost),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// How frontier members combine into one prediction.
///
/// `Majority` averages leaf positive fractions (soft vote); `MajorityHard`
/// averages hard 0/1 votes; `Weighted` is the AdaBoost sign vote. All ties
/// resolve to the favorable label 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VotingRule {
    Majority,
    MajorityHard,
    Weighted,
}

impl VotingRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            VotingRule::Majority => "majority",
            VotingRule::MajorityHard => "majority-hard",
            VotingRule::Weighted => "weighted",
        }
    }
}

impl std::str::FromStr for VotingRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(VotingRule::Majority),
            "majority-hard" => Ok(VotingRule::MajorityHard),
            "weighted" => Ok(VotingRule::Weighted),
            other => Err(Error::Config(format!("unknown voting rule {other:?}"))),
        }
    }
}

impl std::str::FromStr for DominationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(DominationMode::Binary),
            "continuous" => Ok(DominationMode::Continuous),
            other => Err(Error::Config(format!("unknown domination mode {other:?}"))),
        }
    }
}

pub fn domination_as_str(d: DominationMode) -> &'static str {
    match d {
        DominationMode::Binary => "binary",
        DominationMode::Continuous => "continuous",
    }
}

/// Ensemble training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub size_n: usize,
    pub mode: Mode,
    pub domination: DominationMode,
    /// Metric-kind objectives; fairness kinds expand to one objective per
    /// protected attribute at training time.
    pub objective_specs: Vec<ObjectiveSpec>,
    /// Share of the IGS budget per protected attribute, aligned with the
    /// dataset's declaration order. Default: uniform.
    pub pa_proportions: Option<Vec<f64>>,
    pub hyper: Hyper,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            size_n: 20,
            mode: Mode::Plain,
            domination: DominationMode::Binary,
            objective_specs: default_objectives(),
            pa_proportions: None,
            hyper: Hyper::default(),
        }
    }
}

/// The stock objective set: accuracy, F1, AOD and the disparate-impact
/// deviation.
pub fn default_objectives() -> Vec<ObjectiveSpec> {
    vec![
        ObjectiveSpec::maximize("accuracy", 1.0),
        ObjectiveSpec::maximize("f1", 1.0),
        ObjectiveSpec::minimize("aod", 0.0),
        ObjectiveSpec::minimize("di_deviation", 0.0),
    ]
}

fn is_performance_metric(name: &str) -> bool {
    matches!(name, "accuracy" | "precision" | "recall" | "f1")
}

fn is_fairness_metric(name: &str) -> bool {
    matches!(name, "aod" | "eod" | "spd" | "di_deviation" | "flip_rate")
}

/// Expand metric-kind objectives into concrete per-attribute objectives
/// (`aod` becomes `aod:sex`, `aod:race`, ...).
pub fn expand_objectives(
    specs: &[ObjectiveSpec],
    pa_names: &[String],
) -> Result<Vec<ObjectiveSpec>> {
    let mut out = Vec::new();
    for s in specs {
        if is_performance_metric(&s.name) {
            out.push(s.clone());
        } else if is_fairness_metric(&s.name) {
            for pa in pa_names {
                out.push(ObjectiveSpec {
                    name: format!("{}:{pa}", s.name),
                    direction: s.direction,
                    optimum: s.optimum,
                });
            }
        } else {
            return Err(Error::Config(format!(
                "unknown objective metric {:?}",
                s.name
            )));
        }
    }
    if out.is_empty() {
        return Err(Error::Config("objective list is empty".into()));
    }
    Ok(out)
}

/// One pool member: the tree, its IGS weight fraction, its AdaBoost weight
/// (if any) and its raw validation objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub tree: FairTree,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub objectives: ObjectiveVector,
}

/// AdaBoost bookkeeping, kept for inspection and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostState {
    /// Final per-row weights after the last normalization.
    pub instance_weights: Vec<f64>,
    /// Per-member model weights (alpha).
    pub model_weights: Vec<f64>,
    /// Per-member weighted training error rates (epsilon).
    pub error_rates: Vec<f64>,
    /// Sum of instance weights recorded after each iteration's
    /// normalization; all should be 1 up to rounding.
    pub weight_sums: Vec<f64>,
}

/// A trained, frontier-filtered ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub members: Vec<EnsembleMember>,
    /// Indices into `members` that survived non-dominated sorting.
    pub frontier: Vec<usize>,
    pub voting: VotingRule,
    /// Expanded objective specs aligned with every member's objectives.
    pub objective_specs: Vec<ObjectiveSpec>,
    pub mode: Mode,
    pub domination: DominationMode,
}

/// AdaBoost model weight for a weighted error rate.
pub fn alpha_from_error(epsilon: f64) -> f64 {
    // The guard appears on both sides so alpha stays finite over the whole
    // closed range [0, 1] of epsilon.
    0.5 * ((1.0 - epsilon + EPSILON_GUARD) / (epsilon + EPSILON_GUARD)).ln()
}

fn validate_inputs(train: &Dataset, valid: &Dataset, cfg: &EnsembleConfig) -> Result<()> {
    if cfg.size_n < 2 {
        return Err(Error::Config(format!(
            "ensemble size {} is below 2",
            cfg.size_n
        )));
    }
    if train.protected().is_empty() {
        return Err(Error::Config("no protected attributes declared".into()));
    }
    if train.feature_names() != valid.feature_names() {
        return Err(Error::Config(
            "train and validation data have different schemas".into(),
        ));
    }
    let single_class = valid.target().windows(2).all(|w| w[0] == w[1]);
    let single_group = train.protected().iter().any(|p| {
        let col = valid.column(&p.name).expect("validated protected column");
        col.windows(2).all(|w| w[0] == w[1])
    });
    if single_class && single_group {
        return Err(Error::Data(
            "validation set has a single class and a single protected group; \
             fairness objectives are undefined"
                .into(),
        ));
    }
    Ok(())
}

/// Normalized per-attribute shares of the IGS budget.
fn pa_shares(train: &Dataset, cfg: &EnsembleConfig) -> Result<Vec<(String, f64)>> {
    let names: Vec<String> = train.protected().iter().map(|p| p.name.clone()).collect();
    let props = match &cfg.pa_proportions {
        Some(p) => {
            if p.len() != names.len() {
                return Err(Error::Config(format!(
                    "{} attribute proportions for {} protected attributes",
                    p.len(),
                    names.len()
                )));
            }
            if p.iter().any(|&x| x < 0.0) || p.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config(
                    "attribute proportions must be non-negative with a positive sum".into(),
                ));
            }
            p.clone()
        }
        None => vec![1.0; names.len()],
    };
    let total: f64 = props.iter().sum();
    Ok(names
        .into_iter()
        .zip(props.into_iter().map(|p| p / total))
        .collect())
}

/// Weight configuration of member `i` of `n`: IGS budget `i/n` split
/// across attributes, IGC weight `1 - i/n`.
fn member_weights(shares: &[(String, f64)], i: usize, n: usize) -> Result<WeightConfig> {
    let lambda = i as f64 / n as f64;
    let igs = shares
        .iter()
        .map(|(name, s)| (name.clone(), lambda * s))
        .collect();
    WeightConfig::new(1.0 - lambda, igs)
}

/// Raw validation objectives of one tree under the expanded specs.
pub fn evaluate_member(
    tree: &FairTree,
    valid: &Dataset,
    expanded: &[ObjectiveSpec],
) -> Result<ObjectiveVector> {
    let report = MetricReport::compute(tree, valid)?;
    let values = expanded
        .iter()
        .map(|s| {
            report.value(&s.name).ok_or_else(|| {
                Error::Internal(format!("objective {} missing from metric report", s.name))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ObjectiveVector(values))
}

fn frontier_of(
    members: &[EnsembleMember],
    specs: &[ObjectiveSpec],
    mode: DominationMode,
) -> Result<Vec<usize>> {
    let pool = members
        .iter()
        .enumerate()
        .map(|(id, m)| {
            Ok(Candidate {
                id,
                objectives: to_minimization(&m.objectives, specs)?,
            })
        })
        .collect::<Result<Vec<Candidate>>>()?;
    nd_sort_indices(&pool, mode)
}

/// Train the plain weight-spectrum ensemble: N trees at IGS fractions
/// 1/N .. N/N, Pareto-filtered on validation objectives, majority voting.
pub fn train_groupcart(
    train: &Dataset,
    valid: &Dataset,
    cfg: &EnsembleConfig,
) -> Result<EnsembleModel> {
    validate_inputs(train, valid, cfg)?;
    let shares = pa_shares(train, cfg)?;
    let pa_names: Vec<String> = shares.iter().map(|(n, _)| n.clone()).collect();
    let expanded = expand_objectives(&cfg.objective_specs, &pa_names)?;

    let mut members = Vec::with_capacity(cfg.size_n);
    for i in 1..=cfg.size_n {
        let weights = member_weights(&shares, i, cfg.size_n)?;
        let tree = fit_weighted(train, &weights, &cfg.hyper, None)?;
        let objectives = evaluate_member(&tree, valid, &expanded)?;
        members.push(EnsembleMember {
            tree,
            lambda: i as f64 / cfg.size_n as f64,
            alpha: None,
            objectives,
        });
    }
    let frontier = frontier_of(&members, &expanded, cfg.domination)?;
    EnsembleModel::assemble(
        members,
        frontier,
        VotingRule::Majority,
        expanded,
        Mode::Plain,
        cfg.domination,
    )
}

/// Train the boosted variant: per iteration, fit the `i/N` tree on the
/// current row weights, compute the weighted error and its alpha, upweight
/// misclassified rows and renormalize. Frontier selection and weighted
/// voting follow.
pub fn train_adaboost(
    train: &Dataset,
    valid: &Dataset,
    cfg: &EnsembleConfig,
) -> Result<(EnsembleModel, BoostState)> {
    validate_inputs(train, valid, cfg)?;
    let shares = pa_shares(train, cfg)?;
    let pa_names: Vec<String> = shares.iter().map(|(n, _)| n.clone()).collect();
    let expanded = expand_objectives(&cfg.objective_specs, &pa_names)?;

    let n_rows = train.row_count();
    let mut w = vec![1.0 / n_rows as f64; n_rows];
    let mut members = Vec::with_capacity(cfg.size_n);
    let mut state = BoostState {
        instance_weights: Vec::new(),
        model_weights: Vec::new(),
        error_rates: Vec::new(),
        weight_sums: Vec::new(),
    };
    for i in 1..=cfg.size_n {
        let weights = member_weights(&shares, i, cfg.size_n)?;
        let tree = fit_weighted(train, &weights, &cfg.hyper, Some(&w))?;
        let predictions = tree.predict_dataset(train)?;
        let epsilon: f64 = predictions
            .iter()
            .zip(train.target())
            .zip(&w)
            .filter(|((p, t), _)| p != t)
            .map(|(_, wi)| wi)
            .sum();
        let alpha = alpha_from_error(epsilon);
        for ((p, t), wi) in predictions.iter().zip(train.target()).zip(w.iter_mut()) {
            if p != t {
                *wi *= alpha.exp();
            }
        }
        let total: f64 = w.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Internal(format!(
                "instance weights degenerated (sum {total})"
            )));
        }
        for wi in &mut w {
            *wi /= total;
        }
        state.error_rates.push(epsilon);
        state.model_weights.push(alpha);
        state.weight_sums.push(w.iter().sum());

        let objectives = evaluate_member(&tree, valid, &expanded)?;
        members.push(EnsembleMember {
            tree,
            lambda: i as f64 / cfg.size_n as f64,
            alpha: Some(alpha),
            objectives,
        });
    }
    state.instance_weights = w;
    let frontier = frontier_of(&members, &expanded, cfg.domination)?;
    let model = EnsembleModel::assemble(
        members,
        frontier,
        VotingRule::Weighted,
        expanded,
        Mode::Adaboost,
        cfg.domination,
    )?;
    Ok((model, state))
}

impl EnsembleModel {
    /// Build a model from parts, enforcing the structural invariants.
    pub fn assemble(
        members: Vec<EnsembleMember>,
        frontier: Vec<usize>,
        voting: VotingRule,
        objective_specs: Vec<ObjectiveSpec>,
        mode: Mode,
        domination: DominationMode,
    ) -> Result<EnsembleModel> {
        if members.is_empty() {
            return Err(Error::Usage("ensemble with no members".into()));
        }
        if frontier.is_empty() {
            return Err(Error::Internal("empty Pareto frontier".into()));
        }
        if frontier.iter().any(|&i| i >= members.len()) {
            return Err(Error::Internal("frontier index out of range".into()));
        }
        let schema = members[0].tree.feature_names().to_vec();
        for m in &members {
            if m.tree.feature_names() != schema.as_slice() {
                return Err(Error::Usage(
                    "ensemble members disagree on the feature schema".into(),
                ));
            }
            if m.objectives.len() != objective_specs.len() {
                return Err(Error::Usage(
                    "member objectives do not match the spec list".into(),
                ));
            }
        }
        if voting == VotingRule::Weighted && frontier.iter().any(|&i| members[i].alpha.is_none()) {
            return Err(Error::Usage(
                "weighted voting requires an alpha on every frontier member".into(),
            ));
        }
        Ok(EnsembleModel {
            members,
            frontier,
            voting,
            objective_specs,
            mode,
            domination,
        })
    }

    pub fn frontier_members(&self) -> impl Iterator<Item = &EnsembleMember> {
        self.frontier.iter().map(|&i| &self.members[i])
    }

    /// Soft majority vote: mean of frontier leaf positive fractions,
    /// favorable on ties.
    pub fn predict_majority(&self, row: &[f64]) -> u8 {
        let sum: f64 = self.frontier_members().map(|m| m.tree.route(row).1).sum();
        u8::from(sum / self.frontier.len() as f64 >= 0.5)
    }

    /// Hard majority vote over member labels, favorable on ties.
    pub fn predict_majority_hard(&self, row: &[f64]) -> u8 {
        let sum: f64 = self
            .frontier_members()
            .map(|m| f64::from(m.tree.route(row).0))
            .sum();
        u8::from(sum / self.frontier.len() as f64 >= 0.5)
    }

    /// AdaBoost sign vote: sum of alpha * (2 * prediction - 1) over the
    /// frontier, favorable when the score is non-negative.
    pub fn predict_weighted(&self, row: &[f64]) -> u8 {
        let score: f64 = self
            .frontier_members()
            .map(|m| {
                let vote = 2.0 * f64::from(m.tree.route(row).0) - 1.0;
                m.alpha.expect("validated at assembly") * vote
            })
            .sum();
        u8::from(score >= 0.0)
    }

    /// Minimization-form distance of member `idx`'s validation objectives
    /// from the ideal point, with each coordinate clamped into `[0,1]` so the
    /// unbounded disparate-impact deviation cannot swamp the distance.
    pub fn member_d2h(&self, idx: usize) -> Result<f64> {
        let m = self
            .members
            .get(idx)
            .ok_or_else(|| Error::Usage(format!("no ensemble member {idx}")))?;
        let minform = to_minimization(&m.objectives, &self.objective_specs)?;
        Ok(minform
            .values()
            .iter()
            .map(|v| v.clamp(0.0, 1.0))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt())
    }

    pub fn min_frontier_d2h(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for &i in &self.frontier {
            best = best.min(self.member_d2h(i)?);
        }
        Ok(best)
    }

    /// One line per pool member: id, IGS fraction, frontier membership,
    /// raw objectives, minimization-form objectives and d2h.
    pub fn frontier_table(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self
            .objective_specs
            .iter()
            .map(|s| s.name.as_str())
            .collect();
        writeln!(out, "# objectives: {}", names.join(",")).unwrap();
        for (i, m) in self.members.iter().enumerate() {
            let raw: Vec<String> = m
                .objectives
                .values()
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            let minform = to_minimization(&m.objectives, &self.objective_specs)
                .expect("validated at assembly");
            let norm: Vec<String> = minform.values().iter().map(|v| format!("{v}")).collect();
            writeln!(
                out,
                "id {i} lambda {} frontier {} raw {} min {} d2h {}",
                m.lambda,
                self.frontier.contains(&i),
                raw.join(","),
                norm.join(","),
                self.member_d2h(i).expect("index in range"),
            )
            .unwrap();
        }
        out
    }

    /// Serialize the whole model: a manifest header plus each member's
    /// weight configuration and tree text.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let schema = self.members[0].tree.feature_names();
        let hyper = self.members[0].tree.hyper();
        out.push_str("groupcart-bundle v1\n");
        writeln!(out, "mode {}", self.mode.as_str()).unwrap();
        writeln!(out, "size {}", self.members.len()).unwrap();
        writeln!(out, "domination {}", domination_as_str(self.domination)).unwrap();
        writeln!(out, "voting {}", self.voting.as_str()).unwrap();
        writeln!(out, "features {}", schema.join(",")).unwrap();
        let objectives: Vec<String> = self
            .objective_specs
            .iter()
            .map(|s| format!("{} {} {}", s.name, s.direction.as_str(), s.optimum))
            .collect();
        writeln!(out, "objectives {}", objectives.join(";")).unwrap();
        let min_gain = match hyper.min_gain {
            Some(g) => format!("{g}"),
            None => "auto".to_string(),
        };
        writeln!(
            out,
            "hyper max_depth {} min_samples_leaf {} min_gain {min_gain}",
            hyper.max_depth, hyper.min_samples_leaf
        )
        .unwrap();
        for (i, m) in self.members.iter().enumerate() {
            writeln!(out, "member {i}").unwrap();
            writeln!(out, "lambda {}", m.lambda).unwrap();
            let w = m.tree.weights();
            let mut weight_parts = vec![format!("igc {}", w.igc_weight())];
            for (name, wv) in w.igs_weights() {
                weight_parts.push(format!("{name} {wv}"));
            }
            writeln!(out, "weights {}", weight_parts.join(";")).unwrap();
            match m.alpha {
                Some(a) => writeln!(out, "alpha {a}").unwrap(),
                None => writeln!(out, "alpha -").unwrap(),
            }
            writeln!(out, "frontier {}", self.frontier.contains(&i)).unwrap();
            let values: Vec<String> = m
                .objectives
                .values()
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            writeln!(out, "valid {}", values.join(",")).unwrap();
            out.push_str("tree\n");
            out.push_str(&m.tree.serialize());
            out.push_str("end member\n");
        }
        out.push_str("end bundle\n");
        out
    }

    /// Parse a bundle produced by [`EnsembleModel::serialize`].
    pub fn parse(text: &str) -> Result<EnsembleModel> {
        let mut lines = text.lines().peekable();
        let bad = |what: &str| Error::Data(format!("model bundle: {what}"));
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if header != "groupcart-bundle v1" {
            return Err(bad(&format!("unsupported header {header:?}")));
        }

        let field =
            |key: &str, lines: &mut std::iter::Peekable<std::str::Lines>| -> Result<String> {
                let line = lines
                    .next()
                    .ok_or_else(|| bad(&format!("missing {key} line")))?;
                line.strip_prefix(key)
                    .and_then(|rest| rest.strip_prefix(' '))
                    .map(|s| s.to_string())
                    .ok_or_else(|| bad(&format!("expected {key} line, found {line:?}")))
            };

        let mode: Mode = field("mode", &mut lines)?.parse()?;
        let size: usize = field("size", &mut lines)?
            .parse()
            .map_err(|_| bad("size is not a number"))?;
        let domination: DominationMode = field("domination", &mut lines)?.parse()?;
        let voting: VotingRule = field("voting", &mut lines)?.parse()?;
        let features: Vec<String> = field("features", &mut lines)?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let objective_specs = field("objectives", &mut lines)?
            .split(';')
            .map(|chunk| {
                let parts: Vec<&str> = chunk.split(' ').collect();
                match parts.as_slice() {
                    [name, dir, opt] => Ok(ObjectiveSpec {
                        name: name.to_string(),
                        direction: dir.parse()?,
                        optimum: opt
                            .parse()
                            .map_err(|_| bad("objective optimum is not a number"))?,
                    }),
                    _ => Err(bad(&format!("malformed objective {chunk:?}"))),
                }
            })
            .collect::<Result<Vec<ObjectiveSpec>>>()?;
        let hyper_line = field("hyper", &mut lines)?;
        let hp: Vec<&str> = hyper_line.split(' ').collect();
        let hyper = match hp.as_slice() {
            ["max_depth", d, "min_samples_leaf", m, "min_gain", g] => Hyper {
                max_depth: d.parse().map_err(|_| bad("bad max_depth"))?,
                min_samples_leaf: m.parse().map_err(|_| bad("bad min_samples_leaf"))?,
                min_gain: match *g {
                    "auto" => None,
                    g => Some(g.parse().map_err(|_| bad("bad min_gain"))?),
                },
            },
            _ => return Err(bad(&format!("malformed hyper line {hyper_line:?}"))),
        };

        let mut members = Vec::with_capacity(size);
        let mut frontier = Vec::new();
        for idx in 0..size {
            let member_line = field("member", &mut lines)?;
            if member_line != idx.to_string() {
                return Err(bad(&format!(
                    "expected member {idx}, found {member_line:?}"
                )));
            }
            let lambda: f64 = field("lambda", &mut lines)?
                .parse()
                .map_err(|_| bad("bad lambda"))?;
            let weights_line = field("weights", &mut lines)?;
            let mut igc = None;
            let mut igs = Vec::new();
            for chunk in weights_line.split(';') {
                let (name, value) = chunk
                    .split_once(' ')
                    .ok_or_else(|| bad("malformed weights entry"))?;
                let value: f64 = value.parse().map_err(|_| bad("bad weight value"))?;
                if name == "igc" {
                    igc = Some(value);
                } else {
                    igs.push((name.to_string(), value));
                }
            }
            let weights = WeightConfig::from_normalized(
                igc.ok_or_else(|| bad("weights line lacks igc"))?,
                igs,
            )?;
            let alpha_raw = field("alpha", &mut lines)?;
            let alpha = match alpha_raw.as_str() {
                "-" => None,
                a => Some(a.parse().map_err(|_| bad("bad alpha"))?),
            };
            let in_frontier: bool = field("frontier", &mut lines)?
                .parse()
                .map_err(|_| bad("bad frontier flag"))?;
            if in_frontier {
                frontier.push(idx);
            }
            let values = field("valid", &mut lines)?
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|_| bad("bad objective value")))
                .collect::<Result<Vec<f64>>>()?;
            let tree_marker = lines.next().ok_or_else(|| bad("missing tree section"))?;
            if tree_marker != "tree" {
                return Err(bad(&format!("expected tree marker, found {tree_marker:?}")));
            }
            let mut tree_text = String::new();
            loop {
                let line = lines
                    .next()
                    .ok_or_else(|| bad("unterminated tree section"))?;
                if line == "end member" {
                    break;
                }
                tree_text.push_str(line);
                tree_text.push('\n');
            }
            let tree = FairTree::parse(&tree_text, features.clone(), weights, hyper.clone())?;
            members.push(EnsembleMember {
                tree,
                lambda,
                alpha,
                objectives: ObjectiveVector(values),
            });
        }
        if lines.next() != Some("end bundle") {
            return Err(bad("missing end-of-bundle marker"));
        }
        EnsembleModel::assemble(members, frontier, voting, objective_specs, mode, domination)
    }
}

impl Predictor for EnsembleModel {
    fn feature_names(&self) -> &[String] {
        self.members[0].tree.feature_names()
    }

    fn predict_row(&self, row: &[f64]) -> u8 {
        match self.voting {
            VotingRule::Majority => self.predict_majority(row),
            VotingRule::MajorityHard => self.predict_majority_hard(row),
            VotingRule::Weighted => self.predict_weighted(row),
        }
    }
}
