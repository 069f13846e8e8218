//! Fairness-aware CART: greedy binary trees whose split criterion rewards
//! information gain on the class (IGC) and penalizes information gain on
//! protected attributes (IGS).
//!
//! The criterion for a candidate split is
//!
//! ```text
//! score = igc_weight * IGC - sum_a igs_weight[a] * IGS_a
//! ```
//!
//! maximized over all (feature, threshold) candidates, where thresholds are
//! midpoints between consecutive distinct sorted feature values and IGS_a is
//! the information gain computed with protected attribute `a` standing in
//! for the label. With `igc_weight = 1` the criterion is plain information
//! gain and the tree is an ordinary CART.

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::Predictor;

/// Shannon entropy (base 2) of a binary label list.
pub fn entropy(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Usage("entropy of an empty label list".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok(binary_entropy(pos as f64 / labels.len() as f64))
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Information gain of a two-way split: H(parent) minus the size-weighted
/// child entropies. Non-negative up to rounding; clamped at 0.
pub fn info_gain(parent: &[u8], left: &[u8], right: &[u8]) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::Usage("info_gain with an empty child".into()));
    }
    if left.len() + right.len() != parent.len() {
        return Err(Error::Usage(format!(
            "children cover {} rows but parent has {}",
            left.len() + right.len(),
            parent.len()
        )));
    }
    let h = entropy(parent)?;
    let wl = left.len() as f64 / parent.len() as f64;
    let wr = right.len() as f64 / parent.len() as f64;
    Ok((h - wl * entropy(left)? - wr * entropy(right)?).max(0.0))
}

/// IGC/IGS weight configuration of one tree. Weights are normalized so
/// `igc_weight + sum(igs_weights) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    igc_weight: f64,
    igs_weights: Vec<(String, f64)>,
}

impl WeightConfig {
    pub fn new(igc: f64, igs: Vec<(String, f64)>) -> Result<Self> {
        if igc < 0.0 || igs.iter().any(|(_, w)| *w < 0.0) {
            return Err(Error::Usage(
                "split-criterion weights must be non-negative".into(),
            ));
        }
        let sum: f64 = igc + igs.iter().map(|(_, w)| w).sum::<f64>();
        if sum <= 0.0 {
            return Err(Error::Usage("split-criterion weights sum to zero".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (name, _) in &igs {
            if !seen.insert(name.clone()) {
                return Err(Error::Usage(format!(
                    "duplicate protected attribute {name} in weights"
                )));
            }
        }
        Ok(WeightConfig {
            igc_weight: igc / sum,
            igs_weights: igs.into_iter().map(|(n, w)| (n, w / sum)).collect(),
        })
    }

    /// Plain CART: all weight on the class attribute.
    pub fn cart() -> Self {
        WeightConfig {
            igc_weight: 1.0,
            igs_weights: Vec::new(),
        }
    }

    /// Adopt already-normalized weights verbatim (deserialization path;
    /// re-dividing by a sum of 1±ulp would perturb stored values).
    pub fn from_normalized(igc: f64, igs: Vec<(String, f64)>) -> Result<Self> {
        if igc < 0.0 || igs.iter().any(|(_, w)| *w < 0.0) {
            return Err(Error::Usage(
                "split-criterion weights must be non-negative".into(),
            ));
        }
        let sum: f64 = igc + igs.iter().map(|(_, w)| w).sum::<f64>();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Usage(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightConfig {
            igc_weight: igc,
            igs_weights: igs,
        })
    }

    /// Single protected attribute with IGS weight `lambda` and IGC weight
    /// `1 - lambda`.
    pub fn single(pa: &str, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Usage(format!("lambda {lambda} outside [0,1]")));
        }
        WeightConfig::new(1.0 - lambda, vec![(pa.to_string(), lambda)])
    }

    pub fn igc_weight(&self) -> f64 {
        self.igc_weight
    }

    pub fn igs_weights(&self) -> &[(String, f64)] {
        &self.igs_weights
    }

    pub fn total_igs(&self) -> f64 {
        self.igs_weights.iter().map(|(_, w)| w).sum()
    }

    /// Combined split score for a candidate with class gain `igc` and
    /// per-attribute gains `igs` (aligned with `igs_weights`).
    pub fn score(&self, igc: f64, igs: &[f64]) -> f64 {
        debug_assert_eq!(igs.len(), self.igs_weights.len());
        let penalty: f64 = self
            .igs_weights
            .iter()
            .zip(igs)
            .map(|((_, w), g)| w * g)
            .sum();
        self.igc_weight * igc - penalty
    }
}

/// Tree-growing hyperparameters.
///
/// `min_gain = None` resolves at fit time: 1e-12 for pure-IGC trees (so a
/// CART stops on zero-gain splits) and unbounded-below when any IGS weight
/// is active, so fairness pressure can still pick the least-bad split
/// instead of collapsing to a majority leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_gain: Option<f64>,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            max_depth: 8,
            min_samples_leaf: 5,
            min_gain: None,
        }
    }
}

impl Hyper {
    fn resolved_min_gain(&self, weights: &WeightConfig) -> f64 {
        match self.min_gain {
            Some(g) => g,
            None if weights.total_igs() > 0.0 => f64::NEG_INFINITY,
            None => 1e-12,
        }
    }
}

/// One node of a trained tree. Rows with `feature <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: u8,
        positive_fraction: f64,
        n: usize,
    },
    Internal {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// A trained fairness-aware decision tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FairTree {
    root: TreeNode,
    feature_names: Vec<String>,
    weights: WeightConfig,
    hyper: Hyper,
}

struct FitCtx<'a> {
    columns: &'a [Vec<f64>],
    target: &'a [u8],
    pa_cols: Vec<usize>,
    sample_w: Vec<f64>,
    igc_weight: f64,
    igs_weights: Vec<f64>,
    max_depth: usize,
    min_samples_leaf: usize,
    min_gain: f64,
}

/// Train a tree on unweighted rows.
pub fn fit(train: &Dataset, weights: &WeightConfig, hyper: &Hyper) -> Result<FairTree> {
    fit_weighted(train, weights, hyper, None)
}

/// Train a tree with per-row sample weights (AdaBoost iterations). All
/// probability estimates inside the entropy terms use weight sums in place
/// of counts, for the target and the protected attributes alike.
pub fn fit_weighted(
    train: &Dataset,
    weights: &WeightConfig,
    hyper: &Hyper,
    sample_weights: Option<&[f64]>,
) -> Result<FairTree> {
    if train.row_count() == 0 {
        return Err(Error::Usage("cannot fit a tree on an empty dataset".into()));
    }
    if hyper.min_samples_leaf == 0 {
        return Err(Error::Usage("min_samples_leaf must be at least 1".into()));
    }
    let pa_cols = weights
        .igs_weights()
        .iter()
        .map(|(name, _)| train.feature_index(name))
        .collect::<Result<Vec<usize>>>()?;
    let sample_w = match sample_weights {
        Some(w) => {
            if w.len() != train.row_count() {
                return Err(Error::Usage(format!(
                    "{} sample weights for {} rows",
                    w.len(),
                    train.row_count()
                )));
            }
            if w.iter().any(|&x| !x.is_finite() || x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Usage(
                    "sample weights must be non-negative with positive sum".into(),
                ));
            }
            w.to_vec()
        }
        None => vec![1.0; train.row_count()],
    };
    let ctx = FitCtx {
        columns: train.columns(),
        target: train.target(),
        pa_cols,
        sample_w,
        igc_weight: weights.igc_weight(),
        igs_weights: weights.igs_weights().iter().map(|(_, w)| *w).collect(),
        max_depth: hyper.max_depth,
        min_samples_leaf: hyper.min_samples_leaf,
        min_gain: hyper.resolved_min_gain(weights),
    };
    let rows: Vec<usize> = (0..train.row_count()).collect();
    let root = grow(&ctx, rows, 0);
    Ok(FairTree {
        root,
        feature_names: train.feature_names().to_vec(),
        weights: weights.clone(),
        hyper: hyper.clone(),
    })
}

fn leaf_from(ctx: &FitCtx, rows: &[usize]) -> TreeNode {
    let mut w = 0.0;
    let mut wpos = 0.0;
    for &r in rows {
        w += ctx.sample_w[r];
        wpos += ctx.sample_w[r] * f64::from(ctx.target[r]);
    }
    let positive_fraction = if w > 0.0 { wpos / w } else { 0.0 };
    TreeNode::Leaf {
        label: u8::from(positive_fraction >= 0.5),
        positive_fraction,
        n: rows.len(),
    }
}

fn grow(ctx: &FitCtx, rows: Vec<usize>, depth: usize) -> TreeNode {
    let pure = rows.iter().all(|&r| ctx.target[r] == ctx.target[rows[0]]);
    if depth >= ctx.max_depth || rows.len() < 2 * ctx.min_samples_leaf || pure {
        return leaf_from(ctx, &rows);
    }
    match best_split(ctx, &rows) {
        Some((score, feature, threshold)) if score >= ctx.min_gain => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .copied()
                .partition(|&r| ctx.columns[feature][r] <= threshold);
            let left = grow(ctx, left_rows, depth + 1);
            let right = grow(ctx, right_rows, depth + 1);
            TreeNode::Internal {
                feature,
                threshold,
                gain: score,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        _ => leaf_from(ctx, &rows),
    }
}

/// Child-weighted entropy drop, clamped at 0.
fn gain_from_parts(parent_h: f64, wpos_l: f64, w_l: f64, wpos_r: f64, w_r: f64) -> f64 {
    let w = w_l + w_r;
    let h_l = binary_entropy(wpos_l / w_l);
    let h_r = binary_entropy(wpos_r / w_r);
    (parent_h - (w_l / w) * h_l - (w_r / w) * h_r).max(0.0)
}

/// Exhaustive candidate search. Features are visited in index order and
/// thresholds in ascending order with a strict improvement test, so ties
/// resolve to the lowest feature index, then the lowest threshold.
fn best_split(ctx: &FitCtx, rows: &[usize]) -> Option<(f64, usize, f64)> {
    let n = rows.len();
    let n_pa = ctx.pa_cols.len();

    let mut w_total = 0.0;
    let mut wpos_total = 0.0;
    let mut wpos_pa_total = vec![0.0; n_pa];
    for &r in rows {
        let w = ctx.sample_w[r];
        w_total += w;
        wpos_total += w * f64::from(ctx.target[r]);
        for (k, &c) in ctx.pa_cols.iter().enumerate() {
            wpos_pa_total[k] += w * ctx.columns[c][r];
        }
    }
    let parent_h = binary_entropy(wpos_total / w_total);
    let parent_h_pa: Vec<f64> = wpos_pa_total
        .iter()
        .map(|&p| binary_entropy(p / w_total))
        .collect();

    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(n);
    let mut igs = vec![0.0; n_pa];
    for feature in 0..ctx.columns.len() {
        let col = &ctx.columns[feature];
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("finite values"));

        let mut cnt_l = 0usize;
        let mut w_l = 0.0;
        let mut wpos_l = 0.0;
        let mut wpos_pa_l = vec![0.0; n_pa];
        let mut i = 0;
        while i < n {
            let v = col[sorted[i]];
            while i < n && col[sorted[i]] == v {
                let r = sorted[i];
                let w = ctx.sample_w[r];
                cnt_l += 1;
                w_l += w;
                wpos_l += w * f64::from(ctx.target[r]);
                for (k, &c) in ctx.pa_cols.iter().enumerate() {
                    wpos_pa_l[k] += w * ctx.columns[c][r];
                }
                i += 1;
            }
            if i == n {
                break;
            }
            if cnt_l < ctx.min_samples_leaf || n - cnt_l < ctx.min_samples_leaf {
                continue;
            }
            let next = col[sorted[i]];
            let mut threshold = (v + next) / 2.0;
            // The midpoint of two adjacent floats can round onto `next`,
            // which would drag the next group into the left child; fall
            // back to `v`, which encodes the same partition under `<=`.
            if !(threshold >= v && threshold < next) {
                threshold = v;
            }
            let w_r = w_total - w_l;
            let igc = gain_from_parts(parent_h, wpos_l, w_l, wpos_total - wpos_l, w_r);
            for k in 0..n_pa {
                igs[k] = gain_from_parts(
                    parent_h_pa[k],
                    wpos_pa_l[k],
                    w_l,
                    wpos_pa_total[k] - wpos_pa_l[k],
                    w_r,
                );
            }
            let penalty: f64 = ctx.igs_weights.iter().zip(&igs).map(|(w, g)| w * g).sum();
            let score = ctx.igc_weight * igc - penalty;
            if score.is_finite() && best.is_none_or(|(b, _, _)| score > b) {
                best = Some((score, feature, threshold));
            }
        }
    }
    best
}

impl FairTree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn weights(&self) -> &WeightConfig {
        &self.weights
    }

    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }

    /// Predict a label for a row given in the tree's feature order.
    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        if row.len() != self.feature_names.len() {
            return Err(Error::Usage(format!(
                "row has {} values but the tree expects {} features",
                row.len(),
                self.feature_names.len()
            )));
        }
        Ok(self.route(row).0)
    }

    /// Predict every row of a dataset, aligning features by name.
    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<u8>> {
        crate::metrics::predict_dataset(self, d)
    }

    /// (label, positive_fraction) of the leaf this row lands in.
    pub fn route(&self, row: &[f64]) -> (u8, f64) {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf {
                    label,
                    positive_fraction,
                    ..
                } => return (*label, *positive_fraction),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }

    /// Sum of leaf `n` values; equals the training row count.
    pub fn leaf_row_total(&self) -> usize {
        fn total(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { n, .. } => *n,
                TreeNode::Internal { left, right, .. } => total(left) + total(right),
            }
        }
        total(&self.root)
    }

    /// Number of internal nodes splitting on the named feature.
    pub fn splits_on(&self, feature_name: &str) -> usize {
        let Some(idx) = self.feature_names.iter().position(|n| n == feature_name) else {
            return 0;
        };
        fn count(node: &TreeNode, idx: usize) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal {
                    feature,
                    left,
                    right,
                    ..
                } => usize::from(*feature == idx) + count(left, idx) + count(right, idx),
            }
        }
        count(&self.root, idx)
    }

    /// Largest |stored gain - recomputed score| over all internal nodes,
    /// recomputing each score from the node's training-row partition. Used
    /// to validate the score-decomposition invariant.
    pub fn max_gain_discrepancy(
        &self,
        train: &Dataset,
        sample_weights: Option<&[f64]>,
    ) -> Result<f64> {
        let pa_cols = self
            .weights
            .igs_weights()
            .iter()
            .map(|(name, _)| train.feature_index(name))
            .collect::<Result<Vec<usize>>>()?;
        let w = match sample_weights {
            Some(w) => w.to_vec(),
            None => vec![1.0; train.row_count()],
        };
        let rows: Vec<usize> = (0..train.row_count()).collect();
        fn walk(
            node: &TreeNode,
            rows: &[usize],
            train: &Dataset,
            w: &[f64],
            pa_cols: &[usize],
            cfg: &WeightConfig,
            worst: &mut f64,
        ) {
            let TreeNode::Internal {
                feature,
                threshold,
                gain,
                left,
                right,
            } = node
            else {
                return;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .copied()
                .partition(|&i| train.columns()[*feature][i] <= *threshold);
            let part = |rows: &[usize], col: Option<usize>| -> (f64, f64) {
                let mut wt = 0.0;
                let mut wpos = 0.0;
                for &i in rows {
                    wt += w[i];
                    wpos += w[i]
                        * match col {
                            Some(c) => train.columns()[c][i],
                            None => f64::from(train.target()[i]),
                        };
                }
                (wt, wpos)
            };
            let (wp, posp) = part(rows, None);
            let (wl, posl) = part(&l, None);
            let igc = gain_from_parts(binary_entropy(posp / wp), posl, wl, posp - posl, wp - wl);
            let igs: Vec<f64> = pa_cols
                .iter()
                .map(|&c| {
                    let (_, pa_p) = part(rows, Some(c));
                    let (_, pa_l) = part(&l, Some(c));
                    gain_from_parts(binary_entropy(pa_p / wp), pa_l, wl, pa_p - pa_l, wp - wl)
                })
                .collect();
            let recomputed = cfg.score(igc, &igs);
            *worst = worst.max((recomputed - gain).abs());
            walk(left, &l, train, w, pa_cols, cfg, worst);
            walk(right, &r, train, w, pa_cols, cfg, worst);
        }
        let mut worst = 0.0;
        walk(
            &self.root,
            &rows,
            train,
            &w,
            &pa_cols,
            &self.weights,
            &mut worst,
        );
        Ok(worst)
    }

    /// One node per line, two-space indentation per depth, left child first.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        fn emit(node: &TreeNode, names: &[String], depth: usize, out: &mut String) {
            for _ in 0..depth {
                out.push_str("  ");
            }
            match node {
                TreeNode::Leaf {
                    label,
                    positive_fraction,
                    n,
                } => {
                    writeln!(out, "leaf {label} fraction {positive_fraction} n {n}").unwrap();
                }
                TreeNode::Internal {
                    feature,
                    threshold,
                    gain,
                    left,
                    right,
                } => {
                    writeln!(out, "split {} <= {threshold} gain {gain}", names[*feature]).unwrap();
                    emit(left, names, depth + 1, out);
                    emit(right, names, depth + 1, out);
                }
            }
        }
        emit(&self.root, &self.feature_names, 0, &mut out);
        out
    }

    /// Rebuild a tree from its `serialize` output plus the surrounding
    /// context a model bundle carries.
    pub fn parse(
        text: &str,
        feature_names: Vec<String>,
        weights: WeightConfig,
        hyper: Hyper,
    ) -> Result<FairTree> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let indent = l.len() - l.trim_start().len();
                if indent % 2 != 0 {
                    return Err(Error::Data(format!("odd indentation in tree line {l:?}")));
                }
                Ok((indent / 2, l.trim()))
            })
            .collect::<Result<Vec<_>>>()?;
        if lines.is_empty() {
            return Err(Error::Data("empty tree serialization".into()));
        }
        let mut pos = 0usize;
        let root = parse_node(&lines, &mut pos, 0, &feature_names)?;
        if pos != lines.len() {
            return Err(Error::Data("trailing lines after tree root".into()));
        }
        Ok(FairTree {
            root,
            feature_names,
            weights,
            hyper,
        })
    }
}

fn parse_node(
    lines: &[(usize, &str)],
    pos: &mut usize,
    depth: usize,
    names: &[String],
) -> Result<TreeNode> {
    let Some(&(indent, line)) = lines.get(*pos) else {
        return Err(Error::Data("unexpected end of tree serialization".into()));
    };
    if indent != depth {
        return Err(Error::Data(format!(
            "bad indentation at tree line {line:?}"
        )));
    }
    *pos += 1;
    let bad = |l: &str| Error::Data(format!("malformed tree line {l:?}"));
    let tokens: Vec<&str> = line.split(' ').collect();
    match tokens.as_slice() {
        ["leaf", label, "fraction", fraction, "n", n] => Ok(TreeNode::Leaf {
            label: label.parse().map_err(|_| bad(line))?,
            positive_fraction: fraction.parse().map_err(|_| bad(line))?,
            n: n.parse().map_err(|_| bad(line))?,
        }),
        ["split", feature, "<=", threshold, "gain", gain] => {
            let feature = names
                .iter()
                .position(|n| n == feature)
                .ok_or_else(|| Error::Data(format!("tree references unknown feature {feature}")))?;
            let threshold: f64 = threshold.parse().map_err(|_| bad(line))?;
            let gain: f64 = gain.parse().map_err(|_| bad(line))?;
            let left = parse_node(lines, pos, depth + 1, names)?;
            let right = parse_node(lines, pos, depth + 1, names)?;
            Ok(TreeNode::Internal {
                feature,
                threshold,
                gain,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        _ => Err(bad(line)),
    }
}

impl Predictor for FairTree {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> u8 {
        self.route(row).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_synthetic_biased, Dataset, ProtectedSpec};

    fn dataset(
        names: &[&str],
        columns: Vec<Vec<f64>>,
        target: Vec<u8>,
        protected: &[&str],
    ) -> Dataset {
        Dataset::new(
            names.iter().map(|s| s.to_string()).collect(),
            columns,
            target,
            "y".into(),
            protected
                .iter()
                .map(|p| ProtectedSpec::canonical(p))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1, 1, 1, 1]).unwrap(), 0.0);
        assert_eq!(entropy(&[0, 1]).unwrap(), 1.0);
        let h = entropy(&[1, 1, 1, 0]).unwrap();
        assert!((h - 0.8112781244591328).abs() < 1e-15, "{h}");
        assert!(entropy(&[]).is_err());
    }

    #[test]
    fn info_gain_examples() {
        assert_eq!(info_gain(&[0, 0, 1, 1], &[0, 0], &[1, 1]).unwrap(), 1.0);
        assert_eq!(info_gain(&[0, 1, 0, 1], &[0, 1], &[0, 1]).unwrap(), 0.0);
        let g = info_gain(&[1, 1, 1, 0], &[1, 1], &[1, 0]).unwrap();
        assert!((g - 0.3112781244591328).abs() < 1e-15, "{g}");
        assert!(info_gain(&[1, 0], &[], &[1, 0]).is_err());
    }

    #[test]
    fn split_score_examples() {
        let cart = WeightConfig::cart();
        assert_eq!(cart.score(0.42, &[]), 0.42);

        let pure_igs = WeightConfig::new(0.0, vec![("pa".into(), 1.0)]).unwrap();
        assert_eq!(pure_igs.score(0.7, &[1.0]), -1.0);

        let half = WeightConfig::new(0.5, vec![("pa".into(), 0.5)]).unwrap();
        assert!((half.score(0.31, &[0.12]) - 0.095).abs() < 1e-15);
    }

    #[test]
    fn weights_normalize_to_one() {
        let w = WeightConfig::new(3.0, vec![("a".into(), 1.0), ("b".into(), 1.0)]).unwrap();
        assert!((w.igc_weight() - 0.6).abs() < 1e-15);
        assert!((w.total_igs() - 0.4).abs() < 1e-15);
        assert!(WeightConfig::new(-1.0, vec![]).is_err());
        assert!(WeightConfig::new(0.0, vec![]).is_err());
    }

    #[test]
    fn pure_target_yields_single_leaf() {
        let d = dataset(
            &["x"],
            vec![vec![1.0, 2.0, 3.0, 4.0]],
            vec![1, 1, 1, 1],
            &[],
        );
        let t = fit(
            &d,
            &WeightConfig::cart(),
            &Hyper {
                min_samples_leaf: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            t.root(),
            &TreeNode::Leaf {
                label: 1,
                positive_fraction: 1.0,
                n: 4
            }
        );
    }

    #[test]
    fn boundary_value_routes_left() {
        let d = dataset(
            &["x"],
            vec![vec![0.0, 0.25, 0.75, 1.0]],
            vec![0, 0, 1, 1],
            &[],
        );
        let hyper = Hyper {
            min_samples_leaf: 1,
            ..Default::default()
        };
        let t = fit(&d, &WeightConfig::cart(), &hyper).unwrap();
        match t.root() {
            TreeNode::Internal { threshold, .. } => assert_eq!(*threshold, 0.5),
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.predict(&[0.3]).unwrap(), 0);
        assert_eq!(t.predict(&[0.5]).unwrap(), 0); // exactly at threshold: left
        assert_eq!(t.predict(&[0.51]).unwrap(), 1);
        assert!(t.predict(&[0.5, 1.0]).is_err());
    }

    /// Independent exhaustive scorer for the root split of a tiny dataset.
    fn brute_force_root(d: &Dataset, cfg: &WeightConfig, min_leaf: usize) -> (f64, usize, f64) {
        let target = d.target();
        let pa_cols: Vec<usize> = cfg
            .igs_weights()
            .iter()
            .map(|(n, _)| d.feature_index(n).unwrap())
            .collect();
        let mut best: Option<(f64, usize, f64)> = None;
        for (j, col) in d.columns().iter().enumerate() {
            let mut vals: Vec<f64> = col.clone();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            for w in vals.windows(2) {
                let thr = (w[0] + w[1]) / 2.0;
                let left: Vec<usize> = (0..d.row_count()).filter(|&i| col[i] <= thr).collect();
                let right: Vec<usize> = (0..d.row_count()).filter(|&i| col[i] > thr).collect();
                if left.len() < min_leaf || right.len() < min_leaf {
                    continue;
                }
                let lab = |rows: &[usize]| rows.iter().map(|&i| target[i]).collect::<Vec<u8>>();
                let igc = info_gain(target, &lab(&left), &lab(&right)).unwrap();
                let igs: Vec<f64> = pa_cols
                    .iter()
                    .map(|&c| {
                        let bin = |rows: &[usize]| {
                            rows.iter()
                                .map(|&i| d.columns()[c][i] as u8)
                                .collect::<Vec<u8>>()
                        };
                        let all: Vec<u8> = d.columns()[c].iter().map(|&v| v as u8).collect();
                        info_gain(&all, &bin(&left), &bin(&right)).unwrap()
                    })
                    .collect();
                let score = cfg.score(igc, &igs);
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, j, thr));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn igs_weight_steers_root_away_from_protected_attribute() {
        // The protected attribute coincides with the label, so it is the
        // single most class-informative feature.
        let d = dataset(
            &["pa", "x"],
            vec![
                vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
                vec![0.1, 0.4, 0.2, 0.9, 0.3, 0.8, 0.7, 0.6],
            ],
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            &["pa"],
        );
        let hyper = Hyper {
            max_depth: 3,
            min_samples_leaf: 1,
            min_gain: None,
        };

        let cart = fit(&d, &WeightConfig::single("pa", 0.0).unwrap(), &hyper).unwrap();
        let (_, feat, _) = brute_force_root(&d, &WeightConfig::cart(), 1);
        assert_eq!(feat, 0, "oracle: plain IG picks the protected attribute");
        match cart.root() {
            TreeNode::Internal { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected split, got {other:?}"),
        }

        let fair_cfg = WeightConfig::new(0.2, vec![("pa".into(), 0.8)]).unwrap();
        let fair = fit(&d, &fair_cfg, &hyper).unwrap();
        let (_, fair_feat, fair_thr) = brute_force_root(&d, &fair_cfg, 1);
        assert_ne!(
            fair_feat, 0,
            "oracle: penalized criterion avoids the protected attribute"
        );
        match fair.root() {
            TreeNode::Internal {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, fair_feat);
                assert_eq!(*threshold, fair_thr);
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn explicit_zero_igs_weight_behaves_like_cart() {
        let d = make_synthetic_biased(300, 0.4, 21).unwrap();
        let zero_igs = WeightConfig::new(1.0, vec![("group".into(), 0.0)]).unwrap();
        let a = fit(&d, &zero_igs, &Hyper::default()).unwrap();
        let b = fit(&d, &WeightConfig::cart(), &Hyper::default()).unwrap();
        assert_eq!(a.root(), b.root());
    }

    #[test]
    fn fit_is_deterministic_and_covers_all_rows() {
        let d = make_synthetic_biased(300, 0.4, 5).unwrap();
        let cfg = WeightConfig::single("group", 0.5).unwrap();
        let a = fit(&d, &cfg, &Hyper::default()).unwrap();
        let b = fit(&d, &cfg, &Hyper::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.leaf_row_total(), 300);
        assert!(a.depth() <= 8);
    }

    #[test]
    fn stored_gains_match_recomputation() {
        let d = make_synthetic_biased(300, 0.4, 9).unwrap();
        for lambda in [0.0, 0.3, 0.7] {
            let cfg = WeightConfig::single("group", lambda).unwrap();
            let t = fit(&d, &cfg, &Hyper::default()).unwrap();
            let err = t.max_gain_discrepancy(&d, None).unwrap();
            assert!(err < 1e-12, "lambda {lambda}: gain discrepancy {err}");
        }
    }

    #[test]
    fn weighted_fit_matches_recomputation_too() {
        let d = make_synthetic_biased(200, 0.4, 13).unwrap();
        let w: Vec<f64> = (0..200).map(|i| 1.0 + (i % 7) as f64 / 3.0).collect();
        let cfg = WeightConfig::single("group", 0.4).unwrap();
        let t = fit_weighted(&d, &cfg, &Hyper::default(), Some(&w)).unwrap();
        let err = t.max_gain_discrepancy(&d, Some(&w)).unwrap();
        assert!(err < 1e-12, "gain discrepancy {err}");
    }

    #[test]
    fn sample_weights_steer_the_fit() {
        // Two contradictory blocks: rows 0..8 say "x <= 0.5 means 0",
        // rows 8..16 say the opposite. Whichever block carries the weight
        // decides the leaf labels.
        let x: Vec<f64> = (0..16).map(|i| f64::from(i % 2)).collect();
        let target: Vec<u8> = (0..16).map(|i| ((i % 2) ^ (i / 8)) as u8).collect();
        let d = dataset(&["x"], vec![x], target, &[]);
        let hyper = Hyper { max_depth: 1, min_samples_leaf: 1, min_gain: None };

        let favor_first: Vec<f64> = (0..16).map(|i| if i < 8 { 10.0 } else { 0.1 }).collect();
        let favor_second: Vec<f64> = (0..16).map(|i| if i < 8 { 0.1 } else { 10.0 }).collect();
        let a = fit_weighted(&d, &WeightConfig::cart(), &hyper, Some(&favor_first)).unwrap();
        let b = fit_weighted(&d, &WeightConfig::cart(), &hyper, Some(&favor_second)).unwrap();
        let leaf_labels = |t: &FairTree| match t.root() {
            TreeNode::Internal { left, right, .. } => match (left.as_ref(), right.as_ref()) {
                (TreeNode::Leaf { label: l, .. }, TreeNode::Leaf { label: r, .. }) => (*l, *r),
                other => panic!("expected two leaves, got {other:?}"),
            },
            other => panic!("expected a split, got {other:?}"),
        };
        assert_eq!(leaf_labels(&a), (0, 1));
        assert_eq!(leaf_labels(&b), (1, 0));
    }

    #[test]
    fn pa_splits_decline_as_igs_weight_grows() {
        // Statistical check: median over seeds of the number of splits on
        // the protected attribute must be non-increasing in lambda.
        let lambdas = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut medians = Vec::new();
        for &lambda in &lambdas {
            let cfg = WeightConfig::single("group", lambda).unwrap();
            let mut counts: Vec<usize> = (0..20)
                .map(|seed| {
                    let d = make_synthetic_biased(600, 0.4, seed).unwrap();
                    fit(&d, &cfg, &Hyper::default()).unwrap().splits_on("group")
                })
                .collect();
            counts.sort_unstable();
            medians.push((counts[9] + counts[10]) as f64 / 2.0);
        }
        assert!(
            medians[0] > 0.0,
            "plain CART should use the protected attribute: {medians:?}"
        );
        for w in medians.windows(2) {
            assert!(w[1] <= w[0], "medians not non-increasing: {medians:?}");
        }
    }

    #[test]
    fn adjacent_float_values_still_split_cleanly() {
        // Consecutive representable values: the naive midpoint may round
        // onto the upper value. The split must still put exactly the lower
        // group left and keep both children populated.
        let lo = f64::from_bits(1.0f64.to_bits() + 1);
        let hi = f64::from_bits(1.0f64.to_bits() + 2);
        let d = dataset(
            &["x"],
            vec![vec![lo, lo, hi, hi]],
            vec![0, 0, 1, 1],
            &[],
        );
        let hyper = Hyper { max_depth: 2, min_samples_leaf: 1, min_gain: None };
        let t = fit(&d, &WeightConfig::cart(), &hyper).unwrap();
        match t.root() {
            TreeNode::Internal { threshold, gain, left, right, .. } => {
                assert!(*threshold >= lo && *threshold < hi, "threshold {threshold:?}");
                assert_eq!(*gain, 1.0);
                assert_eq!(left.as_ref(), &TreeNode::Leaf { label: 0, positive_fraction: 0.0, n: 2 });
                assert_eq!(right.as_ref(), &TreeNode::Leaf { label: 1, positive_fraction: 1.0, n: 2 });
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.leaf_row_total(), 4);
        assert_eq!(t.predict(&[lo]).unwrap(), 0);
        assert_eq!(t.predict(&[hi]).unwrap(), 1);
    }

    #[test]
    fn serialization_round_trips_and_matches_golden() {
        let d = dataset(
            &["x", "z"],
            vec![vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 1.0, 0.0, 1.0]],
            vec![0, 0, 1, 1],
            &[],
        );
        let hyper = Hyper {
            max_depth: 2,
            min_samples_leaf: 1,
            min_gain: None,
        };
        let t = fit(&d, &WeightConfig::cart(), &hyper).unwrap();
        let text = t.serialize();
        assert_eq!(
            text,
            "split x <= 0.5 gain 1\n  leaf 0 fraction 0 n 2\n  leaf 1 fraction 1 n 2\n"
        );
        let back = FairTree::parse(
            &text,
            t.feature_names.clone(),
            t.weights.clone(),
            t.hyper.clone(),
        )
        .unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn parse_rejects_unknown_features_and_bad_lines() {
        let names = vec!["x".to_string()];
        let err = FairTree::parse(
            "split q <= 0.5 gain 1\n  leaf 0 fraction 0 n 1\n  leaf 1 fraction 1 n 1\n",
            names.clone(),
            WeightConfig::cart(),
            Hyper::default(),
        );
        assert!(err.is_err());
        let err = FairTree::parse(
            "leaf banana\n",
            names,
            WeightConfig::cart(),
            Hyper::default(),
        );
        assert!(err.is_err());
    }
}
