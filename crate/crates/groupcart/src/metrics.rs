//! Performance metrics, group-fairness metrics and the situation-testing
//! flip rate.
//!
//! Conventions: label 1 is the positive/favorable class; rates with a 0/0
//! denominator evaluate to 0; group metrics are reported as absolute values
//! so that smaller is always better.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::Predictor;

/// Binary confusion counts with label 1 as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }

    /// TP / (TP + FN); 0 when no positives exist.
    pub fn tpr(&self) -> f64 {
        rate(self.true_pos, self.true_pos + self.false_neg)
    }

    /// FP / (FP + TN); 0 when no negatives exist.
    pub fn fpr(&self) -> f64 {
        rate(self.false_pos, self.false_pos + self.true_neg)
    }

    /// Count of favorable (positive) predictions.
    pub fn favorable_predictions(&self) -> usize {
        self.true_pos + self.false_pos
    }

    /// P(prediction = 1) within this group.
    pub fn favorable_rate(&self) -> f64 {
        rate(self.favorable_predictions(), self.total())
    }
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-group confusion matrices for one protected attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOutcomes {
    pub privileged: ConfusionMatrix,
    pub unprivileged: ConfusionMatrix,
}

/// Group-fairness scores; all absolute, ideal value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupFairness {
    pub aod: f64,
    pub eod: f64,
    pub spd: f64,
    pub di_deviation: f64,
}

/// Count TP/TN/FP/FN over paired label vectors.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Usage(format!(
            "label length mismatch: {} true vs {} predicted",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Usage(
            "cannot build a confusion matrix from no labels".into(),
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_pos += 1,
            (0, 0) => cm.true_neg += 1,
            (0, 1) => cm.false_pos += 1,
            (1, 0) => cm.false_neg += 1,
            _ => {
                return Err(Error::Usage(format!(
                    "labels must be 0 or 1, got ({t}, {p})"
                )))
            }
        }
    }
    Ok(cm)
}

/// (accuracy, precision, recall, f1) with the 0/0 -> 0 convention.
pub fn performance(cm: &ConfusionMatrix) -> (f64, f64, f64, f64) {
    let accuracy = rate(cm.true_pos + cm.true_neg, cm.total());
    let precision = rate(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = cm.tpr();
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (accuracy, precision, recall, f1)
}

/// AOD, EOD, SPD and the disparate-impact deviation for one protected
/// attribute.
///
/// AOD = |((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2|, EOD = |TPR_u - TPR_p|,
/// SPD = |P(pred=1|unpriv) - P(pred=1|priv)| and
/// di_deviation = |1 - P(pred=1|unpriv)/P(pred=1|priv)|, with 0/0 -> 0 and
/// a worst-case 1 when only the privileged rate is zero.
pub fn group_fairness(g: &GroupOutcomes) -> Result<GroupFairness> {
    if g.privileged.total() == 0 || g.unprivileged.total() == 0 {
        return Err(Error::Data(
            "empty protected group; fairness metrics undefined".into(),
        ));
    }
    let tpr_diff = g.unprivileged.tpr() - g.privileged.tpr();
    let fpr_diff = g.unprivileged.fpr() - g.privileged.fpr();
    let p_unpriv = g.unprivileged.favorable_rate();
    let p_priv = g.privileged.favorable_rate();
    let di_deviation = if p_priv == 0.0 {
        if p_unpriv == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        (1.0 - p_unpriv / p_priv).abs()
    };
    Ok(GroupFairness {
        aod: ((fpr_diff + tpr_diff) / 2.0).abs(),
        eod: tpr_diff.abs(),
        spd: (p_unpriv - p_priv).abs(),
        di_deviation,
    })
}

/// Split predictions by group membership and count per-group confusions.
pub fn group_outcomes(y_true: &[u8], y_pred: &[u8], group: &[f64]) -> Result<GroupOutcomes> {
    if y_true.len() != group.len() {
        return Err(Error::Usage("group column length mismatch".into()));
    }
    let mut privileged = ConfusionMatrix::default();
    let mut unprivileged = ConfusionMatrix::default();
    for i in 0..y_true.len() {
        let cm = if group[i] == 1.0 {
            &mut privileged
        } else {
            &mut unprivileged
        };
        match (y_true[i], y_pred[i]) {
            (1, 1) => cm.true_pos += 1,
            (0, 0) => cm.true_neg += 1,
            (0, 1) => cm.false_pos += 1,
            (1, 0) => cm.false_neg += 1,
            (t, p) => {
                return Err(Error::Usage(format!(
                    "labels must be 0 or 1, got ({t}, {p})"
                )))
            }
        }
    }
    Ok(GroupOutcomes {
        privileged,
        unprivileged,
    })
}

/// Situation-testing flip rate: the fraction of test rows whose prediction
/// changes when the protected attribute is flipped to its complement.
pub fn flip_rate(model: &dyn Predictor, test: &Dataset, pa: &str) -> Result<f64> {
    let mapping = test.column_indices_for(model.feature_names())?;
    let pa_col = test.feature_index(pa).map_err(|_| {
        Error::Usage(format!(
            "protected attribute {pa} is not a feature of the test data"
        ))
    })?;
    if test.columns()[pa_col].iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Data(format!("protected column {pa} is not binary")));
    }
    let pa_pos = mapping.iter().position(|&c| c == pa_col);
    let mut row = vec![0.0; mapping.len()];
    let mut flipped = 0usize;
    for i in 0..test.row_count() {
        for (k, &c) in mapping.iter().enumerate() {
            row[k] = test.columns()[c][i];
        }
        let original = model.predict_row(&row);
        let counterfactual = match pa_pos {
            Some(p) => {
                row[p] = 1.0 - row[p];
                model.predict_row(&row)
            }
            // The model never sees the attribute, so the prediction is
            // constant in it.
            None => original,
        };
        if counterfactual != original {
            flipped += 1;
        }
    }
    Ok(flipped as f64 / test.row_count() as f64)
}

/// Fairness block of a report, one per protected attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct PaReport {
    pub attribute: String,
    pub aod: f64,
    pub eod: f64,
    pub spd: f64,
    pub di_deviation: f64,
    pub flip_rate: f64,
}

/// The nine-metric evaluation of one model on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fairness: Vec<PaReport>,
}

impl MetricReport {
    /// Evaluate `model` on `test`: predictions, performance, and per
    /// protected attribute the group metrics plus the flip rate.
    pub fn compute(model: &dyn Predictor, test: &Dataset) -> Result<MetricReport> {
        let y_pred = predict_dataset(model, test)?;
        let cm = confusion(test.target(), &y_pred)?;
        let (accuracy, precision, recall, f1) = performance(&cm);
        let mut fairness = Vec::new();
        for spec in test.protected() {
            let outcomes = group_outcomes(test.target(), &y_pred, test.column(&spec.name)?)?;
            let gf = group_fairness(&outcomes)?;
            fairness.push(PaReport {
                attribute: spec.name.clone(),
                aod: gf.aod,
                eod: gf.eod,
                spd: gf.spd,
                di_deviation: gf.di_deviation,
                flip_rate: flip_rate(model, test, &spec.name)?,
            });
        }
        Ok(MetricReport {
            accuracy,
            precision,
            recall,
            f1,
            fairness,
        })
    }

    pub fn pa(&self, name: &str) -> Option<&PaReport> {
        self.fairness.iter().find(|p| p.attribute == name)
    }

    /// Metric by report name; fairness metrics are addressed as
    /// `"<metric>:<attribute>"` (for example `"aod:sex"`).
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "accuracy" => return Some(self.accuracy),
            "precision" => return Some(self.precision),
            "recall" => return Some(self.recall),
            "f1" => return Some(self.f1),
            _ => {}
        }
        let (metric, attr) = name.split_once(':')?;
        let pa = self.pa(attr)?;
        match metric {
            "aod" => Some(pa.aod),
            "eod" => Some(pa.eod),
            "spd" => Some(pa.spd),
            "di_deviation" => Some(pa.di_deviation),
            "flip_rate" => Some(pa.flip_rate),
            _ => None,
        }
    }
}

/// Predict every row of `d`, aligning the model schema by feature name.
pub fn predict_dataset(model: &dyn Predictor, d: &Dataset) -> Result<Vec<u8>> {
    let mapping = d.column_indices_for(model.feature_names())?;
    let mut row = vec![0.0; mapping.len()];
    let mut out = Vec::with_capacity(d.row_count());
    for i in 0..d.row_count() {
        for (k, &c) in mapping.iter().enumerate() {
            row[k] = d.columns()[c][i];
        }
        out.push(model.predict_row(&row));
    }
    Ok(out)
}
