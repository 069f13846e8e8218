//! Statistical ranking of repeated-trial results: Scott-Knott clustering
//! with a Cliff's-delta effect-size gate.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::moo::Direction;

/// Effect sizes below this are "small"; proposed splits that do not reach
/// it are rejected and the treatments share a rank.
pub const SMALL_EFFECT: f64 = 0.147;

/// One treatment's results across repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub method_name: String,
    pub values: Vec<f64>,
}

impl TrialSeries {
    pub fn new(method_name: &str, values: Vec<f64>) -> Self {
        TrialSeries {
            method_name: method_name.to_string(),
            values,
        }
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Method-to-rank assignment; rank 1 is best for the stated direction and
/// methods in the same cluster share a rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub ranks: BTreeMap<String, usize>,
    pub direction: Direction,
}

impl RankTable {
    pub fn rank(&self, method: &str) -> Option<usize> {
        self.ranks.get(method).copied()
    }
}

/// Cliff's delta: the probability that a value of `a` exceeds one of `b`,
/// minus the reverse probability.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage(
            "Cliff's delta needs two non-empty lists".into(),
        ));
    }
    let mut greater = 0i64;
    let mut less = 0i64;
    for &x in a {
        for &y in b {
            if x > y {
                greater += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    Ok((greater - less) as f64 / (a.len() * b.len()) as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn pooled(list: &[&TrialSeries]) -> Vec<f64> {
    list.iter().flat_map(|s| s.values.iter().copied()).collect()
}

/// Expected difference of means created by cutting the sorted list after
/// `cut` treatments, on pooled values.
fn split_objective(l1: &[f64], l2: &[f64]) -> f64 {
    let all_n = (l1.len() + l2.len()) as f64;
    let e_all = (l1.iter().sum::<f64>() + l2.iter().sum::<f64>()) / all_n;
    let d1 = mean(l1) - e_all;
    let d2 = mean(l2) - e_all;
    (l1.len() as f64 / all_n) * d1 * d1 + (l2.len() as f64 / all_n) * d2 * d2
}

fn cluster<'a>(list: &[&'a TrialSeries], out: &mut Vec<Vec<&'a TrialSeries>>) {
    if list.len() <= 1 {
        out.push(list.to_vec());
        return;
    }
    let mut best: Option<(f64, usize)> = None;
    for cut in 1..list.len() {
        let l1 = pooled(&list[..cut]);
        let l2 = pooled(&list[cut..]);
        let e = split_objective(&l1, &l2);
        if best.is_none_or(|(b, _)| e > b) {
            best = Some((e, cut));
        }
    }
    let (_, cut) = best.expect("at least one cut");
    let l1 = pooled(&list[..cut]);
    let l2 = pooled(&list[cut..]);
    let delta = cliffs_delta(&l1, &l2).expect("pooled halves are non-empty");
    if delta.abs() >= SMALL_EFFECT {
        cluster(&list[..cut], out);
        cluster(&list[cut..], out);
    } else {
        out.push(list.to_vec());
    }
}

/// Scott-Knott ranking: sort treatments by median, recursively split at the
/// cut maximizing the expected difference of means, accept a split only
/// when the pooled halves differ by at least a small Cliff's-delta effect.
pub fn scott_knott(series: &[TrialSeries], direction: Direction) -> Result<RankTable> {
    if series.is_empty() {
        return Err(Error::Usage("Scott-Knott needs at least one series".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for s in series {
        if s.values.len() < 2 {
            return Err(Error::Usage(format!(
                "series {} has {} values; need at least 2 per treatment",
                s.method_name,
                s.values.len()
            )));
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage(format!(
                "series {} contains non-finite values",
                s.method_name
            )));
        }
        if !names.insert(s.method_name.clone()) {
            return Err(Error::Usage(format!(
                "duplicate series name {}",
                s.method_name
            )));
        }
    }

    // Canonical order: by median, ties broken by name, so the ranking is
    // invariant under permutations of the input.
    let mut sorted: Vec<&TrialSeries> = series.iter().collect();
    sorted.sort_by(|a, b| {
        a.median()
            .partial_cmp(&b.median())
            .expect("finite medians")
            .then_with(|| a.method_name.cmp(&b.method_name))
    });

    let mut clusters: Vec<Vec<&TrialSeries>> = Vec::new();
    cluster(&sorted, &mut clusters);

    // Clusters come out in ascending value order; rank 1 is the best end.
    let k = clusters.len();
    let mut ranks = BTreeMap::new();
    for (i, members) in clusters.iter().enumerate() {
        let rank = match direction {
            Direction::Maximize => k - i,
            Direction::Minimize => i + 1,
        };
        for s in members {
            ranks.insert(s.method_name.clone(), rank);
        }
    }
    Ok(RankTable { ranks, direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cliffs_delta_examples() {
        assert_eq!(
            cliffs_delta(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(
            cliffs_delta(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0
        );
        // Pairs: (1,2)<, (1,4)<, (3,2)>, (3,4)< => (1 - 3) / 4.
        assert_eq!(cliffs_delta(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), -0.5);
        assert!(cliffs_delta(&[], &[1.0]).is_err());
    }

    #[test]
    fn identical_series_share_rank_one() {
        let s = vec![
            TrialSeries::new("a", vec![0.5, 0.6, 0.4, 0.5]),
            TrialSeries::new("b", vec![0.5, 0.6, 0.4, 0.5]),
        ];
        let table = scott_knott(&s, Direction::Maximize).unwrap();
        assert_eq!(table.rank("a"), Some(1));
        assert_eq!(table.rank("b"), Some(1));
    }

    #[test]
    fn separated_series_get_distinct_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let jitter = |center: f64, rng: &mut ChaCha8Rng| {
            (0..20)
                .map(|_| center + ((rng.next_u64() % 1000) as f64 / 1000.0 - 0.5) * 0.04)
                .collect::<Vec<f64>>()
        };
        let high = TrialSeries::new("high", jitter(0.9, &mut rng));
        let low = TrialSeries::new("low", jitter(0.1, &mut rng));
        // The fixture is valid only if the pooled effect is genuinely large.
        assert!(cliffs_delta(&high.values, &low.values).unwrap().abs() >= SMALL_EFFECT);

        let table = scott_knott(&[low.clone(), high.clone()], Direction::Maximize).unwrap();
        assert_eq!(table.rank("high"), Some(1));
        assert_eq!(table.rank("low"), Some(2));

        let table = scott_knott(&[low, high], Direction::Minimize).unwrap();
        assert_eq!(table.rank("low"), Some(1));
        assert_eq!(table.rank("high"), Some(2));
    }

    #[test]
    fn single_series_ranks_first() {
        let s = vec![TrialSeries::new("only", vec![1.0, 2.0])];
        let table = scott_knott(&s, Direction::Maximize).unwrap();
        assert_eq!(table.rank("only"), Some(1));
    }

    #[test]
    fn shuffling_input_never_changes_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let series: Vec<TrialSeries> = (0..5)
            .map(|i| {
                let center = 0.2 + 0.15 * i as f64;
                TrialSeries::new(
                    &format!("m{i}"),
                    (0..12)
                        .map(|_| center + ((rng.next_u64() % 100) as f64 / 100.0 - 0.5) * 0.05)
                        .collect(),
                )
            })
            .collect();
        let reference = scott_knott(&series, Direction::Maximize).unwrap();
        let mut shuffled = series.clone();
        for round in 0..50 {
            let k = shuffled.len();
            shuffled.swap(round % k, (round * 7 + 3) % k);
            let table = scott_knott(&shuffled, Direction::Maximize).unwrap();
            assert_eq!(table, reference, "shuffle round {round}");
        }
    }

    #[test]
    fn all_small_effects_collapse_to_one_rank() {
        // Interleaved values: every pairwise delta is far below the gate.
        let s = vec![
            TrialSeries::new("a", vec![0.50, 0.52, 0.48, 0.51]),
            TrialSeries::new("b", vec![0.51, 0.49, 0.52, 0.50]),
            TrialSeries::new("c", vec![0.49, 0.51, 0.50, 0.52]),
        ];
        for pair in [("a", "b"), ("a", "c"), ("b", "c")] {
            let x = &s.iter().find(|t| t.method_name == pair.0).unwrap().values;
            let y = &s.iter().find(|t| t.method_name == pair.1).unwrap().values;
            assert!(cliffs_delta(x, y).unwrap().abs() < SMALL_EFFECT);
        }
        let table = scott_knott(&s, Direction::Maximize).unwrap();
        assert!(table.ranks.values().all(|&r| r == 1), "{table:?}");
    }

    #[test]
    fn large_constant_shift_promotes_a_series() {
        let base = vec![0.50, 0.52, 0.48, 0.51, 0.49, 0.53];
        let s = vec![
            TrialSeries::new("a", base.clone()),
            TrialSeries::new("b", base.clone()),
            TrialSeries::new("c", base.clone()),
        ];
        let before = scott_knott(&s, Direction::Maximize).unwrap();
        assert!(before.ranks.values().all(|&r| r == 1));

        let shifted = vec![
            TrialSeries::new("a", base.iter().map(|v| v + 0.3).collect()),
            s[1].clone(),
            s[2].clone(),
        ];
        let after = scott_knott(&shifted, Direction::Maximize).unwrap();
        assert_eq!(after.rank("a"), Some(1));
        assert!(after.rank("b").unwrap() > 1);
        assert!(after.rank("c").unwrap() > 1);
    }

    #[test]
    fn rejects_short_and_duplicate_series() {
        assert!(scott_knott(&[], Direction::Maximize).is_err());
        let short = vec![TrialSeries::new("a", vec![1.0])];
        assert!(scott_knott(&short, Direction::Maximize).is_err());
        let dup = vec![
            TrialSeries::new("a", vec![1.0, 2.0]),
            TrialSeries::new("a", vec![3.0, 4.0]),
        ];
        assert!(scott_knott(&dup, Direction::Maximize).is_err());
    }
}
