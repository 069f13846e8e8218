//! Multi-objective machinery: objective vectors, binary and continuous
//! domination, non-dominated sorting and distance-to-heaven scoring.
//!
//! Domination always works on minimization-form vectors where lower is
//! better; [`to_minimization`] converts raw metric values using each
//! objective's direction and ideal value.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Maximize => "maximize",
            Direction::Minimize => "minimize",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximize" | "max" => Ok(Direction::Maximize),
            "minimize" | "min" => Ok(Direction::Minimize),
            other => Err(Error::Config(format!("unknown direction {other:?}"))),
        }
    }
}

/// A named objective with its optimization direction and ideal value.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub name: String,
    pub direction: Direction,
    pub optimum: f64,
}

impl ObjectiveSpec {
    pub fn maximize(name: &str, optimum: f64) -> Self {
        ObjectiveSpec {
            name: name.to_string(),
            direction: Direction::Maximize,
            optimum,
        }
    }

    pub fn minimize(name: &str, optimum: f64) -> Self {
        ObjectiveSpec {
            name: name.to_string(),
            direction: Direction::Minimize,
            optimum,
        }
    }
}

/// Objective scores aligned with a shared list of [`ObjectiveSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A pool member awaiting non-dominated sorting.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub objectives: ObjectiveVector,
}

/// Convert raw objective values to minimization form: distance above the
/// optimum for minimized metrics, distance below it for maximized ones.
pub fn to_minimization(v: &ObjectiveVector, specs: &[ObjectiveSpec]) -> Result<ObjectiveVector> {
    if v.len() != specs.len() {
        return Err(Error::Usage(format!(
            "{} objective values for {} specs",
            v.len(),
            specs.len()
        )));
    }
    Ok(ObjectiveVector(
        v.values()
            .iter()
            .zip(specs)
            .map(|(&x, s)| match s.direction {
                Direction::Maximize => s.optimum - x,
                Direction::Minimize => x - s.optimum,
            })
            .collect(),
    ))
}

/// Binary (Pareto) domination over minimization-form vectors: `a` dominates
/// `b` iff it is no worse everywhere and strictly better somewhere.
pub fn binary_dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Usage(format!(
            "domination needs equal non-empty vectors, got lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dominates_unchecked(a.values(), b.values()))
}

fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Continuous-domination loss of `a` against `b` (both min-max normalized
/// to `[0,1]` over the candidate pool): mean over objectives of
/// `-exp(b_j - a_j)`. `a` continuously dominates `b` iff
/// `cdom_loss(a, b) < cdom_loss(b, a)`.
pub fn cdom_loss(a: &ObjectiveVector, b: &ObjectiveVector) -> f64 {
    assert_eq!(a.len(), b.len(), "cdom_loss on mismatched vectors");
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| -f64::exp(y - x))
        .sum();
    sum / a.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominationMode {
    Binary,
    Continuous,
}

/// Min-max normalize each objective over the pool; zero-range objectives
/// normalize to 0 for every candidate.
pub fn normalize_pool(vectors: &[&ObjectiveVector]) -> Vec<ObjectiveVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let k = vectors[0].len();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for v in vectors {
        for (j, &x) in v.values().iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    vectors
        .iter()
        .map(|v| {
            ObjectiveVector(
                v.values()
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        if hi[j] > lo[j] {
                            (x - lo[j]) / (hi[j] - lo[j])
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Indices of the non-dominated candidates, preserving input order.
///
/// Vectors must already be in minimization form. In continuous mode the
/// pool is min-max normalized first, as the loss definition requires.
///
/// Survivors are the candidates with the fewest dominators. Under binary
/// domination a zero-dominator candidate always exists, so this is exactly
/// the non-dominated subset. Continuous domination is not transitive and
/// can form cycles in which every candidate is dominated; the
/// least-dominated candidates then survive, keeping the frontier
/// non-empty.
pub fn nd_sort_indices(pool: &[Candidate], mode: DominationMode) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::Usage("non-dominated sort of an empty pool".into()));
    }
    let k = pool[0].objectives.len();
    if k == 0 || pool.iter().any(|c| c.objectives.len() != k) {
        return Err(Error::Usage(
            "candidates must share a non-empty objective length".into(),
        ));
    }
    let mut ids = std::collections::BTreeSet::new();
    for c in pool {
        if !ids.insert(c.id) {
            return Err(Error::Usage(format!("duplicate candidate id {}", c.id)));
        }
    }
    let normalized: Vec<ObjectiveVector>;
    let dominates: Box<dyn Fn(usize, usize) -> bool> = match mode {
        DominationMode::Binary => Box::new(|j: usize, i: usize| {
            dominates_unchecked(pool[j].objectives.values(), pool[i].objectives.values())
        }),
        DominationMode::Continuous => {
            let refs: Vec<&ObjectiveVector> = pool.iter().map(|c| &c.objectives).collect();
            normalized = normalize_pool(&refs);
            Box::new(move |j: usize, i: usize| {
                cdom_loss(&normalized[j], &normalized[i])
                    < cdom_loss(&normalized[i], &normalized[j])
            })
        }
    };
    let counts: Vec<usize> = (0..pool.len())
        .map(|i| {
            (0..pool.len())
                .filter(|&j| j != i && dominates(j, i))
                .count()
        })
        .collect();
    let min_count = *counts.iter().min().expect("non-empty pool");
    Ok((0..pool.len())
        .filter(|&i| counts[i] == min_count)
        .collect())
}

/// The non-dominated subset itself, in input order.
pub fn nd_sort(pool: &[Candidate], mode: DominationMode) -> Result<Vec<Candidate>> {
    Ok(nd_sort_indices(pool, mode)?
        .into_iter()
        .map(|i| pool[i].clone())
        .collect())
}

/// Euclidean distance from a raw objective vector to the vector of ideal
/// values. Callers must supply values on a `[0,1]` scale per spec ranges, so
/// the maximum distance is sqrt(n).
pub fn d2h(v: &ObjectiveVector, specs: &[ObjectiveSpec]) -> Result<f64> {
    if v.len() != specs.len() {
        return Err(Error::Usage(format!(
            "{} values for {} objective specs",
            v.len(),
            specs.len()
        )));
    }
    let sum: f64 = v
        .values()
        .iter()
        .zip(specs)
        .map(|(&x, s)| (s.optimum - x) * (s.optimum - x))
        .sum();
    Ok(sum.sqrt())
}
