//! Domain types shared by every module, plus utility evaluation and dominance.
//!
//! Utilities are empirical means over a uniformly weighted cohort. Randomized
//! decisions are stored as selection probabilities and evaluated in
//! expectation, so evaluation never samples.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One individual's (profit, welfare) score pair, either true or predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub profit: f64,
    pub welfare: f64,
}

impl ScorePair {
    pub fn new(profit: f64, welfare: f64) -> Result<Self> {
        if !profit.is_finite() {
            return Err(Error::arg("profit", format!("must be finite, got {profit}")));
        }
        if !welfare.is_finite() {
            return Err(Error::arg("welfare", format!("must be finite, got {welfare}")));
        }
        Ok(ScorePair { profit, welfare })
    }

    /// The alpha-weighted composite `(1 - alpha) * profit + alpha * welfare`.
    #[inline]
    pub fn composite(&self, alpha: TradeoffWeight) -> f64 {
        let a = alpha.value();
        (1.0 - a) * self.profit + a * self.welfare
    }

    pub fn scaled(&self, c: f64) -> ScorePair {
        ScorePair {
            profit: self.profit * c,
            welfare: self.welfare * c,
        }
    }
}

/// Group label for the two-group fairness setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::A => f.write_str("A"),
            Group::B => f.write_str("B"),
        }
    }
}

/// Which score set of a cohort to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreSet {
    TrueScores,
    PredictedScores,
}

/// A trade-off weight `alpha` in `[0, 1]`; 0 is pure profit, 1 is pure welfare.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TradeoffWeight(f64);

impl TradeoffWeight {
    pub const PROFIT: TradeoffWeight = TradeoffWeight(0.0);
    pub const WELFARE: TradeoffWeight = TradeoffWeight(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::arg("alpha", format!("must lie in [0, 1], got {alpha}")));
        }
        Ok(TradeoffWeight(alpha))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TradeoffWeight {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        TradeoffWeight::new(v)
    }
}

impl From<TradeoffWeight> for f64 {
    fn from(w: TradeoffWeight) -> f64 {
        w.0
    }
}

/// Profit and welfare utilities of a policy on a cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityPoint {
    pub profit_utility: f64,
    pub welfare_utility: f64,
}

impl UtilityPoint {
    pub fn new(profit_utility: f64, welfare_utility: f64) -> Self {
        UtilityPoint {
            profit_utility,
            welfare_utility,
        }
    }
}

/// Per-individual selection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    pub fn new(decisions: Vec<f64>) -> Result<Self> {
        if let Some((i, d)) = decisions
            .iter()
            .enumerate()
            .find(|(_, d)| !(0.0..=1.0).contains(*d))
        {
            return Err(Error::arg(
                "decisions",
                format!("entry {i} is {d}, expected a probability in [0, 1]"),
            ));
        }
        Ok(DecisionVector(decisions))
    }

    /// Deterministic decisions from booleans.
    pub fn from_bools<I: IntoIterator<Item = bool>>(selected: I) -> Self {
        DecisionVector(selected.into_iter().map(|s| if s { 1.0 } else { 0.0 }).collect())
    }

    pub fn zeros(n: usize) -> Self {
        DecisionVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn selected_count(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// A finite population of individuals.
///
/// Index `i` of every present list refers to the same individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    true_scores: Vec<ScorePair>,
    predicted_scores: Option<Vec<ScorePair>>,
    groups: Option<Vec<Group>>,
}

impl Cohort {
    pub fn new(true_scores: Vec<ScorePair>) -> Result<Self> {
        if true_scores.is_empty() {
            return Err(Error::arg("true_scores", "cohort must contain at least one individual"));
        }
        for (i, s) in true_scores.iter().enumerate() {
            if !s.profit.is_finite() || !s.welfare.is_finite() {
                return Err(Error::arg("true_scores", format!("entry {i} is not finite")));
            }
        }
        Ok(Cohort {
            true_scores,
            predicted_scores: None,
            groups: None,
        })
    }

    /// Builds a cohort from plain `(profit, welfare)` tuples.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let scores = pairs
            .iter()
            .map(|&(p, w)| ScorePair::new(p, w))
            .collect::<Result<Vec<_>>>()?;
        Cohort::new(scores)
    }

    pub fn with_predicted(mut self, predicted: Vec<ScorePair>) -> Result<Self> {
        if predicted.len() != self.true_scores.len() {
            return Err(Error::arg(
                "predicted_scores",
                format!(
                    "length {} does not match cohort size {}",
                    predicted.len(),
                    self.true_scores.len()
                ),
            ));
        }
        for (i, s) in predicted.iter().enumerate() {
            if !s.profit.is_finite() || !s.welfare.is_finite() {
                return Err(Error::arg("predicted_scores", format!("entry {i} is not finite")));
            }
        }
        self.predicted_scores = Some(predicted);
        Ok(self)
    }

    pub fn with_groups(mut self, groups: Vec<Group>) -> Result<Self> {
        if groups.len() != self.true_scores.len() {
            return Err(Error::arg(
                "groups",
                format!(
                    "length {} does not match cohort size {}",
                    groups.len(),
                    self.true_scores.len()
                ),
            ));
        }
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.true_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn true_scores(&self) -> &[ScorePair] {
        &self.true_scores
    }

    pub fn predicted_scores(&self) -> Option<&[ScorePair]> {
        self.predicted_scores.as_deref()
    }

    pub fn groups(&self) -> Option<&[Group]> {
        self.groups.as_deref()
    }

    /// The requested score set, or an argument error when it is absent.
    pub fn scores(&self, set: ScoreSet) -> Result<&[ScorePair]> {
        match set {
            ScoreSet::TrueScores => Ok(&self.true_scores),
            ScoreSet::PredictedScores => self
                .predicted_scores
                .as_deref()
                .ok_or_else(|| Error::arg("predicted_scores", "cohort has no predicted scores")),
        }
    }

    /// Identity of the true-score population, used to detect curves built on
    /// different cohorts.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.true_scores.len().hash(&mut h);
        for s in &self.true_scores {
            s.profit.to_bits().hash(&mut h);
            s.welfare.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Mean profit and welfare of the selected individuals, weighted by the
/// selection probabilities and normalized by the cohort size.
pub fn evaluate_utilities(
    cohort: &Cohort,
    decisions: &DecisionVector,
    scores: ScoreSet,
) -> Result<UtilityPoint> {
    if decisions.len() != cohort.len() {
        return Err(Error::arg(
            "decisions",
            format!(
                "length {} does not match cohort size {}",
                decisions.len(),
                cohort.len()
            ),
        ));
    }
    let pairs = cohort.scores(scores)?;
    let (mut profit, mut welfare) = (0.0, 0.0);
    for (s, &d) in pairs.iter().zip(decisions.as_slice()) {
        profit += s.profit * d;
        welfare += s.welfare * d;
    }
    let n = cohort.len() as f64;
    Ok(UtilityPoint::new(profit / n, welfare / n))
}

/// `(1 - alpha) * profit_utility + alpha * welfare_utility`.
#[inline]
pub fn alpha_utility(u: UtilityPoint, alpha: TradeoffWeight) -> f64 {
    let a = alpha.value();
    (1.0 - a) * u.profit_utility + a * u.welfare_utility
}

/// Weak dominance in both coordinates, strict in at least one.
pub fn pareto_dominates(a: UtilityPoint, b: UtilityPoint) -> bool {
    a.profit_utility >= b.profit_utility
        && a.welfare_utility >= b.welfare_utility
        && (a.profit_utility > b.profit_utility || a.welfare_utility > b.welfare_utility)
}
