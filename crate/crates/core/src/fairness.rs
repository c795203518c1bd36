//! Demographic-parity constrained profit maximization for two groups, and
//! the induced welfare scores under which each fair policy is an
//! alpha-Pareto policy.
//!
//! Group A is the disadvantaged group: its unconstrained selection rate
//! `rate(A, 0)` is at most `rate(B, 0)`. Constrained solutions then satisfy
//!
//! ```text
//! beta_A(MaxUtil) <= beta_A <= beta_B <= beta_B(MaxUtil),   t_A <= 0 <= t_B
//! ```
//!
//! and the search reduces to one variable: maximize
//! `f_A(beta) + f_B(beta + eps)` unless the constraint is slack.
//!
//! Empirical profit distributions are discrete, so a threshold alone cannot
//! hit every selection rate. Policies therefore carry a boundary
//! probability: individuals strictly above the threshold are selected,
//! individuals exactly at it are selected with that probability.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::{isotonic_decreasing, isotonic_increasing, max_decrease, max_increase};
use crate::model::{Group, TradeoffWeight};

/// Default number of points in the selection-rate grid.
pub const DEFAULT_RATE_RESOLUTION: usize = 1001;

/// Default gain from a repaid loan.
pub const DEFAULT_U_PLUS: f64 = 1.0;

/// Default loss from a defaulted loan.
pub const DEFAULT_U_MINUS: f64 = -4.0;

/// Expected profit of lending: `u_plus * repay_prob + u_minus * (1 - repay_prob)`.
pub fn repayment_profit_score(repay_prob: f64, u_plus: f64, u_minus: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&repay_prob) {
        return Err(Error::arg(
            "repay_prob",
            format!("must lie in [0, 1], got {repay_prob}"),
        ));
    }
    Ok(u_plus * repay_prob + u_minus * (1.0 - repay_prob))
}

/// Empirical profit-score distribution of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    group: Group,
    /// Ascending.
    profits: Vec<f64>,
    /// `top_sums[k]` is the sum of the `k` largest profits.
    top_sums: Vec<f64>,
    mass: f64,
}

impl GroupSample {
    pub fn new(group: Group, mut profits: Vec<f64>, mass: f64) -> Result<Self> {
        if profits.is_empty() {
            return Err(Error::arg(format!("group {group}"), "group has no members"));
        }
        if let Some(p) = profits.iter().find(|p| !p.is_finite()) {
            return Err(Error::arg(format!("group {group}"), format!("non-finite profit {p}")));
        }
        if !(mass > 0.0 && mass <= 1.0) {
            return Err(Error::arg("mass", format!("must lie in (0, 1], got {mass}")));
        }
        profits.sort_by(f64::total_cmp);
        let mut top_sums = Vec::with_capacity(profits.len() + 1);
        top_sums.push(0.0);
        let mut acc = 0.0;
        for p in profits.iter().rev() {
            acc += p;
            top_sums.push(acc);
        }
        Ok(GroupSample {
            group,
            profits,
            top_sums,
            mass,
        })
    }

    /// Two groups with masses proportional to their sizes.
    pub fn pair(a: Vec<f64>, b: Vec<f64>) -> Result<(GroupSample, GroupSample)> {
        let total = (a.len() + b.len()) as f64;
        let (ma, mb) = (a.len() as f64 / total, b.len() as f64 / total);
        Ok((GroupSample::new(Group::A, a, ma)?, GroupSample::new(Group::B, b, mb)?))
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn profits(&self) -> &[f64] {
        &self.profits
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    fn relabeled(mut self, group: Group) -> Self {
        self.group = group;
        self
    }

    fn count_at_least(&self, t: f64) -> usize {
        self.len() - self.profits.partition_point(|&p| p < t)
    }

    fn count_above(&self, t: f64) -> usize {
        self.len() - self.profits.partition_point(|&p| p <= t)
    }
}

/// Fraction of the group with profit at least `t`.
pub fn rate(group: &GroupSample, t: f64) -> f64 {
    group.count_at_least(t) as f64 / group.len() as f64
}

/// A threshold with randomization on the atom at the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedThreshold {
    pub t: f64,
    pub boundary_prob: f64,
}

impl RandomizedThreshold {
    /// The deterministic rule `p >= t`.
    pub fn at_least(t: f64) -> Self {
        RandomizedThreshold { t, boundary_prob: 1.0 }
    }

    pub fn selection_probability(&self, p: f64) -> f64 {
        if p > self.t {
            1.0
        } else if p == self.t {
            self.boundary_prob
        } else {
            0.0
        }
    }
}

/// Expected selection rate of a randomized threshold.
pub fn expected_rate(group: &GroupSample, th: RandomizedThreshold) -> f64 {
    let above = group.count_above(th.t);
    let at = group.count_at_least(th.t) - above;
    (above as f64 + th.boundary_prob * at as f64) / group.len() as f64
}

fn check_rate(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::arg("beta", format!("selection rate must lie in [0, 1], got {beta}")));
    }
    Ok(())
}

/// The highest threshold, with boundary randomization, whose expected
/// selection rate is exactly `beta`.
pub fn rate_inverse(group: &GroupSample, beta: f64) -> Result<RandomizedThreshold> {
    check_rate(beta)?;
    let n = group.len();
    let k = (beta * n as f64).min(n as f64);
    if k <= 0.0 {
        let max = group.profits[n - 1];
        return Ok(RandomizedThreshold {
            t: max.next_up(),
            boundary_prob: 0.0,
        });
    }
    // the ceil(k)-th largest profit is the atom that absorbs the fractional part
    let idx = (k.ceil() as usize).clamp(1, n);
    let v = group.profits[n - idx];
    let above = group.count_above(v) as f64;
    let at_least = group.count_at_least(v) as f64;
    let q = ((k - above) / (at_least - above)).clamp(0.0, 1.0);
    Ok(RandomizedThreshold { t: v, boundary_prob: q })
}

/// Mass-weighted profit per group member when the top `beta` fraction of
/// the group is selected (the boundary member fractionally).
pub fn group_objective(group: &GroupSample, beta: f64) -> Result<f64> {
    check_rate(beta)?;
    let n = group.len();
    let k = beta * n as f64;
    let whole = (k.floor() as usize).min(n);
    let frac = k - whole as f64;
    let mut sum = group.top_sums[whole];
    if whole < n && frac > 0.0 {
        sum += frac * group.profits[n - 1 - whole];
    }
    Ok(group.mass * sum / n as f64)
}

/// Group-dependent randomized thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupThresholdPolicy {
    pub t_a: f64,
    pub t_b: f64,
    pub boundary_prob_a: f64,
    pub boundary_prob_b: f64,
}

impl GroupThresholdPolicy {
    pub fn threshold(&self, group: Group) -> RandomizedThreshold {
        match group {
            Group::A => RandomizedThreshold {
                t: self.t_a,
                boundary_prob: self.boundary_prob_a,
            },
            Group::B => RandomizedThreshold {
                t: self.t_b,
                boundary_prob: self.boundary_prob_b,
            },
        }
    }
}

/// Profit-maximizing policy under `|beta_A - beta_B| <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSolution {
    pub epsilon: f64,
    pub policy: GroupThresholdPolicy,
    pub beta_a: f64,
    pub beta_b: f64,
    pub beta_a_max_util: f64,
    pub beta_b_max_util: f64,
    pub profit_utility: f64,
    /// The constraint is slack and the unconstrained rule `p >= 0` is optimal.
    pub max_util: bool,
}

impl FairnessSolution {
    /// `beta_A(MaxUtil) <= beta_A <= beta_B <= beta_B(MaxUtil)`.
    pub fn beta_ordering_holds(&self) -> bool {
        self.beta_a_max_util <= self.beta_a
            && self.beta_a <= self.beta_b
            && self.beta_b <= self.beta_b_max_util
    }
}

/// Orders two samples so the first is the disadvantaged group, relabeling
/// them `A` and `B`. Returns whether a swap happened.
pub fn order_groups(first: GroupSample, second: GroupSample) -> (GroupSample, GroupSample, bool) {
    if rate(&first, 0.0) <= rate(&second, 0.0) {
        (first.relabeled(Group::A), second.relabeled(Group::B), false)
    } else {
        (second.relabeled(Group::A), first.relabeled(Group::B), true)
    }
}

/// Solves the epsilon-demographic-parity constrained problem by a single
/// variable scan over selection rates.
///
/// When the unconstrained rates already satisfy the constraint the MaxUtil
/// rule `p >= 0` is returned with thresholds `(0, 0)`. Otherwise the scan
/// covers the grid points `k / (rate_resolution - 1)` inside
/// `[beta_A(MaxUtil), beta_B(MaxUtil) - epsilon]` together with both
/// endpoints; ties go to the larger rate.
///
/// Groups are expected in disadvantaged-first order; a reversed pair is
/// swapped with a warning.
pub fn solve_dp_constrained(
    group_a: &GroupSample,
    group_b: &GroupSample,
    epsilon: f64,
    rate_resolution: usize,
) -> Result<FairnessSolution> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::arg("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if rate_resolution < 2 {
        return Err(Error::arg("rate_resolution", "need at least 2 grid points"));
    }
    if rate(group_a, 0.0) > rate(group_b, 0.0) {
        warn!("group A has the higher unconstrained selection rate; swapping groups");
        let (a, b, _) = order_groups(group_a.clone(), group_b.clone());
        return solve_dp_constrained(&a, &b, epsilon, rate_resolution);
    }
    let (a, b) = (group_a, group_b);
    let mu_a = rate(a, 0.0);
    let mu_b = rate(b, 0.0);

    if mu_b - mu_a <= epsilon {
        return Ok(FairnessSolution {
            epsilon,
            policy: GroupThresholdPolicy {
                t_a: 0.0,
                t_b: 0.0,
                boundary_prob_a: 1.0,
                boundary_prob_b: 1.0,
            },
            beta_a: mu_a,
            beta_b: mu_b,
            beta_a_max_util: mu_a,
            beta_b_max_util: mu_b,
            profit_utility: group_objective(a, mu_a)? + group_objective(b, mu_b)?,
            max_util: true,
        });
    }

    let lo = mu_a;
    let hi = mu_b - epsilon;
    let step = 1.0 / (rate_resolution - 1) as f64;
    let mut candidates = vec![lo];
    candidates.extend(
        (0..rate_resolution)
            .map(|k| k as f64 * step)
            .filter(|&beta| beta > lo && beta < hi),
    );
    candidates.push(hi);

    let (mut best_beta, mut best) = (lo, f64::NEG_INFINITY);
    for beta in candidates {
        let value = group_objective(a, beta)? + group_objective(b, (beta + epsilon).min(mu_b))?;
        if value >= best {
            best = value;
            best_beta = beta;
        }
    }
    let beta_a = best_beta;
    let beta_b = (best_beta + epsilon).min(mu_b);

    let th_a = if beta_a == mu_a {
        RandomizedThreshold::at_least(0.0)
    } else {
        rate_inverse(a, beta_a)?
    };
    let th_b = if beta_b == mu_b {
        RandomizedThreshold::at_least(0.0)
    } else {
        rate_inverse(b, beta_b)?
    };
    Ok(FairnessSolution {
        epsilon,
        policy: GroupThresholdPolicy {
            t_a: th_a.t,
            t_b: th_b.t,
            boundary_prob_a: th_a.boundary_prob,
            boundary_prob_b: th_b.boundary_prob,
        },
        beta_a,
        beta_b,
        beta_a_max_util: mu_a,
        beta_b_max_util: mu_b,
        profit_utility: best,
        max_util: false,
    })
}

/// Solutions over an epsilon grid plus monotone projections of the
/// threshold paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub solutions: Vec<FairnessSolution>,
    /// Non-decreasing in epsilon.
    pub t_a_projected: Vec<f64>,
    /// Non-increasing in epsilon.
    pub t_b_projected: Vec<f64>,
    /// Largest decrease of the raw `t_A` path before projection.
    pub raw_violation_a: f64,
    /// Largest increase of the raw `t_B` path before projection.
    pub raw_violation_b: f64,
    pub rate_resolution: usize,
}

impl EpsilonSweep {
    pub fn epsilons(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.epsilon).collect()
    }

    /// `alpha` of the equivalent Pareto policy at each epsilon, from the
    /// projected `t_B` path.
    pub fn alphas(&self) -> Vec<f64> {
        self.t_b_projected
            .iter()
            .map(|&t| alpha_of_epsilon(t.max(0.0)).map(|a| a.value()).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Solves every epsilon of an ascending grid and projects the threshold
/// paths onto monotone sequences.
pub fn epsilon_sweep(
    group_a: &GroupSample,
    group_b: &GroupSample,
    epsilon_grid: &[f64],
    rate_resolution: usize,
) -> Result<EpsilonSweep> {
    if epsilon_grid.is_empty() {
        return Err(Error::arg("epsilon_grid", "grid must not be empty"));
    }
    if epsilon_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("epsilon_grid", "grid must be strictly increasing"));
    }
    let (a, b) = if rate(group_a, 0.0) > rate(group_b, 0.0) {
        warn!("group A has the higher unconstrained selection rate; swapping groups");
        let (a, b, _) = order_groups(group_a.clone(), group_b.clone());
        (a, b)
    } else {
        (group_a.clone(), group_b.clone())
    };
    let solutions = epsilon_grid
        .par_iter()
        .map(|&eps| solve_dp_constrained(&a, &b, eps, rate_resolution))
        .collect::<Result<Vec<_>>>()?;
    let raw_a: Vec<f64> = solutions.iter().map(|s| s.policy.t_a).collect();
    let raw_b: Vec<f64> = solutions.iter().map(|s| s.policy.t_b).collect();
    Ok(EpsilonSweep {
        t_a_projected: isotonic_increasing(&raw_a),
        t_b_projected: isotonic_decreasing(&raw_b),
        raw_violation_a: max_decrease(&raw_a),
        raw_violation_b: max_increase(&raw_b),
        solutions,
        rate_resolution,
    })
}

/// Welfare score that makes the group threshold `t_star` an alpha-Pareto
/// threshold: `-((1 - alpha) / alpha) * t_star`.
pub fn fixed_group_welfare(t_star: f64, alpha: TradeoffWeight) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::arg("alpha", format!("must lie strictly inside (0, 1), got {a}")));
    }
    Ok(-((1.0 - a) / a) * t_star)
}

/// `t_B / (1 + t_B)`.
pub fn alpha_of_epsilon(t_b: f64) -> Result<TradeoffWeight> {
    if !(t_b >= 0.0) {
        return Err(Error::arg("t_b", format!("must be >= 0, got {t_b}")));
    }
    if t_b.is_infinite() {
        return TradeoffWeight::new(1.0);
    }
    TradeoffWeight::new(t_b / (1.0 + t_b))
}

/// Which group carries the profit-dependent induced welfare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InducedVariant {
    /// `w_B = -1` on `[0, t_B(0)]`; `w_A = -p / t_B(eps_A(p))` on `[t_A(0), 0]`.
    Standard,
    /// `w_A = 1` on `[t_A(0), 0]`; `w_B = p / t_A(eps_B(p))` on `[0, t_B(0)]`.
    Flipped,
}

/// Tabulated threshold paths and the induced welfare score functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedWelfareSpec {
    pub variant: InducedVariant,
    pub epsilon_grid: Vec<f64>,
    pub t_a_of_eps: Vec<f64>,
    pub t_b_of_eps: Vec<f64>,
    /// Trade-off weight of the equivalent Pareto policy at each epsilon.
    pub alpha_of_eps: Vec<f64>,
}

fn lerp(x0: f64, x1: f64, y0: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        y0
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

impl InducedWelfareSpec {
    fn path_at(&self, path: &[f64], eps: f64) -> f64 {
        let grid = &self.epsilon_grid;
        let last = grid.len() - 1;
        if eps <= grid[0] {
            return path[0];
        }
        if eps >= grid[last] {
            return path[last];
        }
        let k = grid.partition_point(|&e| e <= eps);
        lerp(grid[k - 1], grid[k], path[k - 1], path[k], eps)
    }

    pub fn t_a_at(&self, eps: f64) -> f64 {
        self.path_at(&self.t_a_of_eps, eps)
    }

    pub fn t_b_at(&self, eps: f64) -> f64 {
        self.path_at(&self.t_b_of_eps, eps)
    }

    /// Largest epsilon with `t_A(eps) <= p`.
    pub fn eps_a(&self, p: f64) -> f64 {
        let (grid, t) = (&self.epsilon_grid, &self.t_a_of_eps);
        let k = t.partition_point(|&v| v <= p);
        if k == 0 {
            return grid[0];
        }
        if k == t.len() {
            return grid[grid.len() - 1];
        }
        lerp(t[k - 1], t[k], grid[k - 1], grid[k], p)
    }

    /// Smallest epsilon with `t_B(eps) <= p`.
    pub fn eps_b(&self, p: f64) -> f64 {
        let (grid, t) = (&self.epsilon_grid, &self.t_b_of_eps);
        let k = t.partition_point(|&v| v > p);
        if k == 0 {
            return grid[0];
        }
        if k == t.len() {
            return grid[grid.len() - 1];
        }
        lerp(t[k - 1], t[k], grid[k - 1], grid[k], p)
    }

    /// Induced welfare score of an individual with profit `p` in `group`.
    ///
    /// The score is infinite where the other group's threshold path has
    /// already reached 0 at `eps_A(p)` (or `eps_B(p)`): such an individual
    /// is on the fair side of every constrained threshold, so only the
    /// unconstrained rule may treat it by profit alone.
    pub fn welfare(&self, group: Group, p: f64) -> f64 {
        let t_a0 = self.t_a_of_eps[0];
        let t_b0 = self.t_b_of_eps[0];
        let in_a_band = t_a0 <= p && p <= 0.0;
        let in_b_band = 0.0 <= p && p <= t_b0;
        match (self.variant, group) {
            (InducedVariant::Standard, Group::B) => {
                if in_b_band {
                    -1.0
                } else {
                    0.0
                }
            }
            (InducedVariant::Standard, Group::A) => {
                let tb = self.t_b_at(self.eps_a(p));
                if !in_a_band || p == 0.0 {
                    0.0
                } else if tb > 0.0 {
                    -p / tb
                } else {
                    f64::INFINITY
                }
            }
            (InducedVariant::Flipped, Group::A) => {
                if in_a_band {
                    1.0
                } else {
                    0.0
                }
            }
            (InducedVariant::Flipped, Group::B) => {
                let ta = self.t_a_at(self.eps_b(p));
                if !in_b_band || p == 0.0 {
                    0.0
                } else if ta < 0.0 {
                    p / ta
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Decision of the equivalent alpha-Pareto policy at sweep index `k`.
    ///
    /// At `alpha = 0` this is `p >= 0` even for infinite scores.
    pub fn pareto_decision(&self, k: usize, group: Group, p: f64) -> bool {
        let alpha = self.alpha_of_eps[k];
        if alpha == 0.0 {
            return p >= 0.0;
        }
        alpha * self.welfare(group, p) + (1.0 - alpha) * p >= 0.0
    }
}

/// Tabulates the induced welfare scores from a projected sweep.
pub fn build_induced_welfare(sweep: &EpsilonSweep, variant: InducedVariant) -> Result<InducedWelfareSpec> {
    if sweep.solutions.is_empty() {
        return Err(Error::arg("sweep", "sweep has no solutions"));
    }
    let t_a = sweep.t_a_projected.clone();
    let t_b = sweep.t_b_projected.clone();
    if max_decrease(&t_a) > 0.0 || max_increase(&t_b) > 0.0 {
        return Err(Error::Numeric(
            "threshold paths are not monotone after projection".into(),
        ));
    }
    if t_a.iter().any(|&t| t > 0.0) || t_b.iter().any(|&t| t < 0.0) {
        return Err(Error::Numeric(
            "threshold paths must satisfy t_A <= 0 <= t_B".into(),
        ));
    }
    let alpha_of_eps = match variant {
        InducedVariant::Standard => t_b
            .iter()
            .map(|&t| alpha_of_epsilon(t).map(TradeoffWeight::value))
            .collect::<Result<Vec<_>>>()?,
        InducedVariant::Flipped => t_a
            .iter()
            .map(|&t| alpha_of_epsilon(-t).map(TradeoffWeight::value))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(InducedWelfareSpec {
        variant,
        epsilon_grid: sweep.epsilons(),
        t_a_of_eps: t_a,
        t_b_of_eps: t_b,
        alpha_of_eps,
    })
}

/// One individual whose fair and Pareto decisions disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub group: Group,
    pub profit: f64,
    pub fair_decision: bool,
    pub pareto_decision: bool,
    /// Within one rate-grid cell of the group's threshold.
    pub boundary: bool,
}

/// Decision comparison between the fair policy at one epsilon and the
/// induced alpha-Pareto policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub epsilon: f64,
    pub alpha: f64,
    pub individuals: usize,
    pub mismatches: usize,
    pub boundary_mismatches: usize,
    pub interior_mismatches: usize,
    pub locations: Vec<Mismatch>,
}

impl EquivalenceReport {
    pub fn mismatch_fraction(&self) -> f64 {
        self.mismatches as f64 / self.individuals.max(1) as f64
    }
}

/// Compares, for every member of both groups, the fair decision
/// `p >= t_j` at sweep index `k` with the induced Pareto decision.
///
/// A mismatch counts as a boundary mismatch when the member's rank-based
/// selection rate is within one rate-grid cell of the group's rate.
pub fn verify_fair_pareto_equivalence(
    sweep: &EpsilonSweep,
    k: usize,
    spec: &InducedWelfareSpec,
    group_a: &GroupSample,
    group_b: &GroupSample,
) -> Result<EquivalenceReport> {
    let sol = sweep
        .solutions
        .get(k)
        .ok_or_else(|| Error::arg("k", format!("sweep has {} entries", sweep.solutions.len())))?;
    if spec.epsilon_grid.len() != sweep.solutions.len() {
        return Err(Error::arg("spec", "spec was not built from this sweep"));
    }
    let cell = 1.0 / (sweep.rate_resolution - 1).max(1) as f64;
    let mut locations = Vec::new();
    let mut individuals = 0;
    for (group, sample, beta) in [(Group::A, group_a, sol.beta_a), (Group::B, group_b, sol.beta_b)] {
        let th = sol.policy.threshold(group);
        let tol = cell + 1.0 / sample.len() as f64;
        for &p in sample.profits() {
            individuals += 1;
            let fair = p >= th.t;
            let pareto = spec.pareto_decision(k, group, p);
            if fair != pareto {
                let boundary = (rate(sample, p) - beta).abs() <= tol;
                locations.push(Mismatch {
                    group,
                    profit: p,
                    fair_decision: fair,
                    pareto_decision: pareto,
                    boundary,
                });
            }
        }
    }
    let boundary_mismatches = locations.iter().filter(|m| m.boundary).count();
    Ok(EquivalenceReport {
        epsilon: sol.epsilon,
        alpha: spec.alpha_of_eps[k],
        individuals,
        mismatches: locations.len(),
        boundary_mismatches,
        interior_mismatches: locations.len() - boundary_mismatches,
        locations,
    })
}
