//! Correlated Gaussian score populations, additive prediction noise, Monte
//! Carlo frontier trials, and the closed-form utility bounds for the Gaussian
//! model.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{sweep_frontier, ParetoCurve};
use crate::model::{alpha_utility, Cohort, ScorePair, ScoreSet, TradeoffWeight};
use crate::policies::ScoreSource;

/// Zero-mean bivariate Gaussian scores with additive Gaussian prediction noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub sigma_w: f64,
    pub sigma_p: f64,
    pub rho: f64,
    pub sigma_eps_w: f64,
    pub sigma_eps_p: f64,
    /// Welfare and profit noise are independent. When unset the two noise
    /// terms are driven by one shared standard normal, scaled per dimension.
    pub noise_independent: bool,
}

impl GaussianModel {
    pub fn new(
        sigma_w: f64,
        sigma_p: f64,
        rho: f64,
        sigma_eps_w: f64,
        sigma_eps_p: f64,
        noise_independent: bool,
    ) -> Result<Self> {
        for (name, v) in [
            ("sigma_w", sigma_w),
            ("sigma_p", sigma_p),
            ("sigma_eps_w", sigma_eps_w),
            ("sigma_eps_p", sigma_eps_p),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::arg("rho", format!("must lie in [-1, 1], got {rho}")));
        }
        Ok(GaussianModel {
            sigma_w,
            sigma_p,
            rho,
            sigma_eps_w,
            sigma_eps_p,
            noise_independent,
        })
    }

    /// Unit-variance uncorrelated scores with independent noise of the given size.
    pub fn standard(rho: f64, noise_w: f64, noise_p: f64) -> Result<Self> {
        GaussianModel::new(1.0, 1.0, rho, noise_w, noise_p, true)
    }

    /// Covariance of `(profit, welfare)`.
    pub fn score_covariance(&self) -> [[f64; 2]; 2] {
        let c = self.rho * self.sigma_p * self.sigma_w;
        [[self.sigma_p * self.sigma_p, c], [c, self.sigma_w * self.sigma_w]]
    }

    /// Covariance of the `(profit, welfare)` prediction noise.
    pub fn noise_covariance(&self) -> [[f64; 2]; 2] {
        let c = if self.noise_independent {
            0.0
        } else {
            self.sigma_eps_p * self.sigma_eps_w
        };
        [
            [self.sigma_eps_p * self.sigma_eps_p, c],
            [c, self.sigma_eps_w * self.sigma_eps_w],
        ]
    }

    pub fn with_noise(self, sigma_eps_w: f64, sigma_eps_p: f64) -> Result<Self> {
        GaussianModel::new(
            self.sigma_w,
            self.sigma_p,
            self.rho,
            sigma_eps_w,
            sigma_eps_p,
            self.noise_independent,
        )
    }
}

/// Decorrelates a master seed and an index into an independent seed
/// (splitmix64 finalizer over the combined state).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. true score pairs from the model.
pub fn sample_cohort(model: &GaussianModel, n: usize, seed: u64) -> Result<Cohort> {
    if n == 0 {
        return Err(Error::arg("n", "cohort size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tail = (1.0 - model.rho * model.rho).max(0.0).sqrt();
    let scores = (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            ScorePair {
                welfare: model.sigma_w * z1,
                profit: model.sigma_p * (model.rho * z1 + tail * z2),
            }
        })
        .collect();
    Cohort::new(scores)
}

/// Returns the cohort with predicted scores `true + noise`, the noise drawn
/// independently of the true scores.
pub fn add_prediction_noise(cohort: &Cohort, model: &GaussianModel, seed: u64) -> Result<Cohort> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let predicted = cohort
        .true_scores()
        .iter()
        .map(|s| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = if model.noise_independent {
                StandardNormal.sample(&mut rng)
            } else {
                z1
            };
            ScorePair {
                welfare: s.welfare + model.sigma_eps_w * z1,
                profit: s.profit + model.sigma_eps_p * z2,
            }
        })
        .collect();
    cohort.clone().with_predicted(predicted)
}

/// Standard deviation of the composite `alpha * w + (1 - alpha) * p`.
pub fn sigma_y(model: &GaussianModel, alpha: TradeoffWeight) -> Result<f64> {
    let a = alpha.value();
    let var = a * a * model.sigma_w * model.sigma_w
        + (1.0 - a) * (1.0 - a) * model.sigma_p * model.sigma_p
        + 2.0 * model.rho * a * (1.0 - a) * model.sigma_w * model.sigma_p;
    if var < -1e-12 {
        return Err(Error::Numeric(format!("negative composite variance {var}")));
    }
    Ok(var.max(0.0).sqrt())
}

/// Squared sub-Gaussian parameter of the composite prediction error. The
/// leading factor is 4 for dependent noise and 1 for independent noise.
pub fn sigma_tilde_sq(model: &GaussianModel, alpha: TradeoffWeight) -> f64 {
    let a = alpha.value();
    let factor = if model.noise_independent { 1.0 } else { 4.0 };
    factor
        * (a * a * model.sigma_eps_w * model.sigma_eps_w
            + (1.0 - a) * (1.0 - a) * model.sigma_eps_p * model.sigma_eps_p)
}

/// Expected per-individual alpha-utility of the exact-score optimal policy,
/// `sigma_y / sqrt(2 pi)`.
pub fn optimal_expected_alpha_utility(model: &GaussianModel, alpha: TradeoffWeight) -> Result<f64> {
    Ok(sigma_y(model, alpha)? / (2.0 * PI).sqrt())
}

/// Lower bound on the plug-in policy's expected alpha-utility,
/// `optimal * (1 - 2 s / (s + sigma_y^2))` with `s = sigma_tilde_sq`.
///
/// Not clamped: large noise gives a negative, vacuous bound.
pub fn plugin_utility_lower_bound(model: &GaussianModel, alpha: TradeoffWeight) -> Result<f64> {
    let sy = sigma_y(model, alpha)?;
    let st = sigma_tilde_sq(model, alpha);
    let denom = st + sy * sy;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(sy / (2.0 * PI).sqrt() * (1.0 - 2.0 * st / denom))
}

/// `(1 - alpha) * mean|p_hat - p| + alpha * mean|w_hat - w|`.
pub fn empirical_suboptimality_bound(cohort: &Cohort, alpha: TradeoffWeight) -> Result<f64> {
    let truth = cohort.true_scores();
    let pred = cohort.scores(ScoreSet::PredictedScores)?;
    let n = truth.len() as f64;
    let (mut ep, mut ew) = (0.0, 0.0);
    for (t, h) in truth.iter().zip(pred) {
        ep += (h.profit - t.profit).abs();
        ew += (h.welfare - t.welfare).abs();
    }
    let a = alpha.value();
    Ok((1.0 - a) * ep / n + a * ew / n)
}

/// Per-alpha comparison of realized utilities against both bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub alpha: TradeoffWeight,
    /// Realized alpha-utility of the exact-score policy.
    pub optimal_utility: f64,
    /// Realized alpha-utility of the plug-in policy, evaluated on true scores.
    pub realized_utility: f64,
    pub lower_bound: f64,
    pub l1_bound: f64,
}

impl BoundCheck {
    pub fn gap(&self) -> f64 {
        self.optimal_utility - self.realized_utility
    }

    /// `0 <= gap <= l1_bound`.
    pub fn within_l1_bound(&self) -> bool {
        let gap = self.gap();
        gap >= 0.0 && gap <= self.l1_bound
    }
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_seed: u64,
    /// Plug-in thresholds, true-score evaluation.
    pub empirical_curve: ParetoCurve,
    pub exact_curve: ParetoCurve,
    pub per_alpha_bound_check: Vec<BoundCheck>,
}

/// Runs one trial from its own seed: fresh cohort, fresh noise, both curves
/// and the bound checks.
pub fn run_trial(
    model: &GaussianModel,
    n: usize,
    alpha_grid: &[TradeoffWeight],
    trial_seed: u64,
) -> Result<TrialReport> {
    let cohort = sample_cohort(model, n, derive_seed(trial_seed, 0))?;
    let cohort = add_prediction_noise(&cohort, model, derive_seed(trial_seed, 1))?;
    let exact_curve = sweep_frontier(&cohort, ScoreSource::TrueScores, alpha_grid, ScoreSet::TrueScores)?;
    let empirical_curve =
        sweep_frontier(&cohort, ScoreSource::PredictedScores, alpha_grid, ScoreSet::TrueScores)?;
    let per_alpha_bound_check = exact_curve
        .points
        .iter()
        .zip(&empirical_curve.points)
        .map(|(e, p)| {
            Ok(BoundCheck {
                alpha: e.alpha,
                optimal_utility: alpha_utility(e.utility, e.alpha),
                realized_utility: alpha_utility(p.utility, p.alpha),
                lower_bound: plugin_utility_lower_bound(model, e.alpha)?,
                l1_bound: empirical_suboptimality_bound(&cohort, e.alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport {
        trial_seed,
        empirical_curve,
        exact_curve,
        per_alpha_bound_check,
    })
}

/// Runs `trials` independent trials in parallel; trial `t` uses seed
/// `derive_seed(master_seed, t)` and the output is in trial order.
pub fn run_trials(
    model: &GaussianModel,
    n: usize,
    trials: usize,
    alpha_grid: &[TradeoffWeight],
    master_seed: u64,
) -> Result<Vec<TrialReport>> {
    if trials == 0 {
        return Err(Error::arg("trials", "at least one trial is required"));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(model, n, alpha_grid, derive_seed(master_seed, t)))
        .collect()
}

/// Mean and standard error of a sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
