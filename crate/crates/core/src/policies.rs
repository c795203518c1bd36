//! Threshold policies on exact, predicted, and posterior-mean scores.
//!
//! Every policy here selects an individual iff the alpha-composite of some
//! score pair is nonnegative. A composite of exactly zero is accepted, so
//! `alpha = 0` reduces to the profit-maximizing rule `profit >= 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cohort, DecisionVector, ScorePair, ScoreSet, TradeoffWeight};
use crate::simulation::GaussianModel;

/// Which scores a threshold policy reads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScoreSource {
    TrueScores,
    PredictedScores,
    /// Posterior means of the true scores given the predictions, under a
    /// jointly Gaussian score and noise model.
    GaussianPosterior(GaussianModel),
}

/// An alpha-threshold policy together with the scores it thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub alpha: TradeoffWeight,
    pub source: ScoreSource,
}

impl ThresholdPolicy {
    pub fn new(alpha: TradeoffWeight, source: ScoreSource) -> Self {
        ThresholdPolicy { alpha, source }
    }
}

#[inline]
fn threshold(alpha: TradeoffWeight, s: &ScorePair) -> bool {
    s.composite(alpha) >= 0.0
}

/// Optimal decision with exact scores.
pub fn exact_policy_decide(alpha: TradeoffWeight, s: ScorePair) -> bool {
    threshold(alpha, &s)
}

/// Plug-in decision: the exact rule applied to predicted scores.
pub fn plugin_policy_decide(alpha: TradeoffWeight, predicted: ScorePair) -> bool {
    threshold(alpha, &predicted)
}

/// `E[(p, w) | (p_hat, w_hat)]` for zero-mean Gaussian scores observed
/// through additive Gaussian noise.
///
/// With score covariance `S` and noise covariance `N`, the posterior mean is
/// `S (S + N)^{-1} (p_hat, w_hat)`.
pub fn gaussian_conditional_means(model: &GaussianModel, predicted: ScorePair) -> Result<ScorePair> {
    if model.sigma_eps_p == 0.0 && model.sigma_eps_w == 0.0 {
        return Ok(predicted);
    }
    let s = model.score_covariance();
    let noise = model.noise_covariance();
    let o = [
        [s[0][0] + noise[0][0], s[0][1] + noise[0][1]],
        [s[1][0] + noise[1][0], s[1][1] + noise[1][1]],
    ];
    let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
    let scale = (o[0][0] + o[1][1]).powi(2);
    if !(det > 1e-13 * scale) {
        return Err(Error::Numeric(format!(
            "observation covariance [[{}, {}], [{}, {}]] is singular (det = {det}); \
             every observed coordinate needs positive score or noise variance",
            o[0][0], o[0][1], o[1][0], o[1][1]
        )));
    }
    let inv = [[o[1][1] / det, -o[0][1] / det], [-o[1][0] / det, o[0][0] / det]];
    let obs = [predicted.profit, predicted.welfare];
    let z = [
        inv[0][0] * obs[0] + inv[0][1] * obs[1],
        inv[1][0] * obs[0] + inv[1][1] * obs[1],
    ];
    Ok(ScorePair {
        profit: s[0][0] * z[0] + s[0][1] * z[1],
        welfare: s[1][0] * z[0] + s[1][1] * z[1],
    })
}

/// Bayes-optimal decision among score-based policies: threshold the
/// composite of the posterior means.
pub fn bayes_policy_decide(
    model: &GaussianModel,
    alpha: TradeoffWeight,
    predicted: ScorePair,
) -> Result<bool> {
    let mean = gaussian_conditional_means(model, predicted)?;
    Ok(threshold(alpha, &mean))
}

/// Applies a policy to every individual of a cohort.
pub fn apply_policy(policy: &ThresholdPolicy, cohort: &Cohort) -> Result<DecisionVector> {
    let alpha = policy.alpha;
    let decisions = match policy.source {
        ScoreSource::TrueScores => cohort
            .scores(ScoreSet::TrueScores)?
            .iter()
            .map(|&s| exact_policy_decide(alpha, s))
            .collect::<Vec<_>>(),
        ScoreSource::PredictedScores => cohort
            .scores(ScoreSet::PredictedScores)?
            .iter()
            .map(|&s| plugin_policy_decide(alpha, s))
            .collect(),
        ScoreSource::GaussianPosterior(model) => cohort
            .scores(ScoreSet::PredictedScores)?
            .par_iter()
            .map(|&s| bayes_policy_decide(&model, alpha, s))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(DecisionVector::from_bools(decisions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(x: f64) -> TradeoffWeight {
        TradeoffWeight::new(x).unwrap()
    }

    fn sp(p: f64, w: f64) -> ScorePair {
        ScorePair::new(p, w).unwrap()
    }

    fn model(sw: f64, sp_: f64, rho: f64, ew: f64, ep: f64) -> GaussianModel {
        GaussianModel::new(sw, sp_, rho, ew, ep, true).unwrap()
    }

    #[test]
    fn exact_decisions() {
        assert!(!exact_policy_decide(a(0.0), sp(-0.1, 100.0)));
        assert!(exact_policy_decide(a(1.0), sp(-0.1, 100.0)));
        // composite is exactly zero: ties are accepted
        assert!(exact_policy_decide(a(0.5), sp(1.0, -1.0)));
    }

    #[test]
    fn plugin_decisions() {
        assert!(!plugin_policy_decide(a(0.5), sp(-2.0, 1.0)));
        assert!(plugin_policy_decide(a(0.25), sp(1.0, -2.0)));
    }

    #[test]
    fn posterior_means_zero_noise_is_identity() {
        let m = model(1.0, 1.0, 0.3, 0.0, 0.0);
        let s = sp(0.7, -1.3);
        assert_eq!(gaussian_conditional_means(&m, s).unwrap(), s);
    }

    #[test]
    fn posterior_means_scalar_shrinkage() {
        // independent coordinates shrink by sigma^2 / (sigma^2 + noise^2)
        let m = model(1.0, 1.0, 0.0, 1.0, 3.0);
        let mean = gaussian_conditional_means(&m, sp(10.0, 2.0)).unwrap();
        assert!((mean.welfare - 1.0).abs() < 1e-12);
        assert!((mean.profit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_means_match_generic_linear_solve() {
        // Cross-check the 2x2 closed form against nalgebra's LU on the
        // same conditional-expectation equations.
        use nalgebra::{Matrix2, Vector2};
        for &(rho, indep) in &[(0.5, true), (-0.7, true), (0.3, false)] {
            let m = GaussianModel::new(1.3, 0.8, rho, 0.6, 1.1, indep).unwrap();
            let s = m.score_covariance();
            let n = m.noise_covariance();
            let sm = Matrix2::new(s[0][0], s[0][1], s[1][0], s[1][1]);
            let om = sm + Matrix2::new(n[0][0], n[0][1], n[1][0], n[1][1]);
            let obs = Vector2::new(0.4, -2.0);
            let expected = sm * om.lu().solve(&obs).unwrap();
            let got = gaussian_conditional_means(&m, sp(0.4, -2.0)).unwrap();
            assert!((got.profit - expected[0]).abs() < 1e-12);
            assert!((got.welfare - expected[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_observation_covariance_is_numeric_error() {
        let m = model(1.0, 0.0, 0.0, 1.0, 0.0);
        assert!(matches!(
            gaussian_conditional_means(&m, sp(1.0, 1.0)),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn bayes_shrinks_noisy_welfare() {
        // posterior welfare mean is 3 / 10 = 0.3; composite 0.5 * (-0.2) + 0.5 * 0.3 = 0.05
        let m = model(1.0, 1.0, 0.0, 3.0, 0.0);
        let mean = gaussian_conditional_means(&m, sp(-0.2, 3.0)).unwrap();
        assert!((mean.profit + 0.2).abs() < 1e-12);
        assert!((mean.welfare - 0.3).abs() < 1e-12);
        assert!(bayes_policy_decide(&m, a(0.5), sp(-0.2, 3.0)).unwrap());
        // the plug-in rule sees composite 1.4 and also accepts; at alpha = 0.1
        // the two disagree
        let alpha = a(0.1);
        assert!(plugin_policy_decide(alpha, sp(-0.2, 3.0)));
        assert!(!bayes_policy_decide(&m, alpha, sp(-0.2, 3.0)).unwrap());
    }

    #[test]
    fn apply_policy_examples() {
        let c = Cohort::from_pairs(&[(1.0, 0.0), (-1.0, 5.0), (1.0, -3.0)])
            .unwrap()
            .with_predicted(vec![sp(0.0, 0.0), sp(0.0, -1.0), sp(0.0, 2.0)])
            .unwrap();
        let exact = apply_policy(&ThresholdPolicy::new(a(0.0), ScoreSource::TrueScores), &c).unwrap();
        assert_eq!(exact.as_slice(), &[1.0, 0.0, 1.0]);
        let plug = apply_policy(&ThresholdPolicy::new(a(1.0), ScoreSource::PredictedScores), &c).unwrap();
        assert_eq!(plug.as_slice(), &[1.0, 0.0, 1.0]);

        let positive = Cohort::from_pairs(&[(0.1, -9.0), (2.0, 0.0)]).unwrap();
        let all = apply_policy(&ThresholdPolicy::new(a(0.0), ScoreSource::TrueScores), &positive).unwrap();
        assert_eq!(all.as_slice(), &[1.0, 1.0]);

        let missing = apply_policy(&ThresholdPolicy::new(a(0.5), ScoreSource::PredictedScores), &positive);
        assert!(matches!(missing, Err(Error::InvalidArgument { .. })));
    }

    #[test]
    fn bayes_on_calibrated_predictions_equals_plugin() {
        let m = model(1.0, 2.0, 0.4, 1.5, 0.5);
        let raw = [sp(0.3, -1.0), sp(-2.0, 2.5), sp(1.0, 0.1), sp(-0.4, 0.4)];
        let calibrated: Vec<ScorePair> = raw
            .iter()
            .map(|&s| gaussian_conditional_means(&m, s).unwrap())
            .collect();
        for k in 0..=20 {
            let alpha = a(k as f64 / 20.0);
            for (r, c) in raw.iter().zip(&calibrated) {
                assert_eq!(
                    bayes_policy_decide(&m, alpha, *r).unwrap(),
                    plugin_policy_decide(alpha, *c)
                );
            }
        }
    }

    #[test]
    fn zero_noise_bayes_equals_exact() {
        let m = model(1.0, 1.0, 0.5, 0.0, 0.0);
        for &(p, w) in &[(0.2, -0.5), (-1.0, 0.9), (0.0, 0.0)] {
            for k in 0..=10 {
                let alpha = a(k as f64 / 10.0);
                assert_eq!(
                    bayes_policy_decide(&m, alpha, sp(p, w)).unwrap(),
                    exact_policy_decide(alpha, sp(p, w))
                );
            }
        }
    }

    proptest! {
        #[test]
        fn decisions_invariant_under_positive_scaling(p in -10.0..10.0f64, w in -10.0..10.0f64, c in 0.01..100.0f64, k in 0usize..=20) {
            let alpha = a(k as f64 / 20.0);
            let s = sp(p, w);
            prop_assume!(s.composite(alpha).abs() > 1e-9);
            prop_assert_eq!(exact_policy_decide(alpha, s), exact_policy_decide(alpha, s.scaled(c)));
        }
    }
}
