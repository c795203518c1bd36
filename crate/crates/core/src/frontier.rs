//! Pareto curves traced by sweeping the trade-off weight, their upper
//! concave envelopes, and the geometric diagnostics used to compare exact and
//! empirical frontiers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    alpha_utility, evaluate_utilities, Cohort, DecisionVector, ScoreSet, TradeoffWeight,
    UtilityPoint,
};
use crate::policies::{apply_policy, ScoreSource, ThresholdPolicy};

/// Number of points in the default alpha grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// Largest cohort [`brute_force_frontier`] will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// `k` uniformly spaced weights covering `[0, 1]` (a single point is `alpha = 0`).
pub fn uniform_alpha_grid(k: usize) -> Vec<TradeoffWeight> {
    match k {
        0 => Vec::new(),
        1 => vec![TradeoffWeight::PROFIT],
        _ => (0..k)
            .map(|i| TradeoffWeight::new(i as f64 / (k - 1) as f64).expect("grid point in [0, 1]"))
            .collect(),
    }
}

fn validate_grid(grid: &[TradeoffWeight]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::arg("alpha_grid", "grid must not be empty"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1].value() <= w[0].value()) {
        return Err(Error::arg(
            "alpha_grid",
            format!("must be strictly increasing ({} then {})", w[0].value(), w[1].value()),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: TradeoffWeight,
    pub utility: UtilityPoint,
}

/// Utilities of the alpha-threshold policies over a grid of weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoCurve {
    pub points: Vec<CurvePoint>,
    pub score_source: ScoreSource,
    pub eval_with: ScoreSet,
    pub cohort_fingerprint: u64,
}

impl ParetoCurve {
    pub fn alphas(&self) -> impl Iterator<Item = TradeoffWeight> + '_ {
        self.points.iter().map(|p| p.alpha)
    }

    pub fn utilities(&self) -> impl Iterator<Item = UtilityPoint> + '_ {
        self.points.iter().map(|p| p.utility)
    }

    /// `(profit_utility, welfare_utility)` pairs in alpha order.
    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.utilities()
            .map(|u| (u.profit_utility, u.welfare_utility))
            .collect()
    }

    /// Profit utility non-increasing and welfare utility non-decreasing in
    /// alpha. Holds exactly whenever the thresholded scores are the
    /// evaluation scores; realized plug-in curves may violate it.
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| {
            w[1].utility.profit_utility <= w[0].utility.profit_utility
                && w[1].utility.welfare_utility >= w[0].utility.welfare_utility
        })
    }
}

/// Applies the alpha-threshold policy on `source` for each grid weight and
/// records utilities measured with `eval_with` scores.
pub fn sweep_frontier(
    cohort: &Cohort,
    source: ScoreSource,
    alpha_grid: &[TradeoffWeight],
    eval_with: ScoreSet,
) -> Result<ParetoCurve> {
    validate_grid(alpha_grid)?;
    cohort.scores(eval_with)?;
    let points = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let decisions = apply_policy(&ThresholdPolicy::new(alpha, source), cohort)?;
            let utility = evaluate_utilities(cohort, &decisions, eval_with)?;
            Ok(CurvePoint { alpha, utility })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParetoCurve {
        points,
        score_source: source,
        eval_with,
        cohort_fingerprint: cohort.fingerprint(),
    })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper concave envelope of a planar point set, as vertices sorted by `x`.
///
/// Points sharing an `x` keep only the highest `y`; collinear interior
/// points are dropped.
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|next, kept| next.0 == kept.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Vertices `(profit, welfare)` of the upper concave envelope of the curve's
/// utility points.
pub fn upper_concave_envelope(curve: &ParetoCurve) -> Result<Vec<(f64, f64)>> {
    if curve.points.is_empty() {
        return Err(Error::arg("curve", "curve has no points"));
    }
    Ok(upper_hull(&curve.xy()))
}

/// Piecewise-linear interpolation on hull vertices; `None` outside their span.
fn interpolate(vertices: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = vertices.first()?;
    let last = vertices.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = vertices.partition_point(|v| v.0 < x);
    if k == 0 {
        return Some(first.1);
    }
    let (x0, y0) = vertices[k - 1];
    let (x1, y1) = vertices[k];
    if x1 == x0 {
        return Some(y1.max(y0));
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// The frontier as a function of profit: the largest welfare any mixture of
/// the curve's policies attains at profit at least `p`.
///
/// Constant at the maximal welfare left of the profit where it is attained,
/// the concave envelope up to the largest profit, undefined beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierFunction {
    vertices: Vec<(f64, f64)>,
    peak: usize,
}

impl FrontierFunction {
    pub fn new(curve: &ParetoCurve) -> Result<Self> {
        let vertices = upper_concave_envelope(curve)?;
        let peak = vertices
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        Ok(FrontierFunction { vertices, peak })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn p_min(&self) -> f64 {
        self.vertices[0].0
    }

    pub fn p_max(&self) -> f64 {
        self.vertices[self.vertices.len() - 1].0
    }

    pub fn w_max(&self) -> f64 {
        self.vertices[self.peak].1
    }

    /// `None` when `profit` exceeds the largest attainable profit.
    pub fn eval(&self, profit: f64) -> Option<f64> {
        let (px, wy) = self.vertices[self.peak];
        if profit <= px {
            return Some(wy);
        }
        let slack = 1e-12 * (1.0 + self.p_max().abs());
        if profit > self.p_max() + slack {
            return None;
        }
        interpolate(&self.vertices[self.peak..], profit.min(self.p_max()))
    }
}

/// Summary geometry of a frontier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierDiagnostics {
    pub p_min: f64,
    pub p_max: f64,
    pub w_max: f64,
    /// Largest vertical distance from a swept point down from the upper
    /// concave envelope; zero for a concave curve.
    pub concavity_violation: f64,
    pub concavity_tolerance: f64,
    pub violates_concavity: bool,
    pub dominance_gaps: Vec<f64>,
}

/// Measures how far the swept points fall below their concave envelope.
pub fn check_concavity(curve: &ParetoCurve, tol: f64) -> Result<FrontierDiagnostics> {
    if curve.points.len() < 3 {
        return Err(Error::arg(
            "curve",
            format!("concavity needs at least 3 points, got {}", curve.points.len()),
        ));
    }
    let f = FrontierFunction::new(curve)?;
    let violation = curve
        .xy()
        .iter()
        .filter_map(|&(p, w)| interpolate(f.vertices(), p).map(|g| g - w))
        .fold(0.0f64, f64::max);
    Ok(FrontierDiagnostics {
        p_min: f.p_min(),
        p_max: f.p_max(),
        w_max: f.w_max(),
        concavity_violation: violation,
        concavity_tolerance: tol,
        violates_concavity: violation > tol,
        dominance_gaps: Vec::new(),
    })
}

/// Distance of one empirical point below the exact frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceGap {
    pub alpha: TradeoffWeight,
    pub profit_utility: f64,
    pub welfare_utility: f64,
    /// `g_exact(profit) - welfare`; `None` when the point's profit lies
    /// beyond the exact frontier's largest profit.
    pub gap: Option<f64>,
}

impl DominanceGap {
    pub fn is_infeasible(&self) -> bool {
        self.gap.is_none()
    }
}

/// Gap between the exact frontier function and each empirical point.
/// Nonnegative gaps mean the empirical point is dominated.
pub fn dominance_gap(exact: &ParetoCurve, empirical: &ParetoCurve) -> Result<Vec<DominanceGap>> {
    if exact.cohort_fingerprint != empirical.cohort_fingerprint {
        return Err(Error::arg("empirical", "curves were built on different cohorts"));
    }
    if exact.eval_with != ScoreSet::TrueScores {
        return Err(Error::arg("exact", "exact curve must be evaluated with true scores"));
    }
    let f = FrontierFunction::new(exact)?;
    Ok(empirical
        .points
        .iter()
        .map(|pt| DominanceGap {
            alpha: pt.alpha,
            profit_utility: pt.utility.profit_utility,
            welfare_utility: pt.utility.welfare_utility,
            gap: f
                .eval(pt.utility.profit_utility)
                .map(|g| g - pt.utility.welfare_utility),
        })
        .collect())
}

/// Mean of the feasible gaps.
pub fn mean_gap(gaps: &[DominanceGap]) -> f64 {
    let feasible: Vec<f64> = gaps.iter().filter_map(|g| g.gap).collect();
    feasible.iter().sum::<f64>() / feasible.len().max(1) as f64
}

/// Subset-enumeration oracle: for each alpha, the deterministic decision
/// vector maximizing alpha-utility on true scores.
///
/// Ties (within rounding) prefer the larger selected set, then the vector
/// that selects the lowest-indexed individual where the two differ.
pub fn brute_force_frontier(cohort: &Cohort, alpha_grid: &[TradeoffWeight]) -> Result<ParetoCurve> {
    validate_grid(alpha_grid)?;
    let n = cohort.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::arg(
            "cohort",
            format!(
                "brute force enumerates 2^n subsets and is limited to n <= {BRUTE_FORCE_MAX_N} \
                 (got n = {n}); use sweep_frontier for larger cohorts"
            ),
        ));
    }
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            let decisions = brute_force_decisions(cohort, alpha);
            let utility = evaluate_utilities(cohort, &decisions, ScoreSet::TrueScores)?;
            Ok(CurvePoint { alpha, utility })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParetoCurve {
        points,
        score_source: ScoreSource::TrueScores,
        eval_with: ScoreSet::TrueScores,
        cohort_fingerprint: cohort.fingerprint(),
    })
}

/// True iff mask `a` beats mask `b` on the tie-break order.
fn preferred(a: u32, b: u32) -> bool {
    match a.count_ones().cmp(&b.count_ones()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let diff = a ^ b;
            diff != 0 && (a & diff & diff.wrapping_neg()) != 0
        }
    }
}

fn brute_force_decisions(cohort: &Cohort, alpha: TradeoffWeight) -> DecisionVector {
    let composite: Vec<f64> = cohort
        .true_scores()
        .iter()
        .map(|s| s.composite(alpha))
        .collect();
    let n = composite.len();
    let tol = 1e-12 * (1.0 + composite.iter().map(|c| c.abs()).sum::<f64>());
    let mut sums = vec![0.0f64; 1usize << n];
    let (mut best_mask, mut best) = (0u32, 0.0f64);
    for mask in 1u32..(1u32 << n) {
        let low = mask.trailing_zeros() as usize;
        let value = sums[(mask & (mask - 1)) as usize] + composite[low];
        sums[mask as usize] = value;
        if value > best + tol || ((value - best).abs() <= tol && preferred(mask, best_mask)) {
            best = value;
            best_mask = mask;
        }
    }
    DecisionVector::from_bools((0..n).map(|i| best_mask & (1 << i) != 0))
}

/// Best alpha-utility over all `2^n` deterministic decision vectors.
pub fn brute_force_max_alpha_utility(cohort: &Cohort, alpha: TradeoffWeight) -> Result<f64> {
    if cohort.len() > BRUTE_FORCE_MAX_N {
        return Err(Error::arg("cohort", "cohort too large for enumeration"));
    }
    let d = brute_force_decisions(cohort, alpha);
    Ok(alpha_utility(
        evaluate_utilities(cohort, &d, ScoreSet::TrueScores)?,
        alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScorePair;
    use proptest::prelude::*;

    fn w(x: f64) -> TradeoffWeight {
        TradeoffWeight::new(x).unwrap()
    }

    fn three() -> Cohort {
        Cohort::from_pairs(&[(1.0, -1.0), (-1.0, 2.0), (1.0, 1.0)]).unwrap()
    }

    fn curve_from(xy: &[(f64, f64)]) -> ParetoCurve {
        let k = xy.len();
        ParetoCurve {
            points: xy
                .iter()
                .enumerate()
                .map(|(i, &(p, wv))| CurvePoint {
                    alpha: w(if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 }),
                    utility: UtilityPoint::new(p, wv),
                })
                .collect(),
            score_source: ScoreSource::TrueScores,
            eval_with: ScoreSet::TrueScores,
            cohort_fingerprint: 0,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn sweep_three_individuals() {
        let c = three();
        let curve = sweep_frontier(&c, ScoreSource::TrueScores, &[w(0.0), w(0.5), w(1.0)], ScoreSet::TrueScores).unwrap();
        let expected = [(2.0 / 3.0, 0.0), (1.0 / 3.0, 2.0 / 3.0), (0.0, 1.0)];
        for (pt, (p, wv)) in curve.points.iter().zip(expected) {
            assert!(close(pt.utility.profit_utility, p) && close(pt.utility.welfare_utility, wv));
        }
        let brute = brute_force_frontier(&c, &[w(0.0), w(0.5), w(1.0)]).unwrap();
        assert_eq!(brute.points, curve.points);
    }

    #[test]
    fn single_individual_and_single_alpha() {
        let c = Cohort::from_pairs(&[(1.0, 1.0)]).unwrap();
        let curve = sweep_frontier(&c, ScoreSource::TrueScores, &uniform_alpha_grid(11), ScoreSet::TrueScores).unwrap();
        assert!(curve.utilities().all(|u| u == UtilityPoint::new(1.0, 1.0)));

        let c = three();
        let curve = sweep_frontier(&c, ScoreSource::TrueScores, &[w(0.0)], ScoreSet::TrueScores).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!(close(curve.points[0].utility.profit_utility, 2.0 / 3.0));
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let c = three();
        assert!(sweep_frontier(&c, ScoreSource::TrueScores, &[], ScoreSet::TrueScores).is_err());
        assert!(sweep_frontier(&c, ScoreSource::TrueScores, &[w(0.5), w(0.5)], ScoreSet::TrueScores).is_err());
        assert!(sweep_frontier(&c, ScoreSource::PredictedScores, &[w(0.5)], ScoreSet::TrueScores).is_err());
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(upper_hull(&[(0.0, 1.0), (1.0, 0.0)]), vec![(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(
            upper_hull(&[(0.0, 1.0), (0.5, 0.4), (1.0, 0.0)]),
            vec![(0.0, 1.0), (1.0, 0.0)]
        );
        let collinear = curve_from(&[(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]);
        let f = FrontierFunction::new(&collinear).unwrap();
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!(close(f.eval(p).unwrap(), 1.0 - p));
        }
        let d = check_concavity(&collinear, 0.0).unwrap();
        assert_eq!(d.concavity_violation, 0.0);
    }

    #[test]
    fn concavity_flags_convex_curve() {
        let bowed = curve_from(&[(0.0, 1.0), (0.5, 0.1), (1.0, 0.0)]);
        let d = check_concavity(&bowed, 1e-9).unwrap();
        assert!(close(d.concavity_violation, 0.4));
        assert!(d.violates_concavity);
        assert_eq!((d.p_min, d.p_max, d.w_max), (0.0, 1.0, 1.0));
        assert!(check_concavity(&curve_from(&[(0.0, 1.0), (1.0, 0.0)]), 0.0).is_err());
    }

    #[test]
    fn dominance_gap_examples() {
        let c = three();
        let grid = uniform_alpha_grid(11);
        let exact = sweep_frontier(&c, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores).unwrap();
        assert!(dominance_gap(&exact, &exact).unwrap().iter().all(|g| g.gap == Some(0.0)));

        let mut beyond = exact.clone();
        beyond.points[0].utility.profit_utility += 1.0;
        let gaps = dominance_gap(&exact, &beyond).unwrap();
        assert!(gaps[0].is_infeasible());
        assert!(gaps[1..].iter().all(|g| !g.is_infeasible()));

        let other = Cohort::from_pairs(&[(2.0, 2.0)]).unwrap();
        let foreign = sweep_frontier(&other, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores).unwrap();
        assert!(dominance_gap(&exact, &foreign).is_err());
    }

    #[test]
    fn frontier_function_extends_left_flat() {
        let f = FrontierFunction::new(&curve_from(&[(0.2, 0.9), (0.6, 0.5), (1.0, 0.0)])).unwrap();
        assert_eq!(f.eval(-3.0), Some(0.9));
        assert!(close(f.eval(0.4).unwrap(), 0.7));
        assert_eq!(f.eval(1.5), None);
    }

    #[test]
    fn brute_force_examples() {
        // composites at alpha = 0.5 are 0, 0.5, 1: {B, C} and {A, B, C} tie
        let c = three();
        let d = brute_force_decisions(&c, w(0.5));
        assert_eq!(d.as_slice(), &[1.0, 1.0, 1.0]);
        assert!(close(brute_force_max_alpha_utility(&c, w(0.5)).unwrap(), 0.5));

        let neg = Cohort::from_pairs(&[(-1.0, -1.0)]).unwrap();
        let curve = brute_force_frontier(&neg, &uniform_alpha_grid(5)).unwrap();
        assert!(curve.utilities().all(|u| u == UtilityPoint::new(0.0, 0.0)));

        let big = Cohort::new(vec![ScorePair::new(1.0, 1.0).unwrap(); 21]).unwrap();
        assert!(brute_force_frontier(&big, &[w(0.0)]).is_err());
    }

    #[test]
    fn tie_break_order() {
        assert!(preferred(0b111, 0b110));
        assert!(preferred(0b011, 0b110));
        assert!(!preferred(0b110, 0b011));
        assert!(!preferred(0b101, 0b101));
    }

    fn cohorts() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=12)
    }

    proptest! {
        #[test]
        fn sweep_matches_enumeration(pairs in cohorts()) {
            let c = Cohort::from_pairs(&pairs).unwrap();
            let grid = uniform_alpha_grid(21);
            let sweep = sweep_frontier(&c, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores).unwrap();
            let brute = brute_force_frontier(&c, &grid).unwrap();
            for (s, b) in sweep.points.iter().zip(&brute.points) {
                prop_assert_eq!(alpha_utility(s.utility, s.alpha), alpha_utility(b.utility, b.alpha));
            }
        }

        #[test]
        fn exact_curves_are_monotone_and_concave(pairs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..200)) {
            let c = Cohort::from_pairs(&pairs).unwrap();
            let curve = sweep_frontier(&c, ScoreSource::TrueScores, &uniform_alpha_grid(41), ScoreSet::TrueScores).unwrap();
            prop_assert!(curve.is_monotone());
            let d = check_concavity(&curve, 0.0).unwrap();
            prop_assert!(d.concavity_violation <= 1e-12);
        }

        #[test]
        fn envelope_is_concave_and_above_points(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..60)) {
            let hull = upper_hull(&pts);
            for win in hull.windows(3) {
                let s1 = (win[1].1 - win[0].1) / (win[1].0 - win[0].0);
                let s2 = (win[2].1 - win[1].1) / (win[2].0 - win[1].0);
                prop_assert!(s2 <= s1 + 1e-9);
            }
            for &(x, y) in &pts {
                let g = interpolate(&hull, x).unwrap();
                prop_assert!(g >= y - 1e-9);
            }
        }
    }
}
