use std::path::PathBuf;

use clap::Args;
use pareto_welfare::frontier::{dominance_gap, mean_gap, uniform_alpha_grid, DEFAULT_GRID_POINTS};
use pareto_welfare::simulation::{
    mean_and_se, optimal_expected_alpha_utility, plugin_utility_lower_bound, run_trials, sigma_y,
    GaussianModel, TrialReport,
};
use pareto_welfare::TradeoffWeight;
use serde::{Deserialize, Serialize};

use crate::config::{default_out, overlay, require_at_least};
use crate::error::Result;
use crate::io::{ensure_dir, write_float_csv, write_json};

/// Monte Carlo frontier trials on correlated Gaussian scores.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// Welfare score standard deviation [default: 1]
    #[arg(long)]
    pub sigma_w: Option<f64>,
    /// Profit score standard deviation [default: 1]
    #[arg(long)]
    pub sigma_p: Option<f64>,
    /// Correlation of welfare and profit scores [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Welfare prediction noise standard deviation [default: 1]
    #[arg(long)]
    pub noise_w: Option<f64>,
    /// Profit prediction noise standard deviation [default: 1]
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// Drive both noise terms from one shared normal draw [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dependent_noise: Option<bool>,
    /// Individuals per trial [default: 5000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of trials [default: 100]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Points in the uniform alpha grid [default: 101]
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub model: GaussianModel,
    pub n: usize,
    pub trials: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl SimulateArgs {
    pub fn resolve(mut self, mut file: SimulateArgs) -> Result<SimulateConfig> {
        overlay!(self, file; sigma_w, sigma_p, rho, noise_w, noise_p, dependent_noise, n, trials, grid_points, seed, out);
        let model = GaussianModel::new(
            self.sigma_w.unwrap_or(1.0),
            self.sigma_p.unwrap_or(1.0),
            self.rho.unwrap_or(0.0),
            self.noise_w.unwrap_or(1.0),
            self.noise_p.unwrap_or(1.0),
            !self.dependent_noise.unwrap_or(false),
        )?;
        Ok(SimulateConfig {
            model,
            n: require_at_least("n", self.n.unwrap_or(5000), 1)?,
            trials: require_at_least("trials", self.trials.unwrap_or(100), 1)?,
            grid_points: require_at_least("grid_points", self.grid_points.unwrap_or(DEFAULT_GRID_POINTS), 2)?,
            seed: self.seed.unwrap_or(0),
            out: self.out.unwrap_or_else(default_out),
        })
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub model: GaussianModel,
    pub n: usize,
    pub trials: usize,
    pub grid_points: usize,
    pub seed: u64,
    /// (trial, alpha) pairs where the realized gap left `[0, l1 bound]`.
    pub l1_bound_violations: usize,
    /// Trial mean of the mean dominance gap of the plug-in frontier.
    pub mean_dominance_gap: f64,
    pub mean_dominance_gap_se: f64,
    /// Mean realized plug-in alpha-utility at alpha = 0.5, when on the grid.
    pub realized_utility_at_half: Option<f64>,
    pub realized_utility_at_half_se: Option<f64>,
}

/// Per-alpha statistics across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub alpha: f64,
    pub sigma_y: f64,
    pub optimal_utility: f64,
    pub lower_bound: f64,
    pub mean_realized_utility: f64,
    pub realized_se: f64,
    pub mean_l1_bound: f64,
    pub mean_exact_utility: f64,
    pub exact_se: f64,
    pub l1_violations: usize,
}

pub fn bound_rows(config: &SimulateConfig, reports: &[TrialReport]) -> Result<Vec<BoundRow>> {
    let grid = uniform_alpha_grid(config.grid_points);
    grid.iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let checks: Vec<_> = reports.iter().map(|r| r.per_alpha_bound_check[i]).collect();
            let realized: Vec<f64> = checks.iter().map(|c| c.realized_utility).collect();
            let exact: Vec<f64> = checks.iter().map(|c| c.optimal_utility).collect();
            let l1: Vec<f64> = checks.iter().map(|c| c.l1_bound).collect();
            let (mr, sr) = mean_and_se(&realized);
            let (me, se) = mean_and_se(&exact);
            Ok(BoundRow {
                alpha: alpha.value(),
                sigma_y: sigma_y(&config.model, alpha)?,
                optimal_utility: optimal_expected_alpha_utility(&config.model, alpha)?,
                lower_bound: plugin_utility_lower_bound(&config.model, alpha)?,
                mean_realized_utility: mr,
                realized_se: sr,
                mean_l1_bound: mean_and_se(&l1).0,
                mean_exact_utility: me,
                exact_se: se,
                l1_violations: checks.iter().filter(|c| !c.within_l1_bound()).count(),
            })
        })
        .collect()
}

/// Runs the trials and writes `exact_frontier.csv`, `trial_<k>_frontier.csv`,
/// `bounds.csv` and `summary.json`.
pub fn run(config: &SimulateConfig) -> Result<SimulateSummary> {
    let grid = uniform_alpha_grid(config.grid_points);
    let reports = run_trials(&config.model, config.n, config.trials, &grid, config.seed)?;
    ensure_dir(&config.out)?;

    let header = ["alpha", "profit_utility", "welfare_utility"];
    let t = reports.len() as f64;
    let exact_rows = grid.iter().enumerate().map(|(i, a)| {
        let (mut p, mut w) = (0.0, 0.0);
        for r in &reports {
            p += r.exact_curve.points[i].utility.profit_utility;
            w += r.exact_curve.points[i].utility.welfare_utility;
        }
        vec![a.value(), p / t, w / t]
    });
    write_float_csv(&config.out.join("exact_frontier.csv"), &header, exact_rows)?;
    for (k, r) in reports.iter().enumerate() {
        let rows = r.empirical_curve.points.iter().map(|pt| {
            vec![pt.alpha.value(), pt.utility.profit_utility, pt.utility.welfare_utility]
        });
        write_float_csv(&config.out.join(format!("trial_{k}_frontier.csv")), &header, rows)?;
    }

    let rows = bound_rows(config, &reports)?;
    write_float_csv(
        &config.out.join("bounds.csv"),
        &[
            "alpha",
            "sigma_y",
            "optimal_utility",
            "lower_bound",
            "mean_realized_utility",
            "mean_l1_bound",
            "realized_se",
            "mean_exact_utility",
            "exact_se",
        ],
        rows.iter().map(|b| {
            vec![
                b.alpha,
                b.sigma_y,
                b.optimal_utility,
                b.lower_bound,
                b.mean_realized_utility,
                b.mean_l1_bound,
                b.realized_se,
                b.mean_exact_utility,
                b.exact_se,
            ]
        }),
    )?;

    let gaps = reports
        .iter()
        .map(|r| dominance_gap(&r.exact_curve, &r.empirical_curve).map(|g| mean_gap(&g)))
        .collect::<pareto_welfare::Result<Vec<_>>>()?;
    let (gap_mean, gap_se) = mean_and_se(&gaps);
    let half = TradeoffWeight::new(0.5)?;
    let half_row = rows.iter().find(|b| b.alpha == half.value());
    let summary = SimulateSummary {
        model: config.model,
        n: config.n,
        trials: config.trials,
        grid_points: config.grid_points,
        seed: config.seed,
        l1_bound_violations: rows.iter().map(|b| b.l1_violations).sum(),
        mean_dominance_gap: gap_mean,
        mean_dominance_gap_se: gap_se,
        realized_utility_at_half: half_row.map(|b| b.mean_realized_utility),
        realized_utility_at_half_se: half_row.map(|b| b.realized_se),
    };
    write_json(&config.out.join("summary.json"), &summary)?;
    Ok(summary)
}
