use std::path::PathBuf;

use clap::Args;
use pareto_welfare::frontier::{uniform_alpha_grid, DEFAULT_GRID_POINTS};
use pareto_welfare::simulation::{
    optimal_expected_alpha_utility, plugin_utility_lower_bound, sigma_tilde_sq, sigma_y, GaussianModel,
};
use serde::{Deserialize, Serialize};

use crate::config::{default_out, overlay, require_at_least};
use crate::error::Result;
use crate::io::{ensure_dir, write_float_csv};

/// Closed-form plug-in lower bound over an (alpha, rho) grid.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundArgs {
    /// Welfare score standard deviation [default: 1]
    #[arg(long)]
    pub sigma_w: Option<f64>,
    /// Profit score standard deviation [default: 1]
    #[arg(long)]
    pub sigma_p: Option<f64>,
    /// Welfare noise standard deviation [default: 0.5]
    #[arg(long)]
    pub noise_w: Option<f64>,
    /// Profit noise standard deviation [default: 0.1]
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// Use the dependent-noise sub-Gaussian factor [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dependent_noise: Option<bool>,
    /// Points in the uniform alpha grid [default: 101]
    #[arg(long)]
    pub alpha_points: Option<usize>,
    /// Comma-separated correlations [default: -0.9,-0.8,...,0.9]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho_grid: Option<Vec<f64>>,
    /// Accepted for uniformity; the command is deterministic [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConfig {
    /// Model at `rho = 0`; each grid row substitutes its own correlation.
    pub model: GaussianModel,
    pub alpha_points: usize,
    pub rho_grid: Vec<f64>,
    pub out: PathBuf,
}

pub fn default_rho_grid() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 / 10.0).collect()
}

impl BoundArgs {
    pub fn resolve(mut self, mut file: BoundArgs) -> Result<BoundConfig> {
        overlay!(self, file; sigma_w, sigma_p, noise_w, noise_p, dependent_noise, alpha_points, rho_grid, seed, out);
        let model = GaussianModel::new(
            self.sigma_w.unwrap_or(1.0),
            self.sigma_p.unwrap_or(1.0),
            0.0,
            self.noise_w.unwrap_or(0.5),
            self.noise_p.unwrap_or(0.1),
            !self.dependent_noise.unwrap_or(false),
        )?;
        let rho_grid = self.rho_grid.unwrap_or_else(default_rho_grid);
        for &rho in &rho_grid {
            GaussianModel::new(
                model.sigma_w,
                model.sigma_p,
                rho,
                model.sigma_eps_w,
                model.sigma_eps_p,
                model.noise_independent,
            )?;
        }
        Ok(BoundConfig {
            model,
            alpha_points: require_at_least("alpha_points", self.alpha_points.unwrap_or(DEFAULT_GRID_POINTS), 2)?,
            rho_grid,
            out: self.out.unwrap_or_else(default_out),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub alpha: f64,
    pub rho: f64,
    pub sigma_y: f64,
    pub sigma_tilde_sq: f64,
    pub optimal_utility: f64,
    pub lower_bound: f64,
}

pub fn table(config: &BoundConfig) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for alpha in uniform_alpha_grid(config.alpha_points) {
        for &rho in &config.rho_grid {
            let m = GaussianModel { rho, ..config.model };
            rows.push(BoundRow {
                alpha: alpha.value(),
                rho,
                sigma_y: sigma_y(&m, alpha)?,
                sigma_tilde_sq: sigma_tilde_sq(&m, alpha),
                optimal_utility: optimal_expected_alpha_utility(&m, alpha)?,
                lower_bound: plugin_utility_lower_bound(&m, alpha)?,
            });
        }
    }
    Ok(rows)
}

/// Writes `lower_bound.csv`.
pub fn run(config: &BoundConfig) -> Result<Vec<BoundRow>> {
    let rows = table(config)?;
    ensure_dir(&config.out)?;
    write_float_csv(
        &config.out.join("lower_bound.csv"),
        &["alpha", "rho", "sigma_y", "sigma_tilde_sq", "optimal_utility", "lower_bound"],
        rows.iter().map(|r| {
            vec![r.alpha, r.rho, r.sigma_y, r.sigma_tilde_sq, r.optimal_utility, r.lower_bound]
        }),
    )?;
    Ok(rows)
}
