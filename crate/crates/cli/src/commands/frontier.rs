use std::path::{Path, PathBuf};

use clap::Args;
use pareto_welfare::frontier::{
    check_concavity, dominance_gap, mean_gap, sweep_frontier, uniform_alpha_grid, FrontierDiagnostics,
    ParetoCurve, DEFAULT_GRID_POINTS,
};
use pareto_welfare::policies::ScoreSource;
use pareto_welfare::{Cohort, ScorePair, ScoreSet};
use serde::{Deserialize, Serialize};

use crate::config::{default_out, overlay, require_at_least};
use crate::error::{CliError, Result};
use crate::io::{ensure_dir, write_float_csv, write_json, Table};

/// Views at which the derived profit score is zero.
pub const VIEWS_BREAK_EVEN: f64 = 100_000.0;
/// Offset of the derived welfare score `offset - conspiracy_score`.
pub const CONSPIRACY_OFFSET: f64 = 0.95;

/// Frontier estimation from precomputed scores.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierArgs {
    /// CSV with columns `p_hat,w_hat` and optionally true scores `p,w`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Points in the uniform alpha grid [default: 101]
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Derive profit as ln((1 + views) / 100000) from this column
    #[arg(long)]
    pub profit_from_views: Option<String>,
    /// Derive predicted welfare as 0.95 - s from this column
    #[arg(long)]
    pub welfare_from_conspiracy: Option<String>,
    /// Accepted for uniformity; the command is deterministic [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierConfig {
    pub input: PathBuf,
    pub grid_points: usize,
    pub profit_from_views: Option<String>,
    pub welfare_from_conspiracy: Option<String>,
    pub out: PathBuf,
}

impl FrontierArgs {
    pub fn resolve(mut self, mut file: FrontierArgs) -> Result<FrontierConfig> {
        overlay!(self, file; input, grid_points, profit_from_views, welfare_from_conspiracy, seed, out);
        Ok(FrontierConfig {
            input: self.input.ok_or_else(|| CliError::arg("input", "an input CSV is required"))?,
            grid_points: require_at_least("grid_points", self.grid_points.unwrap_or(DEFAULT_GRID_POINTS), 2)?,
            profit_from_views: self.profit_from_views,
            welfare_from_conspiracy: self.welfare_from_conspiracy,
            out: self.out.unwrap_or_else(default_out),
        })
    }
}

/// `ln((1 + views) / 100000)`.
pub fn profit_from_views(views: f64) -> f64 {
    ((1.0 + views) / VIEWS_BREAK_EVEN).ln()
}

/// `0.95 - s`.
pub fn welfare_from_conspiracy(s: f64) -> f64 {
    CONSPIRACY_OFFSET - s
}

fn pairs(p: &[f64], w: &[f64]) -> Result<Vec<ScorePair>> {
    p.iter()
        .zip(w)
        .map(|(&p, &w)| ScorePair::new(p, w).map_err(CliError::from))
        .collect()
}

/// Predicted and (when present) true scores read from a table.
pub fn ingest(table: &Table, config: &FrontierConfig) -> Result<(Vec<ScorePair>, Option<Vec<ScorePair>>)> {
    let (p_hat, p_known) = match &config.profit_from_views {
        Some(col) => {
            let views = table.floats(col)?;
            if let Some(v) = views.iter().find(|v| !(**v >= 0.0)) {
                return Err(CliError::schema(&table.path, format!("column `{col}` has negative views {v}")));
            }
            (views.into_iter().map(profit_from_views).collect::<Vec<_>>(), true)
        }
        None => (table.floats("p_hat")?, false),
    };
    let w_hat = match &config.welfare_from_conspiracy {
        Some(col) => table.floats(col)?.into_iter().map(welfare_from_conspiracy).collect(),
        None => table.floats("w_hat")?,
    };
    let predicted = pairs(&p_hat, &w_hat)?;
    let truth = if table.has_column("w") && (p_known || table.has_column("p")) {
        let p = if table.has_column("p") { table.floats("p")? } else { p_hat.clone() };
        Some(pairs(&p, &table.floats("w")?)?)
    } else {
        None
    };
    Ok((predicted, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSummary {
    pub individuals: usize,
    pub has_true_scores: bool,
    pub estimated_monotone: bool,
    pub estimated_geometry: Option<FrontierDiagnostics>,
    pub hindsight_geometry: Option<FrontierDiagnostics>,
    /// Mean gap of the realized curve below the hindsight frontier.
    pub realized_mean_dominance_gap: Option<f64>,
    pub realized_min_dominance_gap: Option<f64>,
    /// Realized points whose profit exceeds the hindsight frontier's range.
    pub realized_infeasible_points: Option<usize>,
}

fn write_curve(path: &Path, curve: &ParetoCurve) -> Result<()> {
    write_float_csv(
        path,
        &["alpha", "profit_utility", "welfare_utility"],
        curve.points.iter().map(|pt| {
            vec![pt.alpha.value(), pt.utility.profit_utility, pt.utility.welfare_utility]
        }),
    )
}

fn geometry(curve: &ParetoCurve) -> Result<Option<FrontierDiagnostics>> {
    if curve.points.len() < 3 {
        return Ok(None);
    }
    Ok(Some(check_concavity(curve, 1e-9)?))
}

/// Writes `estimated_frontier.csv`; with true scores also
/// `hindsight_frontier.csv` and `realized_frontier.csv`; and
/// `frontier_summary.json`.
pub fn run(config: &FrontierConfig) -> Result<FrontierSummary> {
    let table = Table::read(&config.input)?;
    if table.rows.is_empty() {
        return Err(CliError::schema(&config.input, "no data rows"));
    }
    let (predicted, truth) = ingest(&table, config)?;
    let grid = uniform_alpha_grid(config.grid_points);
    ensure_dir(&config.out)?;

    let estimated_cohort = Cohort::new(predicted.clone())?;
    let estimated = sweep_frontier(&estimated_cohort, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores)?;
    write_curve(&config.out.join("estimated_frontier.csv"), &estimated)?;

    let mut summary = FrontierSummary {
        individuals: predicted.len(),
        has_true_scores: truth.is_some(),
        estimated_monotone: estimated.is_monotone(),
        estimated_geometry: geometry(&estimated)?,
        hindsight_geometry: None,
        realized_mean_dominance_gap: None,
        realized_min_dominance_gap: None,
        realized_infeasible_points: None,
    };
    if let Some(truth) = truth {
        let cohort = Cohort::new(truth)?.with_predicted(predicted)?;
        let hindsight = sweep_frontier(&cohort, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores)?;
        let realized = sweep_frontier(&cohort, ScoreSource::PredictedScores, &grid, ScoreSet::TrueScores)?;
        write_curve(&config.out.join("hindsight_frontier.csv"), &hindsight)?;
        write_curve(&config.out.join("realized_frontier.csv"), &realized)?;
        let gaps = dominance_gap(&hindsight, &realized)?;
        summary.hindsight_geometry = geometry(&hindsight)?;
        summary.realized_mean_dominance_gap = Some(mean_gap(&gaps));
        summary.realized_min_dominance_gap = gaps.iter().filter_map(|g| g.gap).reduce(f64::min);
        summary.realized_infeasible_points = Some(gaps.iter().filter(|g| g.is_infeasible()).count());
    }
    write_json(&config.out.join("frontier_summary.json"), &summary)?;
    Ok(summary)
}
