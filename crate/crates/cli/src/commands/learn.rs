use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use pareto_welfare::frontier::{
    dominance_gap, mean_gap, sweep_frontier, uniform_alpha_grid, ParetoCurve, DEFAULT_GRID_POINTS,
};
use pareto_welfare::learning::{
    abalone_scores, default_lambda_grid, learn_score_functions, resolve_features, train_eval_split,
    AbaloneRecord, LearnConfig, LearnedScores, Sex,
};
use pareto_welfare::policies::ScoreSource;
use pareto_welfare::simulation::derive_seed;
use pareto_welfare::ScoreSet;
use serde::{Deserialize, Serialize};

use crate::config::{default_out, overlay, require_at_least};
use crate::error::{CliError, Result};
use crate::io::{ensure_dir, write_float_csv, write_json};

/// Ridge score learning on abalone-schema data.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnArgs {
    /// Abalone CSV (9 columns, header optional)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated feature subset, or `all` [default: all]
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Training rows to keep after the split [default: all]
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Comma-separated ridge penalties [default: 1e-8,1e-7,...,1e2]
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Cross-validation folds [default: 4]
    #[arg(long)]
    pub folds: Option<usize>,
    /// Fraction of rows in the training split [default: 0.8]
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Points in the uniform alpha grid [default: 101]
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Subtract the training mean from profit scores [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub center_scores: Option<bool>,
    /// Seed for the split, subsample and folds [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnCommandConfig {
    pub input: PathBuf,
    pub learn: LearnConfig,
    pub train_fraction: f64,
    pub grid_points: usize,
    pub out: PathBuf,
}

impl LearnArgs {
    pub fn resolve(mut self, mut file: LearnArgs) -> Result<LearnCommandConfig> {
        overlay!(self, file; input, features, subsample, lambda_grid, folds, train_fraction, grid_points, center_scores, seed, out);
        let features = resolve_features(&self.features.unwrap_or_else(|| vec!["all".into()]))?;
        let lambda_grid = self.lambda_grid.unwrap_or_else(default_lambda_grid);
        let train_fraction = self.train_fraction.unwrap_or(0.8);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(CliError::arg("train_fraction", format!("must lie in (0, 1), got {train_fraction}")));
        }
        Ok(LearnCommandConfig {
            input: self.input.ok_or_else(|| CliError::arg("input", "an abalone CSV is required"))?,
            learn: LearnConfig {
                features,
                lambda_grid,
                folds: require_at_least("folds", self.folds.unwrap_or(4), 2)?,
                train_subsample: self.subsample,
                seed: self.seed.unwrap_or(0),
                center_scores: self.center_scores.unwrap_or(false),
            },
            train_fraction,
            grid_points: require_at_least("grid_points", self.grid_points.unwrap_or(DEFAULT_GRID_POINTS), 2)?,
            out: self.out.unwrap_or_else(default_out),
        })
    }
}

/// Reads abalone records; a first row whose sex field is not `F`, `M` or
/// `I` is taken as a header.
pub fn read_abalone(path: &Path) -> Result<Vec<AbaloneRecord>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let fields: Vec<&str> = row.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && fields.first().is_none_or(|f| f.parse::<Sex>().is_err()) {
            continue;
        }
        let rec = AbaloneRecord::from_fields(&fields)
            .map_err(|e| CliError::schema(path, format!("row {}: {e}", i + 1)))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CliError::schema(path, "no data rows"));
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub records: usize,
    pub welfare_scale: f64,
    pub mean_profit: f64,
    pub mean_welfare: f64,
    pub correlation: f64,
}

/// Score statistics over the whole dataset, with the welfare scale fitted
/// on all rows.
pub fn dataset_stats(records: &[AbaloneRecord]) -> Result<DatasetStats> {
    let (scores, c) = abalone_scores(records)?;
    let n = scores.len() as f64;
    let mp = scores.iter().map(|s| s.profit).sum::<f64>() / n;
    let mw = scores.iter().map(|s| s.welfare).sum::<f64>() / n;
    let (mut spw, mut spp, mut sww) = (0.0, 0.0, 0.0);
    for s in &scores {
        spw += (s.profit - mp) * (s.welfare - mw);
        spp += (s.profit - mp).powi(2);
        sww += (s.welfare - mw).powi(2);
    }
    Ok(DatasetStats {
        records: records.len(),
        welfare_scale: c,
        mean_profit: mp,
        mean_welfare: mw,
        correlation: spw / (spp * sww).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub features: Vec<String>,
    pub train_size: usize,
    pub eval_size: usize,
    pub folds: usize,
    pub lambda_grid: Vec<f64>,
    pub profit_lambda: f64,
    pub welfare_lambda: f64,
    pub profit_cv_mae: Vec<f64>,
    pub welfare_cv_mae: Vec<f64>,
    pub welfare_scale: f64,
    pub profit_offset: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaeReport {
    pub profit_mae: f64,
    pub welfare_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSummary {
    pub dataset: DatasetStats,
    pub hyperparameters: Hyperparameters,
    pub mae: MaeReport,
    pub mean_dominance_gap: f64,
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

/// Splits, learns and scores in memory without writing files.
pub fn learn(config: &LearnCommandConfig, records: &[AbaloneRecord]) -> Result<(LearnedScores, usize)> {
    let (tr, ev) = train_eval_split(records.len(), config.train_fraction, derive_seed(config.learn.seed, 2))?;
    let train: Vec<AbaloneRecord> = tr.iter().map(|&i| records[i]).collect();
    let eval: Vec<AbaloneRecord> = ev.iter().map(|&i| records[i]).collect();
    Ok((learn_score_functions(&train, &eval, &config.learn)?, eval.len()))
}

/// Writes `scored_cohort.csv`, `hyperparameters.json`, `mae.json`,
/// `empirical_frontier.csv`, `exact_frontier.csv` and `learn_summary.json`.
pub fn run(config: &LearnCommandConfig) -> Result<LearnSummary> {
    let records = read_abalone(&config.input)?;
    let dataset = dataset_stats(&records)?;
    let (learned, eval_size) = learn(config, &records)?;
    ensure_dir(&config.out)?;

    let cohort = &learned.cohort;
    let predicted = cohort.scores(ScoreSet::PredictedScores)?;
    write_float_csv(
        &config.out.join("scored_cohort.csv"),
        &["p", "w", "p_hat", "w_hat"],
        cohort
            .true_scores()
            .iter()
            .zip(predicted)
            .map(|(t, h)| vec![t.profit, t.welfare, h.profit, h.welfare]),
    )?;

    let hyperparameters = Hyperparameters {
        features: config.learn.features.clone(),
        train_size: learned.train_size,
        eval_size,
        folds: config.learn.folds,
        lambda_grid: config.learn.lambda_grid.clone(),
        profit_lambda: learned.profit.lambda,
        welfare_lambda: learned.welfare.lambda,
        profit_cv_mae: learned.profit.cv_mae.clone(),
        welfare_cv_mae: learned.welfare.cv_mae.clone(),
        welfare_scale: learned.welfare_scale,
        profit_offset: learned.profit_offset,
        seed: config.learn.seed,
    };
    write_json(&config.out.join("hyperparameters.json"), &hyperparameters)?;
    let mae = MaeReport {
        profit_mae: learned.profit_mae,
        welfare_mae: learned.welfare_mae,
    };
    write_json(&config.out.join("mae.json"), &mae)?;

    let grid = uniform_alpha_grid(config.grid_points);
    let empirical = sweep_frontier(cohort, ScoreSource::PredictedScores, &grid, ScoreSet::TrueScores)?;
    let exact = sweep_frontier(cohort, ScoreSource::TrueScores, &grid, ScoreSet::TrueScores)?;
    write_curve(&config.out.join("empirical_frontier.csv"), &empirical)?;
    write_curve(&config.out.join("exact_frontier.csv"), &exact)?;

    let summary = LearnSummary {
        dataset,
        hyperparameters,
        mae,
        mean_dominance_gap: mean_gap(&dominance_gap(&exact, &empirical)?),
    };
    write_json(&config.out.join("learn_summary.json"), &summary)?;
    Ok(summary)
}
