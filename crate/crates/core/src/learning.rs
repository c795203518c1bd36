//! Ridge-regression score learners and the abalone profit/welfare scores.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cohort, ScorePair};
use crate::simulation::derive_seed;

/// Price of meat per gram.
pub const MEAT_PRICE_PER_GRAM: f64 = 0.25;
/// Price of shell per square centimetre.
pub const SHELL_PRICE_PER_CM2: f64 = 0.32;

/// Numeric feature columns in dataset order; `sex` expands to three
/// indicator columns.
pub const FEATURE_NAMES: [&str; 8] = [
    "sex",
    "length",
    "diameter",
    "height",
    "whole_weight",
    "shucked_weight",
    "viscera_weight",
    "shell_weight",
];

/// `10^-8, 10^-7, ..., 10^2`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-8..=2).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
    I,
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" => Ok(Sex::F),
            "M" | "m" => Ok(Sex::M),
            "I" | "i" => Ok(Sex::I),
            other => Err(Error::arg("sex", format!("expected F, M or I, got {other:?}"))),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Sex::F => "F",
            Sex::M => "M",
            Sex::I => "I",
        };
        f.write_str(c)
    }
}

/// One row of the UCI abalone dataset, in the dataset's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbaloneRecord {
    pub sex: Sex,
    pub length: f64,
    pub diameter: f64,
    pub height: f64,
    pub whole_weight: f64,
    pub shucked_weight: f64,
    pub viscera_weight: f64,
    pub shell_weight: f64,
    pub rings: u32,
}

impl AbaloneRecord {
    /// Parses the nine dataset fields in their standard order.
    pub fn from_fields(fields: &[&str]) -> Result<Self> {
        if fields.len() != 9 {
            return Err(Error::arg(
                "record",
                format!("expected 9 fields, got {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            let name = FEATURE_NAMES[i];
            let v: f64 = fields[i]
                .trim()
                .parse()
                .map_err(|_| Error::arg(name, format!("not a number: {:?}", fields[i])))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(name, format!("must be finite and nonnegative, got {v}")));
            }
            Ok(v)
        };
        let rings = fields[8]
            .trim()
            .parse::<u32>()
            .map_err(|_| Error::arg("rings", format!("not a nonnegative integer: {:?}", fields[8])))?;
        Ok(AbaloneRecord {
            sex: fields[0].parse()?,
            length: num(1)?,
            diameter: num(2)?,
            height: num(3)?,
            whole_weight: num(4)?,
            shucked_weight: num(5)?,
            viscera_weight: num(6)?,
            shell_weight: num(7)?,
            rings,
        })
    }

    fn numeric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "length" => self.length,
            "diameter" => self.diameter,
            "height" => self.height,
            "whole_weight" => self.whole_weight,
            "shucked_weight" => self.shucked_weight,
            "viscera_weight" => self.viscera_weight,
            "shell_weight" => self.shell_weight,
            _ => return None,
        })
    }

    /// Meat value plus shell value.
    pub fn raw_profit(&self) -> f64 {
        MEAT_PRICE_PER_GRAM * (200.0 * self.shucked_weight)
            + SHELL_PRICE_PER_CM2 * (20.0 * self.length) * (20.0 * self.diameter)
    }

    /// `ln(age / 10)` with age `rings + 1.5`.
    pub fn log_age_ratio(&self) -> f64 {
        ((self.rings as f64 + 1.5) / 10.0).ln()
    }
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Profit and welfare scores, with the welfare scale `c` chosen so both
/// scores have the same standard deviation over `records`.
pub fn abalone_scores(records: &[AbaloneRecord]) -> Result<(Vec<ScorePair>, f64)> {
    if records.is_empty() {
        return Err(Error::arg("records", "need at least one record"));
    }
    let p: Vec<f64> = records.iter().map(AbaloneRecord::raw_profit).collect();
    let l: Vec<f64> = records.iter().map(AbaloneRecord::log_age_ratio).collect();
    let sl = population_std(&l);
    if sl == 0.0 {
        return Err(Error::arg("records", "ring counts are constant; welfare scale is undefined"));
    }
    let c = population_std(&p) / sl;
    Ok((abalone_scores_with_scale(records, c), c))
}

/// Scores with a given welfare scale.
pub fn abalone_scores_with_scale(records: &[AbaloneRecord], c: f64) -> Vec<ScorePair> {
    records
        .iter()
        .map(|r| ScorePair {
            profit: r.raw_profit(),
            welfare: c * r.log_age_ratio(),
        })
        .collect()
}

/// Dense design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: DMatrix<f64>,
    pub column_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::arg("features", "matrix must have at least one row and column"));
        }
        if column_names.len() != values.ncols() {
            return Err(Error::arg("column_names", "one name per column required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("features", "entries must be finite"));
        }
        Ok(FeatureMatrix {
            values,
            column_names,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    /// The matrix restricted to `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select_rows(rows),
            column_names: self.column_names.clone(),
        }
    }
}

/// Expands `"all"` and validates feature names.
pub fn resolve_features(subset: &[String]) -> Result<Vec<String>> {
    if subset.is_empty() {
        return Err(Error::arg("features", "feature subset must not be empty"));
    }
    let mut out: Vec<String> = Vec::new();
    for name in subset {
        let name = name.trim();
        if name == "all" {
            out.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
        } else if FEATURE_NAMES.contains(&name) {
            out.push(name.to_string());
        } else {
            return Err(Error::arg(
                "features",
                format!("unknown feature {name:?}; expected one of {FEATURE_NAMES:?} or \"all\""),
            ));
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|n| seen.insert(n.clone()));
    Ok(out)
}

/// Builds the design matrix for a feature subset.
pub fn encode_features(records: &[AbaloneRecord], subset: &[String]) -> Result<FeatureMatrix> {
    if records.is_empty() {
        return Err(Error::arg("records", "need at least one record"));
    }
    let names = resolve_features(subset)?;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for name in &names {
        if name == "sex" {
            for (label, sex) in [("sex_F", Sex::F), ("sex_M", Sex::M), ("sex_I", Sex::I)] {
                let col = records.iter().map(|r| f64::from(u8::from(r.sex == sex))).collect();
                columns.push((label.to_string(), col));
            }
        } else {
            let col = records
                .iter()
                .map(|r| r.numeric(name).expect("name validated"))
                .collect();
            columns.push((name.clone(), col));
        }
    }
    let values = DMatrix::from_fn(records.len(), columns.len(), |i, j| columns[j].1[i]);
    FeatureMatrix::new(values, columns.into_iter().map(|(n, _)| n).collect())
}

/// Linear predictor fitted on standardized columns with an unpenalized
/// intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    /// Coefficients on standardized columns.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// Per-column `(mean, std)` of the training features. Constant columns
    /// have std 0 and weight 0.
    pub standardization: Vec<(f64, f64)>,
}

impl RidgeModel {
    fn standardized(&self, x: &FeatureMatrix, i: usize, j: usize) -> f64 {
        let (m, s) = self.standardization[j];
        if s > 0.0 {
            (x.values[(i, j)] - m) / s
        } else {
            0.0
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.weights.len() {
            return Err(Error::arg(
                "features",
                format!("model has {} columns, matrix has {}", self.weights.len(), x.cols()),
            ));
        }
        Ok((0..x.rows())
            .map(|i| {
                self.intercept
                    + (0..x.cols())
                        .map(|j| self.weights[j] * self.standardized(x, i, j))
                        .sum::<f64>()
            })
            .collect())
    }

    /// `||y - X beta - b||^2 + lambda ||beta||^2` in standardized coordinates,
    /// for arbitrary `weights` and `intercept`.
    pub fn penalized_objective(
        &self,
        x: &FeatureMatrix,
        y: &[f64],
        weights: &[f64],
        intercept: f64,
    ) -> f64 {
        let rss: f64 = (0..x.rows())
            .map(|i| {
                let f = intercept
                    + (0..x.cols())
                        .map(|j| weights[j] * self.standardized(x, i, j))
                        .sum::<f64>();
                (y[i] - f).powi(2)
            })
            .sum();
        rss + self.lambda * weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Closed-form ridge fit.
pub fn ridge_fit(x: &FeatureMatrix, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    let (n, d) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::arg("y", format!("expected {n} targets, got {}", y.len())));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::arg("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("y", "targets must be finite"));
    }
    let standardization: Vec<(f64, f64)> = (0..d)
        .map(|j| {
            let col: Vec<f64> = x.values.column(j).iter().copied().collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            (mean, population_std(&col))
        })
        .collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let active: Vec<usize> = (0..d).filter(|&j| standardization[j].1 > 0.0).collect();
    let mut weights = vec![0.0; d];
    if !active.is_empty() {
        let z = DMatrix::from_fn(n, active.len(), |i, k| {
            let j = active[k];
            (x.values[(i, j)] - standardization[j].0) / standardization[j].1
        });
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let mut gram = z.transpose() * &z;
        for k in 0..active.len() {
            gram[(k, k)] += lambda;
        }
        let rhs = z.transpose() * yc;
        let chol = gram.cholesky().ok_or_else(|| {
            Error::Numeric(format!(
                "ridge system is singular at lambda = {lambda}; use lambda > 0 for collinear or \
                 underdetermined features"
            ))
        })?;
        let beta = chol.solve(&rhs);
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric(format!(
                "ridge solution is not finite at lambda = {lambda}; use lambda > 0"
            )));
        }
        for (k, &j) in active.iter().enumerate() {
            weights[j] = beta[k];
        }
    }
    Ok(RidgeModel {
        weights,
        intercept: y_mean,
        lambda,
        standardization,
    })
}

/// `(1/n) sum |pred - truth|`.
pub fn mean_absolute_error(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::arg(
            "pred",
            format!("length {} differs from truth length {}", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(Error::arg("pred", "vectors must be non-empty"));
    }
    Ok(pred.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum::<f64>() / pred.len() as f64)
}

/// Outcome of cross-validated penalty selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFoldSelection {
    pub lambda: f64,
    pub model: RidgeModel,
    /// Mean held-out MAE per grid entry; infinite where a fold fit failed.
    pub cv_mae: Vec<f64>,
}

/// Seeded assignment of `n` rows to `k` folds of near-equal size.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// Picks the penalty with the lowest mean held-out MAE over `k` folds
/// (ties go to the larger penalty) and refits on all rows.
pub fn kfold_select(
    x: &FeatureMatrix,
    y: &[f64],
    lambda_grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<KFoldSelection> {
    let n = x.rows();
    if lambda_grid.is_empty() {
        return Err(Error::arg("lambda_grid", "grid must not be empty"));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::arg("lambda_grid", format!("penalties must be finite and >= 0, got {l}")));
    }
    if k < 2 {
        return Err(Error::arg("k", format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::arg("k", format!("{k} folds exceed {n} rows")));
    }
    if y.len() != n {
        return Err(Error::arg("y", format!("expected {n} targets, got {}", y.len())));
    }
    let folds = fold_assignment(n, k, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| folds[i] == f);
            (train, test)
        })
        .collect();
    let cv_mae: Vec<f64> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let mut total = 0.0;
            for (train, test) in &splits {
                let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let yte: Vec<f64> = test.iter().map(|&i| y[i]).collect();
                let fitted = ridge_fit(&x.select_rows(train), &ytr, lambda)
                    .and_then(|m| m.predict(&x.select_rows(test)));
                match fitted.and_then(|pred| mean_absolute_error(&pred, &yte)) {
                    Ok(mae) => total += mae,
                    Err(_) => return f64::INFINITY,
                }
            }
            total / k as f64
        })
        .collect();
    let mut best: Option<usize> = None;
    for (i, &mae) in cv_mae.iter().enumerate() {
        if !mae.is_finite() {
            continue;
        }
        best = match best {
            Some(b) if mae > cv_mae[b] => Some(b),
            Some(b) if mae == cv_mae[b] && lambda_grid[i] <= lambda_grid[b] => Some(b),
            _ => Some(i),
        };
    }
    let best = best.ok_or_else(|| {
        Error::Numeric("every penalty in the grid failed to fit; include a larger lambda".into())
    })?;
    let lambda = lambda_grid[best];
    Ok(KFoldSelection {
        lambda,
        model: ridge_fit(x, y, lambda)?,
        cv_mae,
    })
}

/// Settings for [`learn_score_functions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub features: Vec<String>,
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    /// Number of training rows to keep; `None` keeps all.
    pub train_subsample: Option<usize>,
    pub seed: u64,
    /// Subtract the training mean from profit scores.
    pub center_scores: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            features: vec!["all".into()],
            lambda_grid: default_lambda_grid(),
            folds: 4,
            train_subsample: None,
            seed: 0,
            center_scores: false,
        }
    }
}

/// Learned predictors and the evaluation cohort they produce.
#[derive(Debug, Clone)]
pub struct LearnedScores {
    /// True and predicted scores of the evaluation rows.
    pub cohort: Cohort,
    pub profit: KFoldSelection,
    pub welfare: KFoldSelection,
    pub profit_mae: f64,
    pub welfare_mae: f64,
    /// Welfare scale computed on the full training set.
    pub welfare_scale: f64,
    /// Subtracted from every profit score (0 unless centering).
    pub profit_offset: f64,
    pub train_size: usize,
}

/// Seeded split of `n` rows into a training part of `floor(n * train_fraction)`
/// rows and an evaluation part.
pub fn train_eval_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::arg("train_fraction", format!("must lie in (0, 1), got {train_fraction}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::arg("train_fraction", format!("leaves an empty split of {n} rows")));
    }
    let eval = order.split_off(n_train);
    Ok((order, eval))
}

/// Fits profit and welfare predictors on a (sub)sample of `train` and
/// scores `eval`.
///
/// The welfare scale and optional profit offset come from the full training
/// set and are reused on the evaluation rows.
pub fn learn_score_functions(
    train: &[AbaloneRecord],
    eval: &[AbaloneRecord],
    config: &LearnConfig,
) -> Result<LearnedScores> {
    if train.is_empty() || eval.is_empty() {
        return Err(Error::arg("records", "training and evaluation sets must be non-empty"));
    }
    let (train_scores, c) = abalone_scores(train)?;
    let profit_offset = if config.center_scores {
        train_scores.iter().map(|s| s.profit).sum::<f64>() / train.len() as f64
    } else {
        0.0
    };
    let shift = |s: ScorePair| ScorePair {
        profit: s.profit - profit_offset,
        welfare: s.welfare,
    };

    let size = config.train_subsample.unwrap_or(train.len());
    if size == 0 || size > train.len() {
        return Err(Error::arg(
            "train_subsample",
            format!("must lie in [1, {}], got {size}", train.len()),
        ));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0)));
    order.truncate(size);

    let sub: Vec<AbaloneRecord> = order.iter().map(|&i| train[i]).collect();
    let sub_scores: Vec<ScorePair> = order.iter().map(|&i| shift(train_scores[i])).collect();
    let x_train = encode_features(&sub, &config.features)?;
    let x_eval = encode_features(eval, &config.features)?;
    let yp: Vec<f64> = sub_scores.iter().map(|s| s.profit).collect();
    let yw: Vec<f64> = sub_scores.iter().map(|s| s.welfare).collect();

    let fold_seed = derive_seed(config.seed, 1);
    let profit = kfold_select(&x_train, &yp, &config.lambda_grid, config.folds, fold_seed)?;
    let welfare = kfold_select(&x_train, &yw, &config.lambda_grid, config.folds, fold_seed)?;

    let truth: Vec<ScorePair> = abalone_scores_with_scale(eval, c).into_iter().map(shift).collect();
    let p_hat = profit.model.predict(&x_eval)?;
    let w_hat = welfare.model.predict(&x_eval)?;
    let p_true: Vec<f64> = truth.iter().map(|s| s.profit).collect();
    let w_true: Vec<f64> = truth.iter().map(|s| s.welfare).collect();
    let profit_mae = mean_absolute_error(&p_hat, &p_true)?;
    let welfare_mae = mean_absolute_error(&w_hat, &w_true)?;
    let predicted = p_hat
        .iter()
        .zip(&w_hat)
        .map(|(&p, &w)| ScorePair::new(p, w))
        .collect::<Result<Vec<_>>>()?;
    let cohort = Cohort::new(truth)?.with_predicted(predicted)?;
    Ok(LearnedScores {
        cohort,
        profit,
        welfare,
        profit_mae,
        welfare_mae,
        welfare_scale: c,
        profit_offset,
        train_size: size,
    })
}
