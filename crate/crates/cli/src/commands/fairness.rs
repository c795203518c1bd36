use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pareto_welfare::fairness::{
    build_induced_welfare, epsilon_sweep, order_groups, repayment_profit_score,
    verify_fair_pareto_equivalence, GroupSample, InducedVariant, Mismatch, DEFAULT_RATE_RESOLUTION,
    DEFAULT_U_MINUS, DEFAULT_U_PLUS,
};
use pareto_welfare::Group;
use serde::{Deserialize, Serialize};

use crate::config::{default_out, overlay, require_at_least, require_nonnegative};
use crate::error::{CliError, Result};
use crate::io::{ensure_dir, fmt_f64, write_csv, write_float_csv, write_json, Table};

/// Mismatch locations kept per epsilon in the report.
const MAX_REPORTED_LOCATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Standard,
    Flipped,
}

impl From<Variant> for InducedVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Standard => InducedVariant::Standard,
            Variant::Flipped => InducedVariant::Flipped,
        }
    }
}

/// Demographic-parity constrained lending and its induced welfare scores.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FairnessArgs {
    /// CSV with `group,repay_prob[,count]` or `group,profit_score`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Gain from a repaid loan [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub u_plus: Option<f64>,
    /// Loss from a default [default: -4]
    #[arg(long, allow_negative_numbers = true)]
    pub u_minus: Option<f64>,
    /// Comma-separated increasing epsilon grid [default: 0,0.02,...,0.48]
    #[arg(long, value_delimiter = ',')]
    pub epsilon_grid: Option<Vec<f64>>,
    /// Points in the selection-rate grid [default: 1001]
    #[arg(long)]
    pub rate_resolution: Option<usize>,
    /// Which group carries the profit-dependent induced welfare [default: standard]
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Accepted for uniformity; the command is deterministic [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessConfig {
    pub input: PathBuf,
    pub u_plus: f64,
    pub u_minus: f64,
    pub epsilon_grid: Vec<f64>,
    pub rate_resolution: usize,
    pub variant: Variant,
    pub out: PathBuf,
}

pub fn default_epsilon_grid() -> Vec<f64> {
    (0..25).map(|k| 0.02 * k as f64).collect()
}

impl FairnessArgs {
    pub fn resolve(mut self, mut file: FairnessArgs) -> Result<FairnessConfig> {
        overlay!(self, file; input, u_plus, u_minus, epsilon_grid, rate_resolution, variant, seed, out);
        let epsilon_grid = self.epsilon_grid.unwrap_or_else(default_epsilon_grid);
        for &e in &epsilon_grid {
            require_nonnegative("epsilon_grid", e)?;
        }
        Ok(FairnessConfig {
            input: self.input.ok_or_else(|| CliError::arg("input", "a group-score CSV is required"))?,
            u_plus: self.u_plus.unwrap_or(DEFAULT_U_PLUS),
            u_minus: self.u_minus.unwrap_or(DEFAULT_U_MINUS),
            epsilon_grid,
            rate_resolution: require_at_least(
                "rate_resolution",
                self.rate_resolution.unwrap_or(DEFAULT_RATE_RESOLUTION),
                2,
            )?,
            variant: self.variant.unwrap_or(Variant::Standard),
            out: self.out.unwrap_or_else(default_out),
        })
    }
}

/// Two labelled groups, disadvantaged first.
#[derive(Debug, Clone)]
pub struct LabelledGroups {
    pub a: GroupSample,
    pub b: GroupSample,
    pub label_a: String,
    pub label_b: String,
}

impl LabelledGroups {
    pub fn label(&self, g: Group) -> &str {
        match g {
            Group::A => &self.label_a,
            Group::B => &self.label_b,
        }
    }
}

/// Reads per-individual profit scores for exactly two groups.
pub fn ingest(table: &Table, u_plus: f64, u_minus: f64) -> Result<LabelledGroups> {
    let labels = table.strings("group")?;
    let profits: Vec<f64> = if table.has_column("profit_score") {
        table.floats("profit_score")?
    } else {
        table
            .floats("repay_prob")?
            .into_iter()
            .map(|r| repayment_profit_score(r, u_plus, u_minus).map_err(CliError::from))
            .collect::<Result<_>>()?
    };
    let counts: Vec<usize> = if table.has_column("count") {
        table
            .strings("count")?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.parse().map_err(|_| {
                    CliError::schema(&table.path, format!("column `count` row {}: not a count: {c:?}", i + 1))
                })
            })
            .collect::<Result<_>>()?
    } else {
        vec![1; labels.len()]
    };
    let mut distinct: Vec<String> = Vec::new();
    for l in &labels {
        if !distinct.contains(l) {
            distinct.push(l.clone());
        }
    }
    if distinct.len() != 2 {
        return Err(CliError::arg(
            "group",
            format!("exactly 2 groups are required, found {}: {distinct:?}", distinct.len()),
        ));
    }
    let expand = |label: &str| -> Vec<f64> {
        labels
            .iter()
            .zip(&profits)
            .zip(&counts)
            .filter(|((l, _), _)| l.as_str() == label)
            .flat_map(|((_, &p), &c)| std::iter::repeat_n(p, c))
            .collect()
    };
    let (first, second) = GroupSample::pair(expand(&distinct[0]), expand(&distinct[1]))?;
    let (a, b, swapped) = order_groups(first, second);
    let (label_a, label_b) = if swapped {
        (distinct[1].clone(), distinct[0].clone())
    } else {
        (distinct[0].clone(), distinct[1].clone())
    };
    Ok(LabelledGroups { a, b, label_a, label_b })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceEntry {
    pub epsilon: f64,
    pub alpha: f64,
    pub individuals: usize,
    pub mismatches: usize,
    pub boundary_mismatches: usize,
    pub interior_mismatches: usize,
    pub sample_locations: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// Label of the disadvantaged group (A).
    pub group_a: String,
    pub group_b: String,
    pub variant: Variant,
    pub rate_resolution: usize,
    pub raw_violation_t_a: f64,
    pub raw_violation_t_b: f64,
    pub total_interior_mismatches: usize,
    pub entries: Vec<EquivalenceEntry>,
}

/// Writes `epsilon_sweep.csv`, `induced_welfare.csv` and
/// `equivalence_report.json`.
pub fn run(config: &FairnessConfig) -> Result<FairnessReport> {
    let table = Table::read(&config.input)?;
    if table.rows.is_empty() {
        return Err(CliError::schema(&config.input, "no data rows"));
    }
    let groups = ingest(&table, config.u_plus, config.u_minus)?;
    let sweep = epsilon_sweep(&groups.a, &groups.b, &config.epsilon_grid, config.rate_resolution)?;
    let spec = build_induced_welfare(&sweep, config.variant.into())?;
    ensure_dir(&config.out)?;

    write_float_csv(
        &config.out.join("epsilon_sweep.csv"),
        &[
            "epsilon",
            "t_A",
            "t_B",
            "beta_A",
            "beta_B",
            "profit",
            "alpha_eps",
            "t_A_projected",
            "t_B_projected",
            "boundary_prob_A",
            "boundary_prob_B",
        ],
        sweep.solutions.iter().enumerate().map(|(k, s)| {
            vec![
                s.epsilon,
                s.policy.t_a,
                s.policy.t_b,
                s.beta_a,
                s.beta_b,
                s.profit_utility,
                spec.alpha_of_eps[k],
                sweep.t_a_projected[k],
                sweep.t_b_projected[k],
                s.policy.boundary_prob_a,
                s.policy.boundary_prob_b,
            ]
        }),
    )?;

    let mut rows = Vec::new();
    for (g, sample) in [(Group::A, &groups.a), (Group::B, &groups.b)] {
        let mut distinct: Vec<f64> = sample.profits().to_vec();
        distinct.dedup();
        for p in distinct {
            rows.push(vec![
                groups.label(g).to_string(),
                fmt_f64(p),
                fmt_f64(spec.welfare(g, p)),
            ]);
        }
    }
    write_csv(&config.out.join("induced_welfare.csv"), &["group", "p", "w_induced"], rows)?;

    let entries = (0..sweep.solutions.len())
        .map(|k| {
            let r = verify_fair_pareto_equivalence(&sweep, k, &spec, &groups.a, &groups.b)?;
            Ok(EquivalenceEntry {
                epsilon: r.epsilon,
                alpha: r.alpha,
                individuals: r.individuals,
                mismatches: r.mismatches,
                boundary_mismatches: r.boundary_mismatches,
                interior_mismatches: r.interior_mismatches,
                sample_locations: r.locations.into_iter().take(MAX_REPORTED_LOCATIONS).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = FairnessReport {
        group_a: groups.label_a.clone(),
        group_b: groups.label_b.clone(),
        variant: config.variant,
        rate_resolution: config.rate_resolution,
        raw_violation_t_a: sweep.raw_violation_a,
        raw_violation_t_b: sweep.raw_violation_b,
        total_interior_mismatches: entries.iter().map(|e| e.interior_mismatches).sum(),
        entries,
    };
    write_json(&config.out.join("equivalence_report.json"), &report)?;
    Ok(report)
}
