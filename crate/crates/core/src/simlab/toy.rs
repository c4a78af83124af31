//! The XOR toy: `X1..Xp ~ Bernoulli(0.5)` iid and `Y = (X1 + X2) mod 2`.
//!
//! Each guessed model collapses `(X1, X2)` into one predictor column; its AUC
//! and its normalized I-score (distinct values as cells) are averaged over
//! repetitions.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::dagger::{fit_dagger, transform_dagger};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::influence::{iscore_normalized, subset_iscore};
use crate::metrics::auc;
use crate::partition::partition_by_values;
use crate::report::mean_sd;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConfig {
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    /// Offset in the ratio model's denominator.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            p: 10,
            reps: 30,
            epsilon: 1e-5,
            seed: 0,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("n must be even and at least 4, got {}", self.n)));
        }
        if self.p < 2 {
            return Err(Error::InvalidArgument(format!("p must be at least 2, got {}", self.p)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuessedModel {
    Sum,
    Diff,
    Prod,
    Ratio,
    Dagger,
    PairSet,
    TrueModel,
}

impl GuessedModel {
    pub const ALL: [GuessedModel; 7] = [
        GuessedModel::Sum,
        GuessedModel::Diff,
        GuessedModel::Prod,
        GuessedModel::Ratio,
        GuessedModel::Dagger,
        GuessedModel::PairSet,
        GuessedModel::TrueModel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GuessedModel::Sum => "sum",
            GuessedModel::Diff => "diff",
            GuessedModel::Prod => "prod",
            GuessedModel::Ratio => "ratio",
            GuessedModel::Dagger => "dagger",
            GuessedModel::PairSet => "pair_set",
            GuessedModel::TrueModel => "true_model",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind `{s}`")))
    }

    /// Readable formula used in reports.
    pub fn formula(self) -> &'static str {
        match self {
            GuessedModel::Sum => "X1+X2",
            GuessedModel::Diff => "X1-X2",
            GuessedModel::Prod => "X1*X2",
            GuessedModel::Ratio => "X1/(X2+eps)",
            GuessedModel::Dagger => "X_dagger",
            GuessedModel::PairSet => "{X1 X2}",
            GuessedModel::TrueModel => "(X1+X2) mod 2",
        }
    }
}

impl fmt::Display for GuessedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One simulated dataset; repetition `rep` draws from its own derived stream.
pub fn generate_toy(cfg: &ToyConfig, rep: usize) -> Result<LabeledDataset<f64>> {
    cfg.validate()?;
    let mut rng = seed::rng(seed::derive_indexed(cfg.seed, "toy", rep as u64));
    let columns: Vec<Vec<f64>> = (0..cfg.p)
        .map(|_| (0..cfg.n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect())
        .collect();
    let y = columns[0]
        .iter()
        .zip(&columns[1])
        .map(|(a, b)| (a + b) % 2.0)
        .collect();
    LabeledDataset::from_columns(columns, y)
}

/// Scalar predictor for a guessed model. The dagger column is fitted on the
/// first half of the rows and evaluated on all of them.
pub fn guessed_predictor(ds: &LabeledDataset<f64>, m: GuessedModel, epsilon: f64) -> Result<Vec<f64>> {
    if ds.p() < 2 {
        return Err(Error::InvalidArgument("guessed models need columns X1 and X2".into()));
    }
    let (x1, x2) = (ds.column(0), ds.column(1));
    let zip = |f: &dyn Fn(f64, f64) -> f64| x1.iter().zip(x2).map(|(&a, &b)| f(a, b)).collect();
    Ok(match m {
        GuessedModel::Sum => zip(&|a, b| a + b),
        GuessedModel::Diff => zip(&|a, b| a - b),
        GuessedModel::Prod => zip(&|a, b| a * b),
        GuessedModel::Ratio => zip(&|a, b| a / (b + epsilon)),
        GuessedModel::TrueModel => zip(&|a, b| (a + b) % 2.0),
        GuessedModel::Dagger => {
            let half: Vec<usize> = (0..ds.n() / 2).collect();
            let map = fit_dagger(&ds.select_rows(&half), &[0, 1])?;
            transform_dagger(&map, ds)?
        }
        GuessedModel::PairSet => {
            return Err(Error::InvalidArgument("the pair set has no scalar predictor".into()));
        }
    })
}

/// Per-repetition values behind one report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyRow {
    pub name: String,
    /// `None` when the row has no scalar predictor.
    pub auc: Option<Vec<f64>>,
    pub iscore: Vec<f64>,
}

impl ToyRow {
    pub fn auc_mean_sd(&self) -> Option<(f64, f64)> {
        self.auc.as_deref().map(mean_sd)
    }

    pub fn iscore_mean_sd(&self) -> (f64, f64) {
        mean_sd(&self.iscore)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyReport {
    pub config: ToyConfig,
    /// `X1..Xp` followed by the guessed models in [`GuessedModel::ALL`] order.
    pub rows: Vec<ToyRow>,
}

impl ToyReport {
    pub fn row(&self, name: &str) -> Option<&ToyRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn model(&self, m: GuessedModel) -> &ToyRow {
        self.row(m.name()).expect("every guessed model has a row")
    }

    /// `predictor,formula,mean_auc,sd_auc,mean_iscore,sd_iscore`; AUC cells of
    /// the pair set read `NA`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "predictor,formula,mean_auc,sd_auc,mean_iscore,sd_iscore")?;
        for row in &self.rows {
            let formula = match GuessedModel::parse(&row.name) {
                Ok(m) => m.formula(),
                Err(_) => row.name.as_str(),
            };
            let (auc_m, auc_s) = match row.auc_mean_sd() {
                Some((m, s)) => (format!("{m:.4}"), format!("{s:.4}")),
                None => ("NA".to_owned(), "NA".to_owned()),
            };
            let (im, is) = row.iscore_mean_sd();
            writeln!(w, "{},{formula},{auc_m},{auc_s},{im:.4},{is:.4}", row.name)?;
        }
        Ok(())
    }
}

struct RepResult {
    auc: Vec<Option<f64>>,
    iscore: Vec<f64>,
}

fn run_rep(cfg: &ToyConfig, rep: usize) -> Result<RepResult> {
    let ds = generate_toy(cfg, rep)?;
    let y = ds.response();
    let mut aucs = Vec::with_capacity(cfg.p + GuessedModel::ALL.len());
    let mut scores = Vec::with_capacity(aucs.capacity());
    for j in 0..cfg.p {
        aucs.push(Some(auc(y, ds.column(j))?));
        scores.push(subset_iscore(&ds, &[j])?.normalized);
    }
    for m in GuessedModel::ALL {
        if m == GuessedModel::PairSet {
            aucs.push(None);
            scores.push(subset_iscore(&ds, &[0, 1])?.normalized);
            continue;
        }
        let pred = guessed_predictor(&ds, m, cfg.epsilon)?;
        aucs.push(Some(auc(y, &pred)?));
        scores.push(iscore_normalized(&partition_by_values(&pred, y)?)?.normalized);
    }
    Ok(RepResult { auc: aucs, iscore: scores })
}

/// Repetitions run in parallel; aggregation follows repetition order.
pub fn run_toy_experiment(cfg: &ToyConfig) -> Result<ToyReport> {
    cfg.validate()?;
    let reps: Vec<RepResult> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_rep(cfg, r))
        .collect::<Result<_>>()?;
    let names = (1..=cfg.p)
        .map(|j| format!("X{j}"))
        .chain(GuessedModel::ALL.iter().map(|m| m.name().to_owned()));
    let rows = names
        .enumerate()
        .map(|(i, name)| ToyRow {
            name,
            auc: reps.iter().map(|r| r.auc[i]).collect(),
            iscore: reps.iter().map(|r| r.iscore[i]).collect(),
        })
        .collect();
    Ok(ToyReport { config: *cfg, rows })
}
