//! Reproducible Monte-Carlo experiments.
//!
//! Every replication owns its random stream: a ChaCha8 generator keyed by
//! `(seed, cell)` and positioned on stream `replication`. Replications are
//! computed in parallel, collected in index order and reduced sequentially,
//! so results are bit-identical for any number of worker threads.

mod config;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{Cell, Experiment, ExperimentConfig, Grid, SpecConfig};

use crate::analytic::{DistributionSpec, GroundTruth};
use crate::error::{Error, Result};
use crate::estimators::{analyze, Estimator, VarianceEstimates};

/// Slack on the upper bound of `σ̂_N²` in the inline check.
const BOUND_SLACK: f64 = 1e-12;

/// The random stream of one replication.
pub fn replication_rng(seed: u64, cell_id: u64, replication: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&cell_id.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replication);
    rng
}

/// `θ̂` and the variance estimates of one simulated sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replication {
    pub theta_hat: f64,
    pub estimates: VarianceEstimates,
}

/// Draws replication `replication` of `cell` and checks
/// `0 ≤ σ̂_N² ≤ θ̂(1 − θ̂)/(m − 1)`.
pub fn draw(cell: &Cell, seed: u64, cell_id: u64, replication: u64) -> Result<Replication> {
    let mut rng = replication_rng(seed, cell_id, replication);
    let sample = cell.spec.sample(&mut rng, cell.n1, cell.n2)?;
    let a = analyze(&sample)?;
    let sigma = a.variances.sigma_n_sq;
    if sigma < 0.0 || sigma > a.upper_bound() + BOUND_SLACK {
        return Err(Error::InvariantViolation(format!(
            "σ̂_N² = {sigma} outside [0, {}] (seed {seed}, cell {cell_id}, replication {replication})",
            a.upper_bound()
        )));
    }
    Ok(Replication { theta_hat: a.summary.theta_hat, estimates: a.variances })
}

/// All `nsim` replications of a cell, in replication order.
pub fn replicate(cell: &Cell, nsim: usize, seed: u64, cell_id: u64) -> Result<Vec<Replication>> {
    (0..nsim as u64)
        .into_par_iter()
        .map(|r| draw(cell, seed, cell_id, r))
        .collect()
}

/// Sample mean, unbiased sample variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    /// Zero for a single value.
    pub variance: f64,
    pub se: f64,
}

pub fn moments(values: &[f64]) -> Moments {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Moments { mean, variance, se: (variance / n).sqrt() }
}

/// One CSV row: an estimator's Monte-Carlo summary in one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub spec: String,
    pub theta: f64,
    pub n1: usize,
    pub n2: usize,
    pub estimator: Estimator,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub qmse: f64,
    pub se: f64,
    pub nsim: usize,
}

/// Monotonicity of the L2 error of `σ̂_N²` along the sample-size sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendVerdict {
    pub spec: String,
    /// `(N, L2 error, standard error)` per sample size.
    pub points: Vec<(usize, f64, f64)>,
    /// Each L2 error is at most the previous one plus twice the combined
    /// standard error.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub verdicts: Vec<TrendVerdict>,
}

fn estimator_rows(
    cell: &Cell,
    truth: &GroundTruth,
    reps: &[Replication],
    estimators: &[Estimator],
) -> Vec<ExperimentRow> {
    let target = truth.sigma_n_sq(cell.n1, cell.n2);
    estimators
        .iter()
        .map(|&e| {
            let values: Vec<f64> = reps.iter().map(|r| r.estimates.get(e)).collect();
            let m = moments(&values);
            let bias = m.mean - target;
            ExperimentRow {
                spec: cell.spec.label(),
                theta: truth.theta,
                n1: cell.n1,
                n2: cell.n2,
                estimator: e,
                mean: m.mean,
                bias,
                variance: m.variance,
                qmse: (m.variance + bias * bias) / target,
                se: m.se,
                nsim: reps.len(),
            }
        })
        .collect()
}

fn run_cells(
    config: &ExperimentConfig,
    check: impl Fn(&Cell, &GroundTruth) -> Result<()>,
) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for (id, cell) in config.cells()?.iter().enumerate() {
        let truth = cell.spec.ground_truth()?;
        check(cell, &truth)?;
        let reps = replicate(cell, config.nsim, config.seed, id as u64)?;
        rows.extend(estimator_rows(cell, &truth, &reps, &config.estimators));
    }
    Ok(rows)
}

/// Bias `E(σ̂²) − σ_N²` of each estimator in each cell.
pub fn run_bias(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_cells(config, |_, _| Ok(()))
}

/// Same table as [`run_bias`]; requires every cell's `θ` in `[0.5, 0.999]`.
pub fn run_qmse(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_cells(config, |cell, truth| {
        if (0.5 - 1e-9..=0.999 + 1e-9).contains(&truth.theta) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{}: θ = {} outside [0.5, 0.999]",
                cell.spec.label(),
                truth.theta
            )))
        }
    })
}

fn consistency_cells(
    spec: &DistributionSpec,
    n_sequence: &[usize],
    nsim: usize,
    seed: u64,
    first_cell: u64,
    estimators: &[Estimator],
) -> Result<(Vec<ExperimentRow>, TrendVerdict)> {
    let truth = spec.ground_truth()?;
    if truth.sigma1_sq <= 1e-12 || truth.sigma2_sq <= 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "{}: consistency needs σ1², σ2² > 0, got {} and {}",
            spec.label(),
            truth.sigma1_sq,
            truth.sigma2_sq
        )));
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (j, &n) in n_sequence.iter().enumerate() {
        if n < 4 || n % 2 == 1 {
            return Err(Error::InvalidParameter(format!("N = {n} must be even and at least 4")));
        }
        let cell = Cell { spec: spec.clone(), n1: n / 2, n2: n / 2 };
        let reps = replicate(&cell, nsim, seed, first_cell + j as u64)?;
        let s_n_sq = truth.s_n_sq(cell.n1, cell.n2);
        for &e in estimators {
            // Z = N·σ̂²/s_N²; the row reports Z's mean and variance, and the
            // L2 error E(Z − 1)² in the qmse column with its standard error.
            let z: Vec<f64> = reps.iter().map(|r| n as f64 * r.estimates.get(e) / s_n_sq).collect();
            let mz = moments(&z);
            let sq: Vec<f64> = z.iter().map(|v| (v - 1.0).powi(2)).collect();
            let l2 = moments(&sq);
            if e == Estimator::Unbiased {
                points.push((n, l2.mean, l2.se));
            }
            rows.push(ExperimentRow {
                spec: spec.label(),
                theta: truth.theta,
                n1: cell.n1,
                n2: cell.n2,
                estimator: e,
                mean: mz.mean,
                bias: mz.mean - 1.0,
                variance: mz.variance,
                qmse: l2.mean,
                se: l2.se,
                nsim,
            });
        }
    }
    if points.is_empty() {
        // the verdict is always about σ̂_N², even if it was not requested
        return consistency_cells(spec, n_sequence, nsim, seed, first_cell, &[Estimator::Unbiased])
            .map(|(_, v)| (rows, v));
    }
    let monotone = points
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 2.0 * (w[0].2 * w[0].2 + w[1].2 * w[1].2).sqrt());
    Ok((rows, TrendVerdict { spec: spec.label(), points, monotone }))
}

/// L2 error `E(N·σ̂²/s_N² − 1)²` along `n_sequence` (total sizes, split
/// evenly), with a monotone-trend verdict for `σ̂_N²`.
pub fn run_consistency(
    spec: &DistributionSpec,
    n_sequence: &[usize],
    nsim: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    if nsim == 0 {
        return Err(Error::InvalidConfig("nsim must be at least 1".into()));
    }
    let (rows, verdict) = consistency_cells(spec, n_sequence, nsim, seed, 0, &Estimator::ALL)?;
    Ok(ExperimentOutput { rows, verdicts: vec![verdict] })
}

fn run_consistency_config(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut out = ExperimentOutput::default();
    for (i, spec) in config.resolved_specs()?.iter().enumerate() {
        let first = (i * config.n_sequence.len()) as u64;
        let (rows, verdict) =
            consistency_cells(spec, &config.n_sequence, config.nsim, config.seed, first, &config.estimators)?;
        out.rows.extend(rows);
        out.verdicts.push(verdict);
    }
    Ok(out)
}

/// Runs the configured experiment on `threads` workers (all cores if
/// `None`).
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| match config.experiment {
        Experiment::Bias => Ok(ExperimentOutput { rows: run_bias(config)?, verdicts: Vec::new() }),
        Experiment::Qmse => Ok(ExperimentOutput { rows: run_qmse(config)?, verdicts: Vec::new() }),
        Experiment::Consistency => run_consistency_config(config),
    })
}

/// Writes rows as CSV with header
/// `spec,theta,n1,n2,estimator,mean,bias,variance,qmse,se,nsim`.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(["spec", "theta", "n1", "n2", "estimator", "mean", "bias", "variance", "qmse", "se", "nsim"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
