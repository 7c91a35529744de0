//! Experiment orchestration: config files in, CSV and JSON out.
//!
//! Every replica's seed depends only on `(master_seed, x_index, replica,
//! restart)`, and records are written in `(x_index, replica)` order, so the
//! CSV bodies do not depend on the number of workers.

pub mod config;
mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::seeding::derive_replica_seed;
pub use config::{
    parse_config, parse_config_str, ConfigFile, ExperimentKind, ExperimentPlan, ExtinctionPolicy, FrontierSpec,
    MarginalSpec, ModelSpec, OffspringSpec,
};
pub use output::{read_replica_csv, ReplicaRow};

use crate::asymptotics::{delayed_rho, predict_a, predict_a_hat, predict_a_tilde, AsymptoticPrediction};
use crate::engine::{
    frontier_position, run_frontier_count, FptConfig, FptOutcome, FptSimulator, FptStatus, FrontierConfig,
    FrontierCounts,
};
use crate::error::{Error, Result};
use crate::offspring::BranchingMode;
use crate::rate_function::{RateFunction, SpeedConstants};
use crate::seeding::ReplicaKey;
use crate::stats::{self, FitResult, FptSampleSet, Summary, TheoryGap};

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "FPT_OUTPUT_DIR";

/// One failed replica (or a failed theory computation when `replica` is
/// `None`), with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub x: Option<f64>,
    pub x_index: Option<u32>,
    pub replica: Option<u64>,
    pub restart: Option<u32>,
    pub seed: Option<u64>,
}

impl ErrorRecord {
    fn general(err: &Error) -> Self {
        Self {
            kind: err.kind().into(),
            message: err.to_string(),
            x: None,
            x_index: None,
            replica: None,
            restart: None,
            seed: None,
        }
    }
}

/// Result of one `(x_index, replica)` task.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRecord {
    pub x_index: u32,
    pub x: f64,
    pub replica: u64,
    pub outcome: std::result::Result<FptOutcome, ErrorRecord>,
}

/// Constants and predictions for a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub rho: f64,
    /// Growth rate of the delayed model, when the law is delayed.
    pub rho_tilde: Option<f64>,
    /// First-coordinate constants at the growth rate in use.
    pub c1: f64,
    pub c2: f64,
    pub c1_hat: f64,
    pub c2_vec: Vec<f64>,
    pub purge_normal: Vec<f64>,
    pub predictions: Vec<AsymptoticPrediction>,
}

/// Per-x aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub x: f64,
    pub n_hits: usize,
    pub n_extinct: usize,
    pub n_timeout: usize,
    pub n_failed: usize,
    pub summary: Option<Summary>,
    pub prediction: Option<f64>,
    pub gap: Option<TheoryGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub steps: u64,
    pub m_n: f64,
    pub c1: f64,
    pub c2: f64,
    pub replicas: Vec<FrontierCounts>,
    /// `(x, mean count)` over surviving replicas.
    pub mean_counts: Vec<(f64, f64)>,
    /// Slope of `log(mean count / x)` on `x`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub theory: Option<TheoryReport>,
    pub records: Vec<ReplicaRecord>,
    pub summaries: Vec<SweepSummary>,
    pub frontier: Option<FrontierReport>,
    pub errors: Vec<ErrorRecord>,
    /// Every file written, in write order.
    pub files: Vec<PathBuf>,
}

impl ExperimentResult {
    pub fn succeeded(&self) -> bool {
        self.errors.is_empty()
    }

    /// Sample sets of a sweep, one per x.
    pub fn sample_sets(&self, plan: &ExperimentPlan) -> Vec<FptSampleSet> {
        sample_sets(plan, &self.records)
    }
}

/// Overrides applied on top of a parsed plan; the command line wins over the
/// environment, which wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, plan: &mut ExperimentPlan) {
        if let Some(seed) = self.seed {
            plan.master_seed = seed;
        }
        if let Some(w) = self.workers {
            plan.workers = Some(w);
        }
        let env_dir = std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        if let Some(dir) = self.out_dir.clone().or(env_dir) {
            let name = plan
                .output
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("experiment"));
            plan.output = dir.join(name);
        }
    }
}

/// Builds the worker pool; `None` uses the available hardware parallelism.
fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::ConfigError(format!("cannot start worker pool: {e}")))
}

/// Constants and predictions. Delayed laws use `Ã`; spherically symmetric
/// laws use `A`; everything else uses `Â`.
pub fn compute_theory(plan: &ExperimentPlan) -> Result<TheoryReport> {
    let law = &plan.offspring;
    let rho = law.rho();
    let full = RateFunction::full(&plan.model).solve_c1_hat(rho)?;
    let SpeedConstants {
        c1_hat,
        c2_vec,
        c1_marginal,
        c2_marginal,
        ..
    } = full.clone();
    let purge_normal = crate::rate_function::unit(&c2_vec);
    let predictions = plan
        .x_values
        .iter()
        .map(|&x| match law.mode() {
            BranchingMode::Delayed => predict_a_tilde(x, &plan.model, law, plan.d),
            BranchingMode::Classical if plan.model.is_spherically_symmetric() => {
                predict_a(x, c1_marginal, c2_marginal, plan.d)
            }
            BranchingMode::Classical => predict_a_hat(x, &full, plan.d),
        })
        .collect::<Result<Vec<_>>>()?;
    let rho_tilde = match law.mode() {
        BranchingMode::Delayed => Some(delayed_rho(law.p0(), law.p1(), law.p3())?),
        BranchingMode::Classical => None,
    };
    Ok(TheoryReport {
        rho,
        rho_tilde,
        c1: c1_marginal,
        c2: c2_marginal,
        c1_hat,
        c2_vec,
        purge_normal,
        predictions,
    })
}

fn fpt_config(plan: &ExperimentPlan, x: f64) -> FptConfig {
    FptConfig {
        x,
        radius: plan.radius,
        purge: plan.purge,
        max_steps: plan.max_steps,
        count_pending_hits: plan.count_pending_hits,
        population_cap: plan.population_cap,
    }
}

fn purge_normal(plan: &ExperimentPlan) -> Result<Vec<f64>> {
    let mut e1 = vec![0.0; plan.d];
    e1[0] = 1.0;
    if plan.purge.is_none() || plan.model.is_spherically_symmetric() {
        Ok(e1)
    } else {
        RateFunction::full(&plan.model).purge_normal(plan.offspring.rho())
    }
}

fn run_replica(
    sim: &FptSimulator,
    plan: &ExperimentPlan,
    key: ReplicaKey,
) -> std::result::Result<FptOutcome, ErrorRecord> {
    let result = match plan.extinction {
        ExtinctionPolicy::Restart => sim.run_conditioned(key, plan.max_restarts),
        ExtinctionPolicy::Discard => sim.run(key.seed(0)),
    };
    result.map_err(|err| {
        let restart = match (&err, plan.extinction) {
            (Error::SurvivalConditioningFailed { .. }, ExtinctionPolicy::Restart) => plan.max_restarts,
            _ => 0,
        };
        ErrorRecord {
            kind: err.kind().into(),
            message: err.to_string(),
            x: Some(plan.x_values[key.x_index as usize]),
            x_index: Some(key.x_index),
            replica: Some(key.replica),
            restart: Some(restart),
            seed: Some(key.seed(restart)),
        }
    })
}

/// Runs every `(x_index, replica)` task of a sweep and returns the records in
/// task order.
pub fn run_replicas(plan: &ExperimentPlan) -> Result<Vec<ReplicaRecord>> {
    let normal = purge_normal(plan)?;
    let sims = plan
        .x_values
        .iter()
        .map(|&x| FptSimulator::with_normal(&plan.model, plan.offspring, fpt_config(plan, x), normal.clone()))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(u32, u64)> = (0..plan.x_values.len() as u32)
        .flat_map(|i| (0..plan.samples).map(move |r| (i, r)))
        .collect();
    let records = pool(plan.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(x_index, replica)| {
                let key = ReplicaKey::new(plan.master_seed, x_index, replica);
                ReplicaRecord {
                    x_index,
                    x: plan.x_values[x_index as usize],
                    replica,
                    outcome: run_replica(&sims[x_index as usize], plan, key),
                }
            })
            .collect()
    });
    Ok(records)
}

/// Reruns one attempt of one replica exactly as the sweep ran it.
pub fn replay(plan: &ExperimentPlan, x_index: u32, replica: u64, restart: u32) -> Result<FptOutcome> {
    let x = *plan
        .x_values
        .get(x_index as usize)
        .ok_or_else(|| Error::ConfigError(format!("x_index {x_index} out of range")))?;
    let sim = FptSimulator::with_normal(&plan.model, plan.offspring, fpt_config(plan, x), purge_normal(plan)?)?;
    let key = ReplicaKey::new(plan.master_seed, x_index, replica);
    let mut outcome = sim.run(key.seed(restart))?;
    outcome.restarts = restart;
    Ok(outcome)
}

fn sample_sets(plan: &ExperimentPlan, records: &[ReplicaRecord]) -> Vec<FptSampleSet> {
    plan.x_values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut set = FptSampleSet {
                x,
                master_seed: plan.master_seed,
                replicas: (0, plan.samples),
                ..Default::default()
            };
            for rec in records.iter().filter(|r| r.x_index == i as u32) {
                match &rec.outcome {
                    Ok(o) => match o.status {
                        FptStatus::Hit { tau, .. } => set.samples.push(tau),
                        FptStatus::Extinct { .. } => set.n_extinct += 1,
                        FptStatus::Timeout { .. } => set.n_timeout += 1,
                    },
                    Err(e) if e.kind == "SurvivalConditioningFailed" => set.n_extinct += 1,
                    Err(_) => {}
                }
            }
            set
        })
        .collect()
}

fn summarize_sweep(
    plan: &ExperimentPlan,
    records: &[ReplicaRecord],
    theory: Option<&TheoryReport>,
) -> Vec<SweepSummary> {
    sample_sets(plan, records)
        .into_iter()
        .enumerate()
        .map(|(i, set)| {
            let prediction = theory.map(|t| &t.predictions[i]);
            let n_failed = records
                .iter()
                .filter(|r| r.x_index == i as u32 && r.outcome.is_err())
                .count();
            SweepSummary {
                x: set.x,
                n_hits: set.samples.len(),
                n_extinct: set.n_extinct,
                n_timeout: set.n_timeout,
                n_failed,
                summary: stats::summarize(&set).ok(),
                prediction: prediction.map(|p| p.total),
                gap: prediction.and_then(|p| stats::compare_to_theory(&set, p).ok()),
            }
        })
        .collect()
}

/// Executes a plan and writes its result files. Failures of individual
/// replicas are collected in [`ExperimentResult::errors`]; only problems that
/// stop the whole experiment are returned as `Err`.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    let mut errors = Vec::new();
    let theory = match compute_theory(plan) {
        Ok(t) => Some(t),
        Err(e) if plan.kind == ExperimentKind::TheoryOnly => return Err(e),
        Err(e) => {
            errors.push(ErrorRecord::general(&e));
            None
        }
    };
    let mut result = ExperimentResult {
        kind: plan.kind,
        theory,
        records: Vec::new(),
        summaries: Vec::new(),
        frontier: None,
        errors,
        files: Vec::new(),
    };
    match plan.kind {
        ExperimentKind::TheoryOnly => {}
        ExperimentKind::FptSweep => {
            result.records = run_replicas(plan)?;
            result
                .errors
                .extend(result.records.iter().filter_map(|r| r.outcome.clone().err()));
            result.summaries = summarize_sweep(plan, &result.records, result.theory.as_ref());
        }
        ExperimentKind::FrontierCount => {
            let (frontier, errs) = run_frontier(plan)?;
            result.frontier = Some(frontier);
            result.errors.extend(errs);
        }
    }
    result.files = output::write_all(plan, &result)?;
    Ok(result)
}

fn run_frontier(plan: &ExperimentPlan) -> Result<(FrontierReport, Vec<ErrorRecord>)> {
    let spec = plan
        .frontier
        .as_ref()
        .ok_or_else(|| Error::ConfigError("frontier section missing".into()))?;
    let config = FrontierConfig {
        steps: spec.steps,
        offsets: spec.offsets.clone(),
        population_cap: plan.population_cap,
        max_restarts: plan.max_restarts,
    };
    let (m_n, c1, c2) = frontier_position(&plan.model, plan.offspring.rho(), spec.steps)?;
    let outcomes: Vec<_> = pool(plan.workers)?.install(|| {
        (0..spec.replicas)
            .into_par_iter()
            .map(|r| {
                let key = ReplicaKey::new(plan.master_seed, 0, r);
                (key, run_frontier_count(&plan.model, &plan.offspring, &config, key))
            })
            .collect()
    });
    let mut replicas = Vec::new();
    let mut errors = Vec::new();
    for (key, outcome) in outcomes {
        match outcome {
            Ok(c) => replicas.push(c),
            Err(e) => errors.push(ErrorRecord {
                kind: e.kind().into(),
                message: e.to_string(),
                x: None,
                x_index: Some(0),
                replica: Some(key.replica),
                restart: Some(0),
                seed: Some(key.seed(0)),
            }),
        }
    }
    let mean_counts: Vec<(f64, f64)> = spec
        .offsets
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let total: u64 = replicas.iter().map(|c| c.counts[j].1).sum();
            (x, total as f64 / replicas.len().max(1) as f64)
        })
        .collect();
    let points: Vec<(f64, f64)> = mean_counts
        .iter()
        .filter(|(_, c)| *c > 0.0)
        .map(|&(x, c)| (x, (c / x).ln()))
        .collect();
    let slope = stats::ols_slope(&points).ok();
    Ok((
        FrontierReport {
            steps: spec.steps,
            m_n,
            c1,
            c2,
            replicas,
            mean_counts,
            slope,
        },
        errors,
    ))
}

/// Fits `E[τ] = x/c1 + B log x + C` to the per-x means of one or more
/// replica CSV files. Non-hit rows are ignored.
pub fn fit_csv_files<P: AsRef<Path>>(paths: &[P]) -> Result<FitResult> {
    let mut by_x: Vec<(f64, Vec<u64>)> = Vec::new();
    for path in paths {
        for row in read_replica_csv(path.as_ref())? {
            let Some(tau) = row.tau else { continue };
            match by_x.iter_mut().find(|(x, _)| *x == row.x) {
                Some((_, v)) => v.push(tau),
                None => by_x.push((row.x, vec![tau])),
            }
        }
    }
    by_x.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points: Vec<(f64, f64)> = by_x
        .iter()
        .map(|(x, v)| (*x, v.iter().sum::<u64>() as f64 / v.len() as f64))
        .collect();
    stats::fit_linear_log(&points)
}
