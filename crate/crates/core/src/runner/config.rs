//! Experiment configuration files (TOML).
//!
//! ```toml
//! kind = "fpt_sweep"          # fpt_sweep | frontier_count | theory_only
//! seed = 20240611
//! samples = 2000
//! x_values = [10.0, 15.0, 20.0]
//! # optional: radius = 1.0, q_c = 9000, purge = true, max_steps,
//! # count_pending_hits = true, max_restarts = 1000, extinction = "restart",
//! # population_cap = 5000000, output = "results/run", workers
//!
//! [model]
//! kind = "gaussian"           # uniform_sphere | gaussian | product | elliptical
//! d = 3
//! covariance = [1, 0, 0, 0, 1, 0, 0, 0, 1]   # row-major
//!
//! [offspring]
//! p0 = 0.0
//! p1 = 0.5
//! p3 = 0.5
//! mode = "classical"          # classical | delayed
//!
//! [frontier]                  # frontier_count only
//! steps = 400
//! offsets = [2, 4, 6]
//! replicas = 50
//! ```
//!
//! Unknown keys are rejected anywhere in the file.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{PurgeRule, DEFAULT_POPULATION_CAP};
use crate::error::{Error, Result};
use crate::jump_models::{apply_linear_transform, JumpModel, Marginal};
use crate::offspring::{BranchingMode, OffspringLaw};
use crate::rate_function::RateFunction;

pub const DEFAULT_RADIUS: f64 = 1.0;
pub const DEFAULT_Q_C: usize = 9000;
pub const DEFAULT_MAX_RESTARTS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    FptSweep,
    FrontierCount,
    TheoryOnly,
}

/// What to do with replicas whose genealogy dies out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExtinctionPolicy {
    /// Rerun with the next restart seed until the walk survives.
    #[default]
    Restart,
    /// Keep the extinct record and exclude it from the statistics.
    Discard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    Uniform { half_width: f64 },
    Gaussian { variance: f64 },
    TwoPoint { a: f64 },
}

impl From<&MarginalSpec> for Marginal {
    fn from(spec: &MarginalSpec) -> Self {
        match *spec {
            MarginalSpec::Uniform { half_width } => Marginal::Uniform { half_width },
            MarginalSpec::Gaussian { variance } => Marginal::Gaussian { variance },
            MarginalSpec::TwoPoint { a } => Marginal::TwoPoint { a },
        }
    }
}

/// Jump-law grammar: a `kind` tag plus parameters; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    UniformSphere { d: usize },
    Gaussian { d: usize, covariance: Vec<f64> },
    Product { marginals: Vec<MarginalSpec> },
    Elliptical { base: Box<ModelSpec>, transform: Vec<f64> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<JumpModel> {
        match self {
            ModelSpec::UniformSphere { d } => JumpModel::uniform_sphere(*d),
            ModelSpec::Gaussian { d, covariance } => JumpModel::gaussian_row_major(*d, covariance),
            ModelSpec::Product { marginals } => JumpModel::product(marginals.iter().map(Marginal::from).collect()),
            ModelSpec::Elliptical { base, transform } => {
                let base = base.build()?;
                let d = base.dim();
                if transform.len() != d * d {
                    return Err(Error::InvalidModel(format!(
                        "transform needs {} entries, got {}",
                        d * d,
                        transform.len()
                    )));
                }
                apply_linear_transform(&base, DMatrix::from_row_slice(d, d, transform))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffspringSpec {
    #[serde(default)]
    pub p0: f64,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p3: f64,
    #[serde(default = "classical")]
    pub mode: BranchingMode,
}

fn classical() -> BranchingMode {
    BranchingMode::Classical
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierSpec {
    pub steps: u64,
    pub offsets: Vec<f64>,
    #[serde(default = "default_frontier_replicas")]
    pub replicas: u64,
}

fn default_frontier_replicas() -> u64 {
    50
}

/// Raw file contents, before defaults and validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub kind: ExperimentKind,
    pub seed: u64,
    pub model: ModelSpec,
    pub offspring: OffspringSpec,
    #[serde(default)]
    pub x_values: Vec<f64>,
    #[serde(default)]
    pub samples: u64,
    pub radius: Option<f64>,
    pub q_c: Option<usize>,
    pub purge: Option<bool>,
    pub max_steps: Option<u64>,
    pub count_pending_hits: Option<bool>,
    pub max_restarts: Option<u32>,
    pub extinction: Option<ExtinctionPolicy>,
    pub population_cap: Option<usize>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub frontier: Option<FrontierSpec>,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub model_spec: ModelSpec,
    pub model: JumpModel,
    pub offspring: OffspringLaw,
    pub d: usize,
    pub x_values: Vec<f64>,
    pub radius: f64,
    pub q_c: usize,
    /// `None` when purging is disabled.
    pub purge: Option<PurgeRule>,
    pub samples: u64,
    pub max_steps: u64,
    pub master_seed: u64,
    pub count_pending_hits: bool,
    pub max_restarts: u32,
    pub extinction: ExtinctionPolicy,
    pub population_cap: usize,
    pub output: PathBuf,
    pub workers: Option<usize>,
    pub frontier: Option<FrontierSpec>,
    /// SHA-256 of the configuration text.
    pub config_hash: String,
}

pub fn parse_config(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, path)
}

/// Parses configuration text; `origin` is only used in messages and for the
/// default output name.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentPlan> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let hash = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(text.as_bytes()))
    };
    let default_output = origin
        .file_stem()
        .map(|s| PathBuf::from("results").join(s))
        .unwrap_or_else(|| PathBuf::from("results/experiment"));
    build_plan(file, hash, default_output)
}

fn build_plan(file: ConfigFile, config_hash: String, default_output: PathBuf) -> Result<ExperimentPlan> {
    let mut problems = Vec::new();

    let model = match file.model.build() {
        Ok(m) => Some(m),
        Err(e) => {
            problems.push(format!("model: {e}"));
            None
        }
    };
    let o = &file.offspring;
    let offspring = match OffspringLaw::new(o.p0, o.p1, o.p3, o.mode) {
        Ok(law) => Some(law),
        Err(e) => {
            problems.push(format!("offspring: {e}"));
            None
        }
    };

    if file.kind == ExperimentKind::FptSweep {
        if file.x_values.is_empty() {
            problems.push("x_values: at least one target distance is required".into());
        }
        if file.samples == 0 {
            problems.push("samples: must be at least 1".into());
        }
    }
    if file.kind != ExperimentKind::FrontierCount {
        if let Some(bad) = file.x_values.iter().find(|x| !x.is_finite() || **x <= 1.0) {
            problems.push(format!("x_values: every x must be > 1, got {bad}"));
        }
        if file.x_values.windows(2).any(|w| w[1] <= w[0]) {
            problems.push("x_values: must be strictly increasing".into());
        }
    }
    let radius = file.radius.unwrap_or(DEFAULT_RADIUS);
    if !(radius.is_finite() && radius > 0.0) {
        problems.push(format!("radius: must be positive, got {radius}"));
    }
    let q_c = file.q_c.unwrap_or(DEFAULT_Q_C);
    let purge_enabled = file.purge.unwrap_or(true);
    let purge = if purge_enabled {
        match PurgeRule::new(q_c) {
            Ok(rule) => Some(rule),
            Err(e) => {
                problems.push(format!("q_c: {e}"));
                None
            }
        }
    } else {
        None
    };
    if file.max_steps == Some(0) {
        problems.push("max_steps: must be at least 1".into());
    }
    if file.max_restarts.is_some_and(|r| r > u16::MAX as u32) {
        problems.push(format!("max_restarts: at most {}", u16::MAX));
    }
    if file.workers == Some(0) {
        problems.push("workers: must be at least 1".into());
    }
    let population_cap = file.population_cap.unwrap_or(DEFAULT_POPULATION_CAP);
    if population_cap == 0 {
        problems.push("population_cap: must be positive".into());
    }
    if file.kind == ExperimentKind::FrontierCount {
        match &file.frontier {
            None => problems.push("frontier: section required for frontier_count".into()),
            Some(f) => {
                let upper = (f.steps as f64).sqrt();
                for &x in &f.offsets {
                    if !(2.0..=upper).contains(&x) {
                        problems.push(format!("frontier.offsets: {x} outside [2, {upper}]"));
                    }
                }
                if f.offsets.is_empty() {
                    problems.push("frontier.offsets: at least one offset is required".into());
                }
                if f.replicas == 0 {
                    problems.push("frontier.replicas: must be at least 1".into());
                }
            }
        }
        if let Some(m) = &model {
            if m.dim() != 1 {
                problems.push(format!("model: frontier_count needs d = 1, got {}", m.dim()));
            }
        }
        if o.mode != BranchingMode::Classical {
            problems.push("offspring.mode: frontier_count needs a classical law".into());
        }
    }

    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let model = model.expect("validated");
    let offspring = offspring.expect("validated");

    let max_x = file.x_values.iter().cloned().fold(0.0, f64::max);
    let max_steps = file
        .max_steps
        .unwrap_or_else(|| default_max_steps(&model, &offspring, max_x));

    Ok(ExperimentPlan {
        kind: file.kind,
        d: model.dim(),
        model_spec: file.model,
        model,
        offspring,
        x_values: file.x_values,
        radius,
        q_c,
        purge,
        samples: file.samples,
        max_steps,
        master_seed: file.seed,
        count_pending_hits: file.count_pending_hits.unwrap_or(true),
        max_restarts: file.max_restarts.unwrap_or(DEFAULT_MAX_RESTARTS),
        extinction: file.extinction.unwrap_or_default(),
        population_cap,
        output: file.output.unwrap_or(default_output),
        workers: file.workers,
        frontier: file.frontier,
        config_hash,
    })
}

/// `10 · ceil(max x / ĉ1)`. Laws without a speed constant (subcritical
/// growth) fall back to `10 · ceil(max x)`.
pub fn default_max_steps(model: &JumpModel, offspring: &OffspringLaw, max_x: f64) -> u64 {
    let speed = RateFunction::full(model)
        .solve_c1_hat(offspring.rho())
        .map(|k| k.c1_hat)
        .unwrap_or(1.0);
    (10.0 * (max_x / speed).ceil()).max(10.0) as u64
}
