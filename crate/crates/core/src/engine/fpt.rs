use serde::{Deserialize, Serialize};

use super::population::{PopulationState, PurgeRule};
use crate::error::{Error, Result};
use crate::jump_models::JumpModel;
use crate::offspring::OffspringLaw;
use crate::rate_function::RateFunction;
use crate::seeding::{replica_rng, ReplicaKey};

/// Default hard cap on the number of live particles.
pub const DEFAULT_POPULATION_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FptConfig {
    /// Target ball is centered at `(x, 0, …, 0)`.
    pub x: f64,
    pub radius: f64,
    /// `None` runs the walk unpurged.
    pub purge: Option<PurgeRule>,
    pub max_steps: u64,
    /// Whether pending type-II particles can realize the hit.
    pub count_pending_hits: bool,
    pub population_cap: usize,
}

impl FptConfig {
    pub fn new(x: f64, max_steps: u64) -> Self {
        Self {
            x,
            radius: 1.0,
            purge: Some(PurgeRule::default()),
            max_steps,
            count_pending_hits: true,
            population_cap: DEFAULT_POPULATION_CAP,
        }
    }

    pub fn unpurged(mut self) -> Self {
        self.purge = None;
        self
    }

    pub fn with_purge(mut self, rule: PurgeRule) -> Self {
        self.purge = Some(rule);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.x.is_finite() && self.x >= 0.0) {
            problems.push(format!("x must be finite and >= 0, got {}", self.x));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            problems.push(format!("radius must be positive, got {}", self.radius));
        }
        if self.max_steps == 0 {
            problems.push("max_steps must be at least 1".to_string());
        }
        if self.population_cap == 0 {
            problems.push("population_cap must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigError(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FptStatus {
    Hit { tau: u64, position: Vec<f64> },
    Extinct { at: u64 },
    Timeout { max_steps: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FptOutcome {
    pub status: FptStatus,
    pub peak_size: usize,
    pub purge_events: u64,
    /// Seed of the run that produced this outcome.
    pub replica_seed: u64,
    /// Extinct runs discarded before this one (survival conditioning).
    pub restarts: u32,
}

impl FptOutcome {
    pub fn tau(&self) -> Option<u64> {
        match self.status {
            FptStatus::Hit { tau, .. } => Some(tau),
            _ => None,
        }
    }

    pub fn is_extinct(&self) -> bool {
        matches!(self.status, FptStatus::Extinct { .. })
    }
}

/// Runs single replicas of the first-passage experiment for one target.
#[derive(Debug, Clone)]
pub struct FptSimulator<'a> {
    jump: &'a JumpModel,
    offspring: OffspringLaw,
    normal: Vec<f64>,
    target: Vec<f64>,
    config: FptConfig,
}

impl<'a> FptSimulator<'a> {
    /// Purges along `∇I(ĉ1, 0)` at the law's growth rate. Spherically
    /// symmetric laws use the first axis directly.
    pub fn new(jump: &'a JumpModel, offspring: OffspringLaw, config: FptConfig) -> Result<Self> {
        let d = jump.dim();
        let normal = if jump.is_spherically_symmetric() || config.purge.is_none() {
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            e1
        } else {
            RateFunction::full(jump).purge_normal(offspring.rho())?
        };
        Self::with_normal(jump, offspring, config, normal)
    }

    pub fn with_normal(
        jump: &'a JumpModel,
        offspring: OffspringLaw,
        config: FptConfig,
        normal: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        if normal.len() != jump.dim() {
            return Err(Error::ConfigError(format!(
                "purge normal has length {}, model dimension is {}",
                normal.len(),
                jump.dim()
            )));
        }
        let mut target = vec![0.0; jump.dim()];
        target[0] = config.x;
        Ok(Self {
            jump,
            offspring,
            normal,
            target,
            config,
        })
    }

    pub fn config(&self) -> &FptConfig {
        &self.config
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    /// One unconditioned run.
    pub fn run(&self, seed: u64) -> Result<FptOutcome> {
        let mut rng = replica_rng(seed);
        let mut state = PopulationState::new(self.jump.dim());
        let cfg = &self.config;
        let finish = |status, state: &PopulationState| FptOutcome {
            status,
            peak_size: state.peak_size(),
            purge_events: state.purge_events(),
            replica_seed: seed,
            restarts: 0,
        };

        if let Some(i) = state.first_hit(&self.target, cfg.radius, cfg.count_pending_hits) {
            let position = state.position(i).to_vec();
            return Ok(finish(FptStatus::Hit { tau: 0, position }, &state));
        }
        for n in 1..=cfg.max_steps {
            state.step(&self.offspring, self.jump, &mut rng);
            if state.is_empty() {
                return Ok(finish(FptStatus::Extinct { at: n }, &state));
            }
            // hits are recorded before purging can remove the hitting particle
            if let Some(i) = state.first_hit(&self.target, cfg.radius, cfg.count_pending_hits) {
                let position = state.position(i).to_vec();
                return Ok(finish(FptStatus::Hit { tau: n, position }, &state));
            }
            if let Some(rule) = cfg.purge {
                state.purge(&self.normal, rule);
            }
            if state.len() > cfg.population_cap {
                return Err(Error::PopulationOverflow {
                    cap: cfg.population_cap,
                    generation: n,
                });
            }
        }
        Ok(finish(
            FptStatus::Timeout {
                max_steps: cfg.max_steps,
            },
            &state,
        ))
    }

    /// Conditions on survival by rejection: extinct runs are discarded and
    /// rerun with the next restart seed of `key`.
    pub fn run_conditioned(&self, key: ReplicaKey, max_restarts: u32) -> Result<FptOutcome> {
        for restart in 0..=max_restarts {
            let mut outcome = self.run(key.seed(restart))?;
            if !outcome.is_extinct() {
                outcome.restarts = restart;
                return Ok(outcome);
            }
        }
        Err(Error::SurvivalConditioningFailed {
            attempts: max_restarts + 1,
        })
    }
}
