//! Particle counts behind the frontier of an unpurged one-dimensional walk.

use serde::{Deserialize, Serialize};

use super::population::PopulationState;
use crate::error::{Error, Result};
use crate::jump_models::JumpModel;
use crate::offspring::{BranchingMode, OffspringLaw};
use crate::rate_function::RateFunction;
use crate::seeding::{replica_rng, ReplicaKey};

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierConfig {
    pub steps: u64,
    /// Distances `x` behind `m_n`; each must lie in `[2, √steps]`.
    pub offsets: Vec<f64>,
    pub population_cap: usize,
    pub max_restarts: u32,
}

impl FrontierConfig {
    pub fn new(steps: u64, offsets: Vec<f64>) -> Self {
        Self {
            steps,
            offsets,
            population_cap: super::fpt::DEFAULT_POPULATION_CAP,
            max_restarts: 1000,
        }
    }

    fn validate(&self) -> Result<()> {
        let upper = (self.steps as f64).sqrt();
        let mut problems = Vec::new();
        if self.offsets.is_empty() {
            problems.push("at least one offset is required".to_string());
        }
        for &x in &self.offsets {
            if !(2.0..=upper).contains(&x) {
                problems.push(format!("offset {x} outside [2, sqrt(n)] = [2, {upper}]"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigError(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierCounts {
    /// `m_n = c1 n − 3/(2 c2) log n`.
    pub m_n: f64,
    /// `(x, #{v : η_v ≥ m_n − x})` in offset order.
    pub counts: Vec<(f64, u64)>,
    pub population: usize,
    pub restarts: u32,
    pub seed: u64,
}

/// `m_n` from the first-coordinate speed constants at growth rate `rho`.
pub fn frontier_position(model: &JumpModel, rho: f64, steps: u64) -> Result<(f64, f64, f64)> {
    let rf = RateFunction::marginal(model);
    let c1 = rf.solve_c1(rho)?;
    let c2 = rf.grad_i(&[c1])?[0];
    let n = steps as f64;
    Ok((c1 * n - 1.5 / c2 * n.ln(), c1, c2))
}

/// Runs an unpurged one-dimensional walk for `steps` generations, conditioned
/// on survival, and counts particles within each offset of `m_n`.
pub fn run_frontier_count(
    model: &JumpModel,
    offspring: &OffspringLaw,
    config: &FrontierConfig,
    key: ReplicaKey,
) -> Result<FrontierCounts> {
    if model.dim() != 1 {
        return Err(Error::ConfigError(format!(
            "frontier counts need a one-dimensional model, got d = {}",
            model.dim()
        )));
    }
    if offspring.mode() != BranchingMode::Classical {
        return Err(Error::ConfigError(
            "frontier counts need a classical offspring law".into(),
        ));
    }
    config.validate()?;
    let (m_n, _, _) = frontier_position(model, offspring.rho(), config.steps)?;

    'attempt: for restart in 0..=config.max_restarts {
        let seed = key.seed(restart);
        let mut rng = replica_rng(seed);
        let mut state = PopulationState::new(1);
        for n in 1..=config.steps {
            state.step_classical(offspring, model, &mut rng);
            if state.is_empty() {
                continue 'attempt;
            }
            if state.len() > config.population_cap {
                return Err(Error::PopulationOverflow {
                    cap: config.population_cap,
                    generation: n,
                });
            }
        }
        let mut positions: Vec<f64> = (0..state.len()).map(|i| state.position(i)[0]).collect();
        positions.sort_unstable_by(|a, b| b.total_cmp(a));
        let counts = config
            .offsets
            .iter()
            .map(|&x| {
                let threshold = m_n - x;
                (x, positions.partition_point(|&p| p >= threshold) as u64)
            })
            .collect();
        return Ok(FrontierCounts {
            m_n,
            counts,
            population: state.len(),
            restarts: restart,
            seed,
        });
    }
    Err(Error::SurvivalConditioningFailed {
        attempts: config.max_restarts + 1,
    })
}
