//! Particle-system simulator for classical and delayed branching random walks.

mod counts;
mod fpt;
mod frontier;
mod population;

pub use counts::{growth_rate, ordinary_count_trajectory, sample_binomial, step_counts, TypeCounts};
pub use fpt::{FptConfig, FptOutcome, FptSimulator, FptStatus, DEFAULT_POPULATION_CAP};
pub use frontier::{frontier_position, run_frontier_count, FrontierConfig, FrontierCounts};
pub use population::{Particle, PopulationState, PurgeRule};
