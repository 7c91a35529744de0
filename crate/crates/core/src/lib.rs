//! First-passage times of branching random walks in `R^d`.
//!
//! The crate simulates classical and delayed-branching walks with optional
//! path purging, and computes the large-deviation constants and asymptotic
//! first-passage predictions the simulations are checked against.
//!
//! * [`jump_models`]: jump laws with samplers and log-MGFs.
//! * [`rate_function`]: Legendre transforms, `c1`, `ĉ1`, tilt vectors.
//! * [`asymptotics`]: `A(x)`, `Â(x)`, `Ã(x)` and the delayed growth rate.
//! * [`engine`]: the particle simulator.
//! * [`stats`]: summaries, fits and tightness checks.
//! * [`runner`]: config files, parallel experiments and result files.

pub mod asymptotics;
pub mod engine;
pub mod error;
pub mod jump_models;
pub mod offspring;
pub mod quadrature;
pub mod rate_function;
pub mod runner;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
pub use jump_models::{apply_linear_transform, JumpModel, Marginal};
pub use offspring::{BranchingMode, OffspringLaw};
pub use rate_function::{RateFunction, SpeedConstants};
