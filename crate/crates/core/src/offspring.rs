use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::delayed_rho;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingMode {
    /// Ternary branching happens in one generation.
    Classical,
    /// Ternary branching is split into two binary events one generation apart.
    Delayed,
}

/// Offspring law supported on {0, 1, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffspringLaw {
    p0: f64,
    p1: f64,
    p3: f64,
    mode: BranchingMode,
    rho: f64,
}

/// What happens to one ordinary particle in a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Die,
    Continue,
    Branch,
}

impl OffspringLaw {
    pub fn new(p0: f64, p1: f64, p3: f64, mode: BranchingMode) -> Result<Self> {
        let probs = [("p0", p0), ("p1", p1), ("p3", p3)];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidLaw(format!("{name} = {p} is not a probability")));
            }
        }
        let total = p0 + p1 + p3;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, expected 1")));
        }
        let rho = match mode {
            BranchingMode::Classical => p1 + 3.0 * p3,
            BranchingMode::Delayed => delayed_rho(p0, p1, p3)?,
        };
        Ok(Self { p0, p1, p3, mode, rho })
    }

    pub fn classical(p0: f64, p1: f64, p3: f64) -> Result<Self> {
        Self::new(p0, p1, p3, BranchingMode::Classical)
    }

    pub fn delayed(p0: f64, p1: f64, p3: f64) -> Result<Self> {
        Self::new(p0, p1, p3, BranchingMode::Delayed)
    }

    /// Classical law with `p0 = 0` and `p1 = 1 - p3`, the family used in the
    /// polymer experiments.
    pub fn ternary(p3: f64) -> Result<Self> {
        Self::classical(0.0, 1.0 - p3, p3)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p3(&self) -> f64 {
        self.p3
    }

    pub fn mode(&self) -> BranchingMode {
        self.mode
    }

    /// Effective growth rate: the mean `p1 + 3 p3` for classical laws, the
    /// positive root of the characteristic polynomial for delayed ones.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_supercritical(&self) -> bool {
        self.rho > 1.0
    }

    pub fn second_moment(&self) -> f64 {
        self.p1 + 9.0 * self.p3
    }

    pub fn sample_fate<R: Rng + ?Sized>(&self, rng: &mut R) -> Fate {
        let u: f64 = rng.random();
        if u < self.p0 {
            Fate::Die
        } else if u < self.p0 + self.p1 {
            Fate::Continue
        } else {
            Fate::Branch
        }
    }
}
