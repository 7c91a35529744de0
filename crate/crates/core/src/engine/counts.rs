//! Population sizes without positions.
//!
//! Growth-rate checks need hundreds of generations, far beyond what fits in
//! memory as individual particles. Since branching does not depend on
//! position, the type counts evolve as a two-type Galton–Watson process that
//! is simulated here with binomial draws, following the same per-particle rules
//! as [`PopulationState`](super::PopulationState).

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::offspring::{BranchingMode, OffspringLaw};

/// Above this size binomial draws use the normal approximation.
const EXACT_BINOMIAL_LIMIT: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TypeCounts {
    pub ordinary: f64,
    pub pending: f64,
}

impl TypeCounts {
    pub fn single() -> Self {
        Self {
            ordinary: 1.0,
            pending: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.ordinary + self.pending
    }
}

/// `Bin(n, p)` for integral `n` stored as `f64`.
pub fn sample_binomial<R: Rng + ?Sized>(n: f64, p: f64, rng: &mut R) -> f64 {
    if n <= 0.0 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        return Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as f64;
    }
    let mean = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let draw = Normal::new(mean, sd).expect("valid normal").sample(rng);
    draw.round().clamp(0.0, n)
}

/// One generation of the count process.
pub fn step_counts<R: Rng + ?Sized>(counts: TypeCounts, law: &OffspringLaw, rng: &mut R) -> TypeCounts {
    let n = counts.ordinary;
    let deaths = sample_binomial(n, law.p0(), rng);
    let rest = n - deaths;
    let live = 1.0 - law.p0();
    let branch_given_live = if live > 0.0 { (law.p3() / live).min(1.0) } else { 0.0 };
    let branches = sample_binomial(rest, branch_given_live, rng);
    let continues = rest - branches;
    match law.mode() {
        BranchingMode::Classical => TypeCounts {
            ordinary: continues + 3.0 * branches,
            pending: 0.0,
        },
        BranchingMode::Delayed => {
            let resolved = sample_binomial(2.0 * counts.pending, live, rng);
            TypeCounts {
                ordinary: continues + branches + resolved,
                pending: branches,
            }
        }
    }
}

/// Ordinary counts for generations `0..=steps` starting from one particle.
pub fn ordinary_count_trajectory<R: Rng + ?Sized>(law: &OffspringLaw, steps: usize, rng: &mut R) -> Vec<f64> {
    let mut counts = TypeCounts::single();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(counts.ordinary);
    for _ in 0..steps {
        counts = step_counts(counts, law, rng);
        out.push(counts.ordinary);
    }
    out
}

/// Geometric growth rate `(N_to / N_from)^{1/(to − from)}`; `None` when the
/// count at `from` is zero.
pub fn growth_rate(trajectory: &[f64], from: usize, to: usize) -> Option<f64> {
    assert!(to > from && to < trajectory.len());
    let (a, b) = (trajectory[from], trajectory[to]);
    if a <= 0.0 || b <= 0.0 {
        return None;
    }
    Some(((b.ln() - a.ln()) / (to - from) as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::replica_rng;

    #[test]
    fn deterministic_delayed_sequence() {
        let law = OffspringLaw::delayed(0.0, 0.0, 1.0).unwrap();
        let traj = ordinary_count_trajectory(&law, 5, &mut replica_rng(0));
        assert_eq!(traj, vec![1.0, 1.0, 3.0, 5.0, 11.0, 21.0]);
    }

    #[test]
    fn classical_doubling_in_expectation() {
        let law = OffspringLaw::classical(0.0, 0.5, 0.5).unwrap();
        let mut rng = replica_rng(2);
        let mean: f64 = (0..10_000)
            .map(|_| {
                step_counts(
                    TypeCounts {
                        ordinary: 100.0,
                        pending: 0.0,
                    },
                    &law,
                    &mut rng,
                )
                .ordinary
            })
            .sum::<f64>()
            / 10_000.0;
        assert!((195.0..=205.0).contains(&mean), "{mean}");
    }

    #[test]
    fn huge_counts_stay_finite() {
        let law = OffspringLaw::delayed(0.004, 0.696, 0.3).unwrap();
        let traj = ordinary_count_trajectory(&law, 200, &mut replica_rng(9));
        assert!(traj.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn extinct_trajectory_has_no_rate() {
        assert_eq!(growth_rate(&[1.0, 0.0, 0.0], 1, 2), None);
    }
}
