use rand::Rng;

use crate::error::{Error, Result};
use crate::jump_models::JumpModel;
use crate::offspring::{BranchingMode, Fate, OffspringLaw};

/// Owned snapshot of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub position: Vec<f64>,
    /// Delayed mode: the particle resolves into two ordinary children next
    /// generation.
    pub pending_type2: bool,
}

/// Population threshold for path purging: once more than `q_c` particles are
/// alive, only the `q_c / 2` best projected ones are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PurgeRule {
    q_c: usize,
}

impl PurgeRule {
    pub fn new(q_c: usize) -> Result<Self> {
        if q_c < 2 || !q_c.is_multiple_of(2) {
            return Err(Error::ConfigError(format!(
                "q_c must be an even integer >= 2, got {q_c}"
            )));
        }
        Ok(Self { q_c })
    }

    pub fn q_c(&self) -> usize {
        self.q_c
    }

    pub fn retained(&self) -> usize {
        self.q_c / 2
    }
}

impl Default for PurgeRule {
    fn default() -> Self {
        Self { q_c: 9000 }
    }
}

/// Live particles of one replica, stored column-wise in creation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    generation: u64,
    dim: usize,
    ids: Vec<u64>,
    positions: Vec<f64>,
    pending: Vec<bool>,
    next_id: u64,
    peak_size: usize,
    purge_events: u64,
}

impl PopulationState {
    /// Generation 0: one ordinary particle at the origin.
    pub fn new(dim: usize) -> Self {
        Self {
            generation: 0,
            dim,
            ids: vec![0],
            positions: vec![0.0; dim],
            pending: vec![false],
            next_id: 1,
            peak_size: 1,
            purge_events: 0,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn peak_size(&self) -> usize {
        self.peak_size
    }

    pub fn purge_events(&self) -> u64 {
        self.purge_events
    }

    /// Particles that are not waiting on a type-II branching.
    pub fn ordinary_count(&self) -> usize {
        self.pending.iter().filter(|p| !**p).count()
    }

    pub fn pending_count(&self) -> usize {
        self.len() - self.ordinary_count()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn is_pending(&self, i: usize) -> bool {
        self.pending[i]
    }

    pub fn particle(&self, i: usize) -> Particle {
        Particle {
            id: self.ids[i],
            position: self.position(i).to_vec(),
            pending_type2: self.pending[i],
        }
    }

    pub fn particles(&self) -> impl Iterator<Item = Particle> + '_ {
        (0..self.len()).map(|i| self.particle(i))
    }

    /// Advances one generation according to the law's branching mode.
    pub fn step<R: Rng + ?Sized>(&mut self, offspring: &OffspringLaw, jump: &JumpModel, rng: &mut R) {
        match offspring.mode() {
            BranchingMode::Classical => self.step_classical(offspring, jump, rng),
            BranchingMode::Delayed => self.step_delayed(offspring, jump, rng),
        }
    }

    /// Each particle is replaced by 0, 1 or 3 children at its location, and
    /// every child then takes an independent jump.
    pub fn step_classical<R: Rng + ?Sized>(&mut self, offspring: &OffspringLaw, jump: &JumpModel, rng: &mut R) {
        debug_assert_eq!(offspring.mode(), BranchingMode::Classical);
        let mut next = Builder::with_capacity(self, 2 * self.len());
        for i in 0..self.len() {
            let children = match offspring.sample_fate(rng) {
                Fate::Die => 0,
                Fate::Continue => 1,
                Fate::Branch => 3,
            };
            for _ in 0..children {
                next.push_child(self.position(i), false, jump, rng);
            }
        }
        self.install(next);
    }

    /// Delayed branching. An ordinary particle dies (p0), continues (p1), or
    /// type-I branches (p3) into one ordinary and one pending child. A pending
    /// particle resolves into two ordinary children, each surviving with
    /// probability `1 - p0`. Every child takes a jump.
    pub fn step_delayed<R: Rng + ?Sized>(&mut self, offspring: &OffspringLaw, jump: &JumpModel, rng: &mut R) {
        let mut next = Builder::with_capacity(self, 2 * self.len());
        for i in 0..self.len() {
            if self.pending[i] {
                for _ in 0..2 {
                    if rng.random::<f64>() >= offspring.p0() {
                        next.push_child(self.position(i), false, jump, rng);
                    }
                }
                continue;
            }
            match offspring.sample_fate(rng) {
                Fate::Die => {}
                Fate::Continue => next.push_child(self.position(i), false, jump, rng),
                Fate::Branch => {
                    next.push_child(self.position(i), false, jump, rng);
                    next.push_child(self.position(i), true, jump, rng);
                }
            }
        }
        self.install(next);
    }

    fn install(&mut self, next: Builder) {
        self.ids = next.ids;
        self.positions = next.positions;
        self.pending = next.pending;
        self.next_id = next.next_id;
        self.generation += 1;
        self.peak_size = self.peak_size.max(self.ids.len());
    }

    /// Keeps the `q_c / 2` particles with the largest `⟨position, normal⟩`
    /// (ties go to the smaller id) once the population exceeds `q_c`.
    /// Survivors keep their relative order. Returns whether anything was
    /// removed.
    pub fn purge(&mut self, normal: &[f64], rule: PurgeRule) -> bool {
        if self.len() <= rule.q_c() {
            return false;
        }
        let keep = rule.retained();
        let proj: Vec<f64> = (0..self.len())
            .map(|i| self.position(i).iter().zip(normal).map(|(a, b)| a * b).sum())
            .collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.select_nth_unstable_by(keep - 1, |&a, &b| {
            proj[b].total_cmp(&proj[a]).then_with(|| self.ids[a].cmp(&self.ids[b]))
        });
        let mut survivors = order[..keep].to_vec();
        survivors.sort_unstable();

        let d = self.dim;
        let mut positions = Vec::with_capacity(keep * d);
        for &i in &survivors {
            positions.extend_from_slice(&self.positions[i * d..(i + 1) * d]);
        }
        self.ids = survivors.iter().map(|&i| self.ids[i]).collect();
        self.pending = survivors.iter().map(|&i| self.pending[i]).collect();
        self.positions = positions;
        self.purge_events += 1;
        true
    }

    /// Index of the first particle (in storage order) inside the closed ball
    /// of `radius` around `center`.
    pub fn first_hit(&self, center: &[f64], radius: f64, include_pending: bool) -> Option<usize> {
        let r2 = radius * radius;
        (0..self.len()).find(|&i| {
            (include_pending || !self.pending[i])
                && self
                    .position(i)
                    .iter()
                    .zip(center)
                    .map(|(p, c)| (p - c) * (p - c))
                    .sum::<f64>()
                    <= r2
        })
    }
}

struct Builder {
    ids: Vec<u64>,
    positions: Vec<f64>,
    pending: Vec<bool>,
    next_id: u64,
    scratch: Vec<f64>,
}

impl Builder {
    fn with_capacity(state: &PopulationState, n: usize) -> Self {
        Self {
            ids: Vec::with_capacity(n),
            positions: Vec::with_capacity(n * state.dim),
            pending: Vec::with_capacity(n),
            next_id: state.next_id,
            scratch: vec![0.0; state.dim],
        }
    }

    fn push_child<R: Rng + ?Sized>(&mut self, parent: &[f64], pending: bool, jump: &JumpModel, rng: &mut R) {
        jump.sample_into(rng, &mut self.scratch);
        self.positions
            .extend(parent.iter().zip(&self.scratch).map(|(p, j)| p + j));
        self.ids.push(self.next_id);
        self.next_id += 1;
        self.pending.push(pending);
    }
}
