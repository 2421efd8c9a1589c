//! Binary particle swarm over subsets of the candidate pool.
//!
//! Velocities are real and clamped; positions are bit vectors resampled each
//! iteration through a sigmoid transfer. Every particle draws from its own
//! random stream and the swarm best is reduced in particle order, so results
//! do not depend on how fitness evaluations are scheduled.

mod fitness;

pub use fitness::{
    FitnessConfig, FitnessEvaluator, MemoFitness, SubsetFitness,
};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{nonfinite, sigmoid, Scalar};
use crate::seed::{self, Rng};

/// Scores a subset mask. Implementations must be pure: the same mask always
/// yields the same value.
pub trait Fitness<F>: Sync {
    fn evaluate(&self, mask: &[bool]) -> Result<F>;
}

impl<F, T> Fitness<F> for T
where
    T: Fn(&[bool]) -> Result<F> + Sync,
{
    fn evaluate(&self, mask: &[bool]) -> Result<F> {
        self(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_iter: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub seed: u64,
    /// Weight of the subset-size term in the default fitness.
    pub size_penalty: f64,
    /// Stop after this many iterations without a better global best.
    pub early_stop: Option<usize>,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 100,
            inertia: 0.6,
            c1: 1.8,
            c2: 2.5,
            max_iter: 150,
            v_min: -5.0,
            v_max: 5.0,
            seed: 0,
            size_penalty: 0.01,
            early_stop: None,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::param("swarm needs at least 2 particles"));
        }
        if !(self.v_min < self.v_max) {
            return Err(Error::param("v_min must be below v_max"));
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return Err(Error::param("inertia must lie in [0,1]"));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.size_penalty >= 0.0) {
            return Err(Error::param("c1, c2 and size_penalty must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Particle<F: Scalar> {
    pub position: Vec<bool>,
    pub velocity: Vec<F>,
    pub personal_best: Vec<bool>,
    #[serde(with = "nonfinite")]
    pub personal_best_fitness: F,
}

/// `V <- w V + c1 r1 (P - X) + c2 r2 (G - X)`, clamped to `[v_min, v_max]`.
#[allow(clippy::too_many_arguments)]
pub fn update_velocity<F: Scalar>(
    velocity: &mut [F],
    position: &[bool],
    personal_best: &[bool],
    global_best: &[bool],
    cfg: &PsoConfig,
    r1: F,
    r2: F,
) {
    let bit = |b: bool| if b { F::one() } else { F::zero() };
    let (w, c1, c2) = (F::lit(cfg.inertia), F::lit(cfg.c1), F::lit(cfg.c2));
    let (lo, hi) = (F::lit(cfg.v_min), F::lit(cfg.v_max));
    for j in 0..velocity.len() {
        let x = bit(position[j]);
        let v = w * velocity[j] + c1 * r1 * (bit(personal_best[j]) - x) + c2 * r2 * (bit(global_best[j]) - x);
        velocity[j] = v.max(lo).min(hi);
    }
}

/// Resamples every bit: set with probability `sigmoid(V_j)`.
pub fn update_position<F: Scalar>(velocity: &[F], rng: &mut Rng) -> Vec<bool> {
    velocity.iter().map(|&v| F::lit(rng.gen::<f64>()) < sigmoid(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PsoResult<F: Scalar> {
    pub best_mask: Vec<bool>,
    #[serde(with = "nonfinite")]
    pub best_fitness: F,
    /// Global best fitness after initialization and after each iteration.
    #[serde(with = "nonfinite::vec")]
    pub history: Vec<F>,
    pub iterations: usize,
    /// How many final personal bests include each dimension.
    pub personal_best_votes: Vec<usize>,
}

impl<F: Scalar> PsoResult<F> {
    pub fn selected(&self) -> Vec<usize> {
        self.best_mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| j)
            .collect()
    }
}

fn score<F: Scalar, Fit: Fitness<F> + ?Sized>(fitness: &Fit, mask: &[bool], iteration: usize, particle: usize) -> Result<F> {
    if !mask.iter().any(|&b| b) {
        return Ok(F::neg_infinity());
    }
    fitness.evaluate(mask).map_err(|e| {
        Error::Numerical(format!(
            "fitness failed at iteration {iteration}, particle {particle}: {e}"
        ))
    })
}

pub fn optimize<F, Fit>(dim: usize, fitness: &Fit, cfg: &PsoConfig) -> Result<PsoResult<F>>
where
    F: Scalar,
    Fit: Fitness<F> + ?Sized,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::param("swarm dimension must be at least 1"));
    }
    let (lo, hi) = (cfg.v_min, cfg.v_max);
    let mut rngs: Vec<Rng> = (0..cfg.swarm_size)
        .map(|i| seed::rng(seed::derive(cfg.seed, i as u64)))
        .collect();
    let mut particles: Vec<Particle<F>> = rngs
        .iter_mut()
        .map(|rng| {
            let position: Vec<bool> = (0..dim).map(|_| rng.gen_bool(0.5)).collect();
            let velocity = (0..dim).map(|_| F::lit(rng.gen_range(lo..=hi))).collect();
            Particle {
                personal_best: position.clone(),
                position,
                velocity,
                personal_best_fitness: F::neg_infinity(),
            }
        })
        .collect();
    let initial: Vec<F> = particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| score(fitness, &p.position, 0, i))
        .collect::<Result<_>>()?;
    for (p, f) in particles.iter_mut().zip(initial) {
        p.personal_best_fitness = f;
    }
    let mut best_fitness = particles[0].personal_best_fitness;
    let mut best_mask = particles[0].personal_best.clone();
    for p in &particles[1..] {
        if p.personal_best_fitness > best_fitness {
            best_fitness = p.personal_best_fitness;
            best_mask = p.personal_best.clone();
        }
    }
    let mut history = vec![best_fitness];
    let mut stale = 0usize;
    let mut iterations = 0;

    for t in 1..=cfg.max_iter {
        let g = &best_mask;
        let scored: Vec<F> = particles
            .par_iter_mut()
            .zip(rngs.par_iter_mut())
            .enumerate()
            .map(|(i, (p, rng))| {
                let r1 = F::lit(rng.gen::<f64>());
                let r2 = F::lit(rng.gen::<f64>());
                update_velocity(&mut p.velocity, &p.position, &p.personal_best, g, cfg, r1, r2);
                p.position = update_position(&p.velocity, rng);
                score(fitness, &p.position, t, i)
            })
            .collect::<Result<_>>()?;
        let mut improved = false;
        for (p, f) in particles.iter_mut().zip(scored) {
            if f > p.personal_best_fitness {
                p.personal_best_fitness = f;
                p.personal_best.clone_from(&p.position);
            }
        }
        for p in &particles {
            if p.personal_best_fitness > best_fitness {
                best_fitness = p.personal_best_fitness;
                best_mask.clone_from(&p.personal_best);
                improved = true;
            }
        }
        history.push(best_fitness);
        iterations = t;
        stale = if improved { 0 } else { stale + 1 };
        if cfg.early_stop.is_some_and(|patience| stale >= patience) {
            break;
        }
    }

    let mut personal_best_votes = vec![0; dim];
    for p in &particles {
        for (v, &b) in personal_best_votes.iter_mut().zip(&p.personal_best) {
            *v += usize::from(b);
        }
    }
    Ok(PsoResult {
        best_mask,
        best_fitness,
        history,
        iterations,
        personal_best_votes,
    })
}
