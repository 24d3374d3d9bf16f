//! Particle swarm optimisation with constriction-style constants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator, Objective};
use super::{OptimizationResult, Optimizer, SearchSpace};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of each axis' width.
    pub max_velocity: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            max_velocity: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pso {
    common: CommonConfig,
    params: PsoParams,
}

impl Pso {
    pub fn new(common: CommonConfig, params: PsoParams) -> Self {
        Self { common, params }
    }
}

impl Optimizer for Pso {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Pso
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let p = self.params;
        let dim = space.dim();
        let vmax: Vec<f64> = (0..dim).map(|d| p.max_velocity * space.width(d)).collect();

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut positions = init_positions(space, population, &mut rng);
        let mut velocities = vec![vec![0.0; dim]; population];
        let fitness = eval.evaluate_all(&positions)?;
        let mut personal = positions.clone();
        let mut personal_fitness = fitness;
        eval.checkpoint();

        for _ in 0..max_iterations {
            let global = eval.best_position().to_vec();
            for i in 0..population {
                for d in 0..dim {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    let x = positions[i][d];
                    let v = p.inertia * velocities[i][d]
                        + p.cognitive * r1 * (personal[i][d] - x)
                        + p.social * r2 * (global[d] - x);
                    velocities[i][d] = v.clamp(-vmax[d], vmax[d]);
                    positions[i][d] = x + velocities[i][d];
                }
                space.clamp(&mut positions[i]);
            }
            let fitness = eval.evaluate_all(&positions)?;
            for i in 0..population {
                if fitness[i] < personal_fitness[i] {
                    personal_fitness[i] = fitness[i];
                    personal[i].clone_from(&positions[i]);
                }
            }
            eval.checkpoint();
        }
        Ok(eval.finish())
    }
}
