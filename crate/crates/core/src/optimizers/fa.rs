//! Firefly algorithm.
//!
//! Every firefly moves towards each brighter one with attractiveness
//! `beta0 * exp(-gamma r^2)` plus a uniform jitter scaled by `alpha`, where
//! distances are measured in box-normalised coordinates. The whole swarm is
//! evaluated once per generation and `alpha` decays geometrically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator, Objective};
use super::{OptimizationResult, Optimizer, SearchSpace};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FireflyParams {
    pub beta0: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub alpha_decay: f64,
}

impl Default for FireflyParams {
    fn default() -> Self {
        Self {
            beta0: 1.0,
            gamma: 1.0,
            alpha: 0.2,
            alpha_decay: 0.97,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Firefly {
    common: CommonConfig,
    params: FireflyParams,
}

impl Firefly {
    pub fn new(common: CommonConfig, params: FireflyParams) -> Self {
        Self { common, params }
    }
}

impl Optimizer for Firefly {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Fa
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let p = self.params;
        let dim = space.dim();
        let widths: Vec<f64> = (0..dim).map(|d| space.width(d)).collect();

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut positions = init_positions(space, population, &mut rng);
        let mut fitness = eval.evaluate_all(&positions)?;
        eval.checkpoint();
        let mut alpha = p.alpha;

        for _ in 0..max_iterations {
            let mut next = Vec::with_capacity(population);
            for i in 0..population {
                let mut x = positions[i].clone();
                let mut moved = false;
                for j in 0..population {
                    if fitness[j] >= fitness[i] {
                        continue;
                    }
                    moved = true;
                    let r2: f64 = (0..dim)
                        .map(|d| ((x[d] - positions[j][d]) / widths[d]).powi(2))
                        .sum();
                    let beta = p.beta0 * (-p.gamma * r2).exp();
                    for d in 0..dim {
                        let jitter = alpha * (rng.gen::<f64>() - 0.5) * widths[d];
                        x[d] += beta * (positions[j][d] - x[d]) + jitter;
                    }
                }
                if !moved {
                    // brightest firefly wanders
                    for d in 0..dim {
                        x[d] += alpha * (rng.gen::<f64>() - 0.5) * widths[d];
                    }
                }
                space.clamp(&mut x);
                next.push(x);
            }
            fitness = eval.evaluate_all(&next)?;
            positions = next;
            alpha *= p.alpha_decay;
            eval.checkpoint();
        }
        Ok(eval.finish())
    }
}
