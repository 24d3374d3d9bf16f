//! Sine cosine algorithm.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator, Objective};
use super::{OptimizationResult, Optimizer, SearchSpace};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SineCosineParams {
    /// Initial amplitude, decayed linearly to zero.
    pub amplitude: f64,
}

impl Default for SineCosineParams {
    fn default() -> Self {
        Self { amplitude: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SineCosine {
    common: CommonConfig,
    params: SineCosineParams,
}

impl SineCosine {
    pub fn new(common: CommonConfig, params: SineCosineParams) -> Self {
        Self { common, params }
    }
}

impl Optimizer for SineCosine {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Sca
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let a = self.params.amplitude;
        let dim = space.dim();

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut positions = init_positions(space, population, &mut rng);
        eval.evaluate_all(&positions)?;
        eval.checkpoint();

        for t in 0..max_iterations {
            let r1 = a - t as f64 * a / max_iterations as f64;
            let dest = eval.best_position().to_vec();
            for x in positions.iter_mut() {
                for d in 0..dim {
                    let r2 = 2.0 * PI * rng.gen::<f64>();
                    let r3 = 2.0 * rng.gen::<f64>();
                    let r4: f64 = rng.gen();
                    let gap = (r3 * dest[d] - x[d]).abs();
                    x[d] += if r4 < 0.5 {
                        r1 * r2.sin() * gap
                    } else {
                        r1 * r2.cos() * gap
                    };
                }
                space.clamp(x);
            }
            eval.evaluate_all(&positions)?;
            eval.checkpoint();
        }
        Ok(eval.finish())
    }
}
