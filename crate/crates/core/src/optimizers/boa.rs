//! Butterfly Optimization Algorithm.
//!
//! Each butterfly emits fragrance `f = c * I^a`. With probability `p` it
//! moves towards the best butterfly found so far,
//! `x + (r^2 g* - x) f`, otherwise it takes a random step built from two
//! other members, `x + (r^2 x_j - x_k) f`. Moves within an iteration are
//! computed from the previous iteration's positions and best, then the whole
//! population is re-evaluated. The sensory modality grows once per iteration
//! as `c + 0.025 / (c * max_iterations)`.
//!
//! Random draws per butterfly, in order: switch roll, `r`, then `j` and `k`
//! for local moves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator, Objective};
use super::{OptimizationResult, Optimizer, SearchSpace};
use crate::error::{Error, Result};

/// How an objective value is turned into stimulus intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusIntensity {
    /// `I = 1 / (1 + max(f, 0))`: smaller objectives smell stronger.
    #[default]
    Reciprocal,
    /// `I = |f|`, as in the reference benchmark code.
    Absolute,
}

impl StimulusIntensity {
    pub fn intensity(self, objective: f64) -> f64 {
        match self {
            StimulusIntensity::Reciprocal => 1.0 / (1.0 + objective.max(0.0)),
            StimulusIntensity::Absolute => objective.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoaParams {
    pub switch_probability: f64,
    pub sensory_modality: f64,
    pub power_exponent: f64,
    pub intensity: StimulusIntensity,
}

impl Default for BoaParams {
    fn default() -> Self {
        Self {
            switch_probability: 0.8,
            sensory_modality: 0.01,
            power_exponent: 0.1,
            intensity: StimulusIntensity::Reciprocal,
        }
    }
}

impl BoaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.switch_probability) {
            return Err(Error::InvalidParameter(format!(
                "switch probability must lie in [0, 1], got {}",
                self.switch_probability
            )));
        }
        if !(self.sensory_modality > 0.0 && self.sensory_modality.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensory modality must be positive, got {}",
                self.sensory_modality
            )));
        }
        if !(self.power_exponent > 0.0 && self.power_exponent <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must lie in (0, 1], got {}",
                self.power_exponent
            )));
        }
        Ok(())
    }
}

/// `c * I^a`, zero for zero stimulus.
pub fn fragrance(intensity: f64, sensory_modality: f64, power_exponent: f64) -> f64 {
    if intensity <= 0.0 {
        return 0.0;
    }
    sensory_modality * intensity.powf(power_exponent)
}

/// Move towards the best solution: `x + (r^2 g* - x) f`. Not clipped.
pub fn global_move(x: &[f64], best: &[f64], fragrance: f64, r: f64) -> Vec<f64> {
    let r2 = r * r;
    x.iter()
        .zip(best)
        .map(|(xi, gi)| xi + (r2 * gi - xi) * fragrance)
        .collect()
}

/// Random walk from two members: `x + (r^2 x_j - x_k) f`. Not clipped.
pub fn local_move(x: &[f64], xj: &[f64], xk: &[f64], fragrance: f64, r: f64) -> Vec<f64> {
    let r2 = r * r;
    x.iter()
        .zip(xj.iter().zip(xk))
        .map(|(xi, (a, b))| xi + (r2 * a - b) * fragrance)
        .collect()
}

pub fn next_sensory_modality(current: f64, max_iterations: usize) -> f64 {
    current + 0.025 / (current * max_iterations as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MoveCounts {
    pub global: usize,
    pub local: usize,
}

#[derive(Debug, Clone)]
pub struct Boa {
    common: CommonConfig,
    params: BoaParams,
}

impl Boa {
    pub fn new(common: CommonConfig, params: BoaParams) -> Result<Self> {
        common.validate()?;
        params.validate()?;
        Ok(Self { common, params })
    }

    /// Runs the search and also reports how many moves of each kind were made.
    pub fn run(
        &self,
        objective: &dyn Objective,
        space: &SearchSpace,
    ) -> Result<(OptimizationResult, MoveCounts)> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let BoaParams {
            switch_probability,
            mut sensory_modality,
            power_exponent,
            intensity,
        } = self.params;

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut positions = init_positions(space, population, &mut rng);
        let mut fitness = eval.evaluate_all(&positions)?;
        eval.checkpoint();
        let mut moves = MoveCounts::default();

        for _ in 0..max_iterations {
            let best = eval.best_position().to_vec();
            let mut next = Vec::with_capacity(population);
            for (x, &fx) in positions.iter().zip(&fitness) {
                let scent = fragrance(intensity.intensity(fx), sensory_modality, power_exponent);
                let roll: f64 = rng.gen();
                let r: f64 = rng.gen();
                let mut moved = if roll < switch_probability {
                    moves.global += 1;
                    global_move(x, &best, scent, r)
                } else {
                    moves.local += 1;
                    let j = rng.gen_range(0..population);
                    let k = rng.gen_range(0..population);
                    local_move(x, &positions[j], &positions[k], scent, r)
                };
                space.clamp(&mut moved);
                next.push(moved);
            }
            fitness = eval.evaluate_all(&next)?;
            positions = next;
            sensory_modality = next_sensory_modality(sensory_modality, max_iterations);
            eval.checkpoint();
        }
        Ok((eval.finish(), moves))
    }
}

impl Optimizer for Boa {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Boa
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        self.run(objective, space).map(|(result, _)| result)
    }
}
