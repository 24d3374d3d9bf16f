//! Artificial bee colony.
//!
//! One food source per population member. Employed and onlooker phases each
//! build their candidates from a snapshot of the sources, evaluate them as a
//! batch, then apply greedy replacement. A source that failed to improve
//! more than `limit` times is abandoned to a scout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator, Objective};
use super::{OptimizationResult, Optimizer, OptRng, SearchSpace};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbcParams {
    /// Abandonment limit as a multiple of `population * dim`.
    pub limit_factor: f64,
}

impl Default for AbcParams {
    fn default() -> Self {
        Self { limit_factor: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct Abc {
    common: CommonConfig,
    params: AbcParams,
}

impl Abc {
    pub fn new(common: CommonConfig, params: AbcParams) -> Self {
        Self { common, params }
    }
}

fn quality(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + f)
    } else {
        1.0 + f.abs()
    }
}

/// `v_d = x_d + phi (x_d - x_kd)` on one random axis, against a random partner.
fn neighbour(sources: &[Vec<f64>], i: usize, space: &SearchSpace, rng: &mut OptRng) -> Vec<f64> {
    let n = sources.len();
    let mut candidate = sources[i].clone();
    let d = rng.gen_range(0..space.dim());
    let phi: f64 = rng.gen_range(-1.0..=1.0);
    if n > 1 {
        let mut k = rng.gen_range(0..n - 1);
        if k >= i {
            k += 1;
        }
        candidate[d] += phi * (sources[i][d] - sources[k][d]);
    }
    space.clamp(&mut candidate);
    candidate
}

fn greedy(
    sources: &mut [Vec<f64>],
    fitness: &mut [f64],
    trials: &mut [usize],
    owners: &[usize],
    candidates: Vec<Vec<f64>>,
    values: &[f64],
) {
    for ((&i, candidate), &v) in owners.iter().zip(candidates).zip(values) {
        if v < fitness[i] {
            sources[i] = candidate;
            fitness[i] = v;
            trials[i] = 0;
        } else {
            trials[i] += 1;
        }
    }
}

impl Optimizer for Abc {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Abc
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let limit = (self.params.limit_factor * (population * space.dim()) as f64).round() as usize;

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut sources = init_positions(space, population, &mut rng);
        let mut fitness = eval.evaluate_all(&sources)?;
        let mut trials = vec![0usize; population];
        eval.checkpoint();

        for _ in 0..max_iterations {
            // employed bees
            let owners: Vec<usize> = (0..population).collect();
            let candidates: Vec<Vec<f64>> = owners
                .iter()
                .map(|&i| neighbour(&sources, i, space, &mut rng))
                .collect();
            let values = eval.evaluate_all(&candidates)?;
            greedy(&mut sources, &mut fitness, &mut trials, &owners, candidates, &values);

            // onlookers pick sources by roulette on quality
            let qualities: Vec<f64> = fitness.iter().map(|&f| quality(f)).collect();
            let total: f64 = qualities.iter().sum();
            let owners: Vec<usize> = (0..population)
                .map(|_| {
                    let mut ticket = rng.gen::<f64>() * total;
                    for (i, q) in qualities.iter().enumerate() {
                        if ticket < *q {
                            return i;
                        }
                        ticket -= q;
                    }
                    population - 1
                })
                .collect();
            let candidates: Vec<Vec<f64>> = owners
                .iter()
                .map(|&i| neighbour(&sources, i, space, &mut rng))
                .collect();
            let values = eval.evaluate_all(&candidates)?;
            greedy(&mut sources, &mut fitness, &mut trials, &owners, candidates, &values);

            // one scout per cycle replaces the most exhausted source
            let (worn, &count) = trials
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("population is non-empty");
            if count > limit {
                let fresh = space.sample(&mut rng);
                fitness[worn] = eval.evaluate(&fresh)?;
                sources[worn] = fresh;
                trials[worn] = 0;
            }
            eval.checkpoint();
        }
        Ok(eval.finish())
    }
}
