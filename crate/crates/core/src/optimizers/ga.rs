//! Real-coded genetic algorithm: binary tournaments, BLX-alpha crossover,
//! Gaussian mutation and a single elite.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{init_positions, rng_from_seed, Algorithm, CommonConfig, Evaluator};
use super::{Objective, OptimizationResult, Optimizer, OptRng, SearchSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneticParams {
    pub tournament_size: usize,
    pub blend_alpha: f64,
    /// Mutation standard deviation as a fraction of each axis' width.
    pub mutation_scale: f64,
    /// Per-gene mutation probability; `None` means `1 / dim`.
    pub mutation_rate: Option<f64>,
    pub elites: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        Self {
            tournament_size: 2,
            blend_alpha: 0.5,
            mutation_scale: 0.1,
            mutation_rate: None,
            elites: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Genetic {
    common: CommonConfig,
    params: GeneticParams,
}

impl Genetic {
    pub fn new(common: CommonConfig, params: GeneticParams) -> Self {
        Self { common, params }
    }

    fn tournament(&self, fitness: &[f64], rng: &mut OptRng) -> usize {
        let mut winner = rng.gen_range(0..fitness.len());
        for _ in 1..self.params.tournament_size.max(1) {
            let challenger = rng.gen_range(0..fitness.len());
            if fitness[challenger] < fitness[winner] {
                winner = challenger;
            }
        }
        winner
    }
}

impl Optimizer for Genetic {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ga
    }

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult> {
        let CommonConfig {
            population,
            max_iterations,
            seed,
        } = self.common;
        let p = self.params;
        let dim = space.dim();
        let rate = p.mutation_rate.unwrap_or(1.0 / dim as f64);
        let elites = p.elites.min(population);
        let noise: Vec<Normal<f64>> = (0..dim)
            .map(|d| Normal::new(0.0, p.mutation_scale * space.width(d)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("mutation scale: {e}")))?;

        let mut rng = rng_from_seed(seed);
        let mut eval = Evaluator::new(objective);
        let mut positions = init_positions(space, population, &mut rng);
        let mut fitness = eval.evaluate_all(&positions)?;
        eval.checkpoint();

        for _ in 0..max_iterations {
            let mut order: Vec<usize> = (0..population).collect();
            order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
            let mut next: Vec<Vec<f64>> = order[..elites].iter().map(|&i| positions[i].clone()).collect();
            let mut next_fitness: Vec<f64> = order[..elites].iter().map(|&i| fitness[i]).collect();

            let mut children = Vec::with_capacity(population - elites);
            while next.len() + children.len() < population {
                let a = self.tournament(&fitness, &mut rng);
                let b = self.tournament(&fitness, &mut rng);
                let mut child: Vec<f64> = (0..dim)
                    .map(|d| {
                        let lo = positions[a][d].min(positions[b][d]);
                        let hi = positions[a][d].max(positions[b][d]);
                        let spread = p.blend_alpha * (hi - lo);
                        let u: f64 = rng.gen();
                        lo - spread + u * (hi - lo + 2.0 * spread)
                    })
                    .collect();
                for d in 0..dim {
                    if rng.gen::<f64>() < rate {
                        child[d] += noise[d].sample(&mut rng);
                    }
                }
                space.clamp(&mut child);
                children.push(child);
            }
            let child_fitness = eval.evaluate_all(&children)?;
            next.extend(children);
            next_fitness.extend(child_fitness);
            positions = next;
            fitness = next_fitness;
            eval.checkpoint();
        }
        Ok(eval.finish())
    }
}
