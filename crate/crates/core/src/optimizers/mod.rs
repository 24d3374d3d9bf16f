//! Bound-constrained population-based minimisers behind one interface.
//!
//! Every optimiser draws its randomness from a single seeded ChaCha stream
//! on the coordinating thread; objective evaluations of one batch may run
//! in parallel and are collected in population order, so results depend
//! only on (seed, config, objective).

mod abc;
mod boa;
mod fa;
mod ga;
mod pso;
mod sca;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::distributions::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use abc::{Abc, AbcParams};
pub use boa::{
    fragrance, global_move, local_move, next_sensory_modality, Boa, BoaParams, MoveCounts,
    StimulusIntensity,
};
pub use fa::{Firefly, FireflyParams};
pub use ga::{Genetic, GeneticParams};
pub use pso::{Pso, PsoParams};
pub use sca::{SineCosine, SineCosineParams};

pub(crate) type OptRng = ChaCha8Rng;

pub(crate) fn rng_from_seed(seed: u64) -> OptRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimisation target. Lower is better.
pub trait Objective: Sync {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", deny_unknown_fields)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawSpace> for SearchSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        SearchSpace::new(raw.lower, raw.upper)
    }
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidSpace(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidSpace("no dimensions".into()));
        }
        for (d, (lb, ub)) in lower.iter().zip(&upper).enumerate() {
            if !lb.is_finite() || !ub.is_finite() || lb >= ub {
                return Err(Error::InvalidSpace(format!(
                    "dimension {d}: need finite lb < ub, got [{lb}, {ub}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval on every axis.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lb, ub))| *v >= *lb && *v <= *ub)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lb, ub)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lb, *ub);
        }
    }

    /// `lb + (ub - lb) * u` coordinate-wise.
    pub fn point_at(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(u, (lb, ub))| lb + (ub - lb) * u)
            .collect()
    }

    pub(crate) fn sample(&self, rng: &mut OptRng) -> Vec<f64> {
        let unit: Vec<f64> = (0..self.dim()).map(|_| rng.sample::<f64, _>(Open01)).collect();
        let mut x = self.point_at(&unit);
        // rounding can land exactly on a bound for very narrow boxes
        self.clamp(&mut x);
        x
    }
}

/// Uniform random population inside `space`.
pub fn initialize_population(space: &SearchSpace, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("population must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(init_positions(space, count, &mut rng))
}

pub(crate) fn init_positions(space: &SearchSpace, count: usize, rng: &mut OptRng) -> Vec<Vec<f64>> {
    (0..count).map(|_| space.sample(rng)).collect()
}

/// Settings shared by every optimiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommonConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for CommonConfig {
    fn default() -> Self {
        Self {
            population: 20,
            max_iterations: 50,
            seed: 0,
        }
    }
}

impl CommonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(format!(
                "population and iterations must be positive, got {} and {}",
                self.population, self.max_iterations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after initialisation and after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

pub trait Optimizer: Send + Sync {
    fn algorithm(&self) -> Algorithm;

    fn minimize(&self, objective: &dyn Objective, space: &SearchSpace) -> Result<OptimizationResult>;
}

/// Algorithms the toolkit knows by name. Only some are implemented; the
/// rest are accepted in configuration and rejected when built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Boa,
    Pso,
    Ga,
    Abc,
    Fa,
    Sca,
    Ssa,
    Bbo,
    Hso,
    Iwo,
    Tlbo,
    Csa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Boa,
        Algorithm::Pso,
        Algorithm::Ga,
        Algorithm::Abc,
        Algorithm::Fa,
        Algorithm::Sca,
        Algorithm::Ssa,
        Algorithm::Bbo,
        Algorithm::Hso,
        Algorithm::Iwo,
        Algorithm::Tlbo,
        Algorithm::Csa,
    ];

    pub const IMPLEMENTED: [Algorithm; 6] = [
        Algorithm::Boa,
        Algorithm::Pso,
        Algorithm::Ga,
        Algorithm::Abc,
        Algorithm::Fa,
        Algorithm::Sca,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Boa => "boa",
            Algorithm::Pso => "pso",
            Algorithm::Ga => "ga",
            Algorithm::Abc => "abc",
            Algorithm::Fa => "fa",
            Algorithm::Sca => "sca",
            Algorithm::Ssa => "ssa",
            Algorithm::Bbo => "bbo",
            Algorithm::Hso => "hso",
            Algorithm::Iwo => "iwo",
            Algorithm::Tlbo => "tlbo",
            Algorithm::Csa => "csa",
        }
    }

    /// Stable numeric code, used for seed derivation.
    pub fn code(self) -> u64 {
        Self::ALL.iter().position(|&a| a == self).unwrap() as u64 + 1
    }

    pub fn is_implemented(self) -> bool {
        Self::IMPLEMENTED.contains(&self)
    }

    /// Table label such as `BOA-SVR`.
    pub fn model_label(self) -> String {
        format!("{}-SVR", self.id().to_ascii_uppercase())
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id().to_ascii_uppercase())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_suffix("-svr").unwrap_or(&key);
        Self::ALL
            .into_iter()
            .find(|a| a.id() == key)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.id().to_string()
    }
}

/// Per-algorithm parameters; each section falls back to its defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmParams {
    pub boa: BoaParams,
    pub pso: PsoParams,
    pub ga: GeneticParams,
    pub abc: AbcParams,
    pub fa: FireflyParams,
    pub sca: SineCosineParams,
}

/// Builds the optimiser for `algorithm`.
pub fn build(
    algorithm: Algorithm,
    common: CommonConfig,
    params: &AlgorithmParams,
) -> Result<Box<dyn Optimizer>> {
    common.validate()?;
    Ok(match algorithm {
        Algorithm::Boa => Box::new(Boa::new(common, params.boa)?),
        Algorithm::Pso => Box::new(Pso::new(common, params.pso)),
        Algorithm::Ga => Box::new(Genetic::new(common, params.ga)),
        Algorithm::Abc => Box::new(Abc::new(common, params.abc)),
        Algorithm::Fa => Box::new(Firefly::new(common, params.fa)),
        Algorithm::Sca => Box::new(SineCosine::new(common, params.sca)),
        other => return Err(Error::UnsupportedAlgorithm(other.to_string())),
    })
}

/// Counts evaluations, enforces finiteness and keeps the best-so-far record.
pub(crate) struct Evaluator<'a> {
    objective: &'a dyn Objective,
    start: Instant,
    evaluations: usize,
    best_position: Vec<f64>,
    best_fitness: f64,
    history: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(objective: &'a dyn Objective) -> Self {
        Self {
            objective,
            start: Instant::now(),
            evaluations: 0,
            best_position: Vec::new(),
            best_fitness: f64::INFINITY,
            history: Vec::new(),
        }
    }

    fn record(&mut self, x: &[f64], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::ObjectiveNonFinite {
                position: x.to_vec(),
                value,
            });
        }
        if value < self.best_fitness || self.best_position.is_empty() {
            self.best_fitness = value;
            self.best_position = x.to_vec();
        }
        Ok(())
    }

    pub(crate) fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let value = self.objective.evaluate(x);
        self.evaluations += 1;
        self.record(x, value)?;
        Ok(value)
    }

    /// Evaluates a batch in parallel; results come back in input order.
    pub(crate) fn evaluate_all(&mut self, positions: &[Vec<f64>]) -> Result<Vec<f64>> {
        let objective = self.objective;
        let values: Vec<f64> = positions.par_iter().map(|x| objective.evaluate(x)).collect();
        self.evaluations += positions.len();
        for (x, &v) in positions.iter().zip(&values) {
            self.record(x, v)?;
        }
        Ok(values)
    }

    pub(crate) fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    /// Closes an iteration (or the initialisation) in the history.
    pub(crate) fn checkpoint(&mut self) {
        self.history.push(self.best_fitness);
    }

    pub(crate) fn finish(self) -> OptimizationResult {
        OptimizationResult {
            best_position: self.best_position,
            best_fitness: self.best_fitness,
            history: self.history,
            evaluations: self.evaluations,
            elapsed: self.start.elapsed().as_secs_f64(),
        }
    }
}
