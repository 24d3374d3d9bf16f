//! End-to-end calibration: phase-space preprocessing, optimiser-driven
//! search over `(C, gamma, epsilon)`, final fit and one-step-ahead forecasts.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{dm_test, DmResult, ForecastPair};
use crate::optimizers::{self, AlgorithmParams, CommonConfig, SearchSpace};
use crate::optimizers::{AbcParams, Algorithm, BoaParams, FireflyParams, GeneticParams};
use crate::optimizers::{PsoParams, SineCosineParams};
use crate::phase_space::{
    embed, select_delay, select_dimension, split, train_row_count, DelayEstimate,
    DimensionEstimate, EmbeddedDataset, EmbeddingSpec, FnnParams, NormalizationParams, TimeSeries,
};
use crate::svr::{self, SolverOptions, SvrHyperParams, SvrModel};

/// How the delay embedding is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingChoice {
    /// Delay from the first MI minimum, dimension from false nearest neighbours.
    Auto {
        #[serde(default = "default_max_delay")]
        max_delay: usize,
        #[serde(default = "default_max_dim")]
        max_dim: usize,
        /// Histogram bins for MI; `None` uses `max(2, floor(sqrt(n - tau)))`.
        #[serde(default)]
        bins: Option<usize>,
        #[serde(default)]
        fnn: FnnParams,
    },
    Fixed { dim: usize, delay: usize },
}

fn default_max_delay() -> usize {
    20
}

fn default_max_dim() -> usize {
    20
}

impl Default for EmbeddingChoice {
    fn default() -> Self {
        EmbeddingChoice::Auto {
            max_delay: default_max_delay(),
            max_dim: default_max_dim(),
            bins: None,
            fnn: FnnParams::default(),
        }
    }
}

/// Which data set the optimiser scores candidates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessTarget {
    /// The held-out test rows.
    #[default]
    Test,
    /// The last 20% of the training rows; the test rows stay unseen.
    Validation,
}

/// Coordinates the optimiser searches in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchScale {
    #[default]
    Linear,
    /// Base-4 exponents of the configured bounds.
    Log4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub max_iterations: usize,
    pub boa: BoaParams,
    pub pso: PsoParams,
    pub ga: GeneticParams,
    pub abc: AbcParams,
    pub fa: FireflyParams,
    pub sca: SineCosineParams,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let common = CommonConfig::default();
        Self {
            algorithm: Algorithm::Boa,
            population: common.population,
            max_iterations: common.max_iterations,
            boa: BoaParams::default(),
            pso: PsoParams::default(),
            ga: GeneticParams::default(),
            abc: AbcParams::default(),
            fa: FireflyParams::default(),
            sca: SineCosineParams::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn params(&self) -> AlgorithmParams {
        AlgorithmParams {
            boa: self.boa,
            pso: self.pso,
            ga: self.ga,
            abc: self.abc,
            fa: self.fa,
            sca: self.sca,
        }
    }
}

/// Default box: `C, gamma in [4^-10, 4^4]`, `epsilon in [4^-10, 4^-1]`.
pub fn default_search_space() -> SearchSpace {
    let lo = 4f64.powi(-10);
    SearchSpace::new(vec![lo, lo, lo], vec![4f64.powi(4), 4f64.powi(4), 4f64.powi(-1)])
        .expect("default bounds are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub train_fraction: f64,
    pub embedding: EmbeddingChoice,
    /// Bounds for `(C, gamma, epsilon)`.
    pub search_space: SearchSpace,
    pub search_scale: SearchScale,
    pub fitness_target: FitnessTarget,
    /// Fit the min-max scaler on the training span only.
    pub fit_scaler_on_train_only: bool,
    pub optimizer: OptimizerConfig,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            train_fraction: 0.8,
            embedding: EmbeddingChoice::default(),
            search_space: default_search_space(),
            search_scale: SearchScale::Linear,
            fitness_target: FitnessTarget::Test,
            fit_scaler_on_train_only: false,
            optimizer: OptimizerConfig::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.search_space.dim() != 3 {
            return Err(Error::InvalidSpace(format!(
                "search space must have 3 dimensions (C, gamma, epsilon), got {}",
                self.search_space.dim()
            )));
        }
        let lower = self.search_space.lower();
        if lower[0] <= 0.0 || lower[1] <= 0.0 || lower[2] < 0.0 {
            return Err(Error::InvalidSpace(
                "C and gamma bounds must be positive and epsilon bounds non-negative".into(),
            ));
        }
        if self.search_scale == SearchScale::Log4 && lower[2] <= 0.0 {
            return Err(Error::InvalidSpace("log4 search needs a positive epsilon lower bound".into()));
        }
        CommonConfig {
            population: self.optimizer.population,
            max_iterations: self.optimizer.max_iterations,
            seed: self.seed,
        }
        .validate()
    }

    /// Box the optimiser actually searches.
    pub fn optimizer_space(&self) -> Result<SearchSpace> {
        match self.search_scale {
            SearchScale::Linear => Ok(self.search_space.clone()),
            SearchScale::Log4 => SearchSpace::new(
                self.search_space.lower().iter().map(|v| v.log(4.0)).collect(),
                self.search_space.upper().iter().map(|v| v.log(4.0)).collect(),
            ),
        }
    }

    /// Maps an optimiser position to SVR hyperparameters inside the box.
    pub fn candidate(&self, position: &[f64]) -> Result<SvrHyperParams> {
        let mut linear: Vec<f64> = match self.search_scale {
            SearchScale::Linear => position.to_vec(),
            SearchScale::Log4 => position.iter().map(|v| 4f64.powf(*v)).collect(),
        };
        self.search_space.clamp(&mut linear);
        SvrHyperParams::new(linear[0], linear[1], linear[2])
    }
}

/// Seed used by `algorithm` for a run with master seed `master`.
///
/// SplitMix64 of `master + code * 0x9E3779B97F4A7C15`, where `code` is the
/// algorithm's stable number, so each algorithm's stream does not depend on
/// which others run alongside it.
pub fn derive_seed(master: u64, algorithm: Algorithm) -> u64 {
    let mut z = master.wrapping_add(algorithm.code().wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Preprocessed data shared by every algorithm in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub series: TimeSeries,
    pub normalized: Vec<f64>,
    pub scaler: NormalizationParams,
    pub embedding: EmbeddingSpec,
    pub delay_estimate: Option<DelayEstimate>,
    pub dimension_estimate: Option<DimensionEstimate>,
    pub train: EmbeddedDataset,
    pub test: EmbeddedDataset,
}

impl PreparedData {
    /// `(fit, score)` sets for the optimiser's objective.
    pub fn fitness_sets(&self, target: FitnessTarget) -> Result<(EmbeddedDataset, EmbeddedDataset)> {
        match target {
            FitnessTarget::Test => Ok((self.train.clone(), self.test.clone())),
            FitnessTarget::Validation => split(&self.train, 0.8),
        }
    }
}

/// Estimates `(tau, m)` the same way [`prepare`] does in auto mode.
pub fn estimate_embedding(
    values: &[f64],
    max_delay: usize,
    max_dim: usize,
    bins: Option<usize>,
    fnn: &FnnParams,
) -> Result<(EmbeddingSpec, DelayEstimate, DimensionEstimate)> {
    let delay = select_delay(values, max_delay, bins)?;
    let dim = select_dimension(values, delay.delay, max_dim, fnn)?;
    let spec = EmbeddingSpec::new(dim.dim, delay.delay)?;
    Ok((spec, delay, dim))
}

/// Step 1 (embedding parameters) and step 2 (scaling, embedding, split).
pub fn prepare(series: &TimeSeries, config: &ExperimentConfig) -> Result<PreparedData> {
    config.validate()?;
    let values = series.values();
    let (embedding, delay_estimate, dimension_estimate) = match config.embedding {
        EmbeddingChoice::Auto {
            max_delay,
            max_dim,
            bins,
            fnn,
        } => {
            let (spec, delay, dim) = estimate_embedding(values, max_delay, max_dim, bins, &fnn)
                .map_err(|e| e.at("phase-space estimation"))?;
            (spec, Some(delay), Some(dim))
        }
        EmbeddingChoice::Fixed { dim, delay } => (EmbeddingSpec::new(dim, delay)?, None, None),
    };

    let scaler = if config.fit_scaler_on_train_only {
        let rows = embedding.rows(values.len());
        let train_rows = train_row_count(rows, config.train_fraction);
        let last = (train_rows + embedding.window()).min(values.len() - 1);
        NormalizationParams::fit(&values[..=last])
    } else {
        NormalizationParams::fit(values)
    }
    .map_err(|e| e.at("normalization"))?;
    let normalized: Vec<f64> = values.iter().map(|&v| scaler.apply(v)).collect();

    let dataset = embed(&normalized, embedding).map_err(|e| e.at("embedding"))?;
    let (train, test) = split(&dataset, config.train_fraction).map_err(|e| e.at("split"))?;
    Ok(PreparedData {
        series: series.clone(),
        normalized,
        scaler,
        embedding,
        delay_estimate,
        dimension_estimate,
        train,
        test,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub mse: f64,
    /// `None` when an actual value is exactly zero.
    pub mape: Option<f64>,
    pub converged: bool,
    pub predictions: Vec<f64>,
    pub model: SvrModel,
}

/// Trains on `train` and scores one-step-ahead forecasts on `eval_set`.
pub fn score_candidate(
    candidate: SvrHyperParams,
    train: &EmbeddedDataset,
    eval_set: &EmbeddedDataset,
    solver: &SolverOptions,
) -> Result<CandidateScore> {
    if train.is_empty() || eval_set.is_empty() {
        return Err(Error::Empty);
    }
    let model = svr::train(&train.inputs, &train.targets, candidate, solver)?;
    let predictions = model.predict(&eval_set.inputs)?;
    let pair = ForecastPair::new(&eval_set.targets, &predictions)?;
    Ok(CandidateScore {
        mse: pair.mse(),
        mape: pair.mape().ok(),
        converged: model.converged,
        predictions,
        model,
    })
}

/// MSE of the candidate on `eval_set` after training on `train`.
pub fn fitness(
    candidate: SvrHyperParams,
    train: &EmbeddedDataset,
    eval_set: &EmbeddedDataset,
    solver: &SolverOptions,
) -> Result<f64> {
    score_candidate(candidate, train, eval_set, solver).map(|s| s.mse)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationOutcome {
    pub algorithm: Algorithm,
    pub params: SvrHyperParams,
    #[serde(skip)]
    pub model: SvrModel,
    /// Normalised test targets.
    pub actual: Vec<f64>,
    /// Normalised one-step-ahead forecasts of the test targets.
    pub predictions: Vec<f64>,
    /// Forecasts in the units of the input series.
    pub predictions_denormalized: Vec<f64>,
    /// Series positions of the forecast targets.
    pub target_index: Vec<usize>,
    pub mse: f64,
    pub mape: Option<f64>,
    /// Best objective value the optimiser reported.
    pub best_fitness: f64,
    pub optimizer_history: Vec<f64>,
    pub evaluations: usize,
    /// Whether the final SVR fit reached the solver tolerance.
    pub converged: bool,
    /// Wall-clock seconds from calibration start to final forecast.
    #[serde(skip)]
    pub elapsed: f64,
}

/// Steps 3-7 for one algorithm on already prepared data.
pub fn calibrate(
    prepared: &PreparedData,
    config: &ExperimentConfig,
    algorithm: Algorithm,
) -> Result<CalibrationOutcome> {
    let start = Instant::now();
    let common = CommonConfig {
        population: config.optimizer.population,
        max_iterations: config.optimizer.max_iterations,
        seed: derive_seed(config.seed, algorithm),
    };
    let optimizer = optimizers::build(algorithm, common, &config.optimizer.params())?;
    let space = config.optimizer_space()?;
    let (fit_train, fit_eval) = prepared
        .fitness_sets(config.fitness_target)
        .map_err(|e| e.at("fitness split"))?;

    let objective = |x: &[f64]| -> f64 {
        config
            .candidate(x)
            .and_then(|c| fitness(c, &fit_train, &fit_eval, &config.solver))
            .unwrap_or(f64::NAN)
    };
    let search = optimizer
        .minimize(&objective, &space)
        .map_err(|e| e.at("calibration"))?;

    let params = config.candidate(&search.best_position)?;
    let score = score_candidate(params, &prepared.train, &prepared.test, &config.solver)
        .map_err(|e| e.at("final fit"))?;
    let predictions_denormalized = score
        .predictions
        .iter()
        .map(|&p| prepared.scaler.invert(p))
        .collect();
    Ok(CalibrationOutcome {
        algorithm,
        params,
        actual: prepared.test.targets.clone(),
        predictions: score.predictions,
        predictions_denormalized,
        target_index: prepared.test.target_index.clone(),
        mse: score.mse,
        mape: score.mape,
        best_fitness: search.best_fitness,
        optimizer_history: search.history,
        evaluations: search.evaluations,
        converged: score.converged,
        model: score.model,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Full run for the configured algorithm.
pub fn run_experiment(series: &TimeSeries, config: &ExperimentConfig) -> Result<CalibrationOutcome> {
    let prepared = prepare(series, config)?;
    calibrate(&prepared, config, config.optimizer.algorithm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DmEntry {
    Diagonal,
    Statistic(DmResult),
    DegenerateVariance,
    /// One side of the pair failed to produce forecasts.
    Unavailable,
}

/// Pairwise DM statistics; entry `(i, j)` compares algorithm `i` (first
/// argument) against algorithm `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmMatrix {
    pub algorithms: Vec<Algorithm>,
    pub entries: Vec<Vec<DmEntry>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub outcome: Result<CalibrationOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub prepared: PreparedData,
    pub runs: Vec<AlgorithmRun>,
    pub dm: DmMatrix,
}

pub fn dm_matrix(runs: &[AlgorithmRun]) -> DmMatrix {
    let errors: Vec<Option<Vec<f64>>> = runs
        .iter()
        .map(|run| {
            run.outcome.as_ref().ok().map(|o| {
                o.actual
                    .iter()
                    .zip(&o.predictions)
                    .map(|(y, f)| y - f)
                    .collect()
            })
        })
        .collect();
    let entries = (0..runs.len())
        .map(|i| {
            (0..runs.len())
                .map(|j| {
                    if i == j {
                        return DmEntry::Diagonal;
                    }
                    match (&errors[i], &errors[j]) {
                        (Some(a), Some(b)) => match dm_test(a, b) {
                            Ok(r) => DmEntry::Statistic(r),
                            Err(Error::DegenerateVariance) => DmEntry::DegenerateVariance,
                            Err(_) => DmEntry::Unavailable,
                        },
                        _ => DmEntry::Unavailable,
                    }
                })
                .collect()
        })
        .collect();
    DmMatrix {
        algorithms: runs.iter().map(|r| r.algorithm).collect(),
        entries,
    }
}

/// Calibrates every algorithm on the same prepared data. Failures are kept
/// per algorithm and do not stop the others.
pub fn run_algorithms(
    prepared: PreparedData,
    config: &ExperimentConfig,
    algorithms: &[Algorithm],
) -> Comparison {
    let runs: Vec<AlgorithmRun> = algorithms
        .iter()
        .map(|&algorithm| AlgorithmRun {
            algorithm,
            outcome: calibrate(&prepared, config, algorithm),
        })
        .collect();
    let dm = dm_matrix(&runs);
    Comparison { prepared, runs, dm }
}

pub fn compare_optimizers(
    series: &TimeSeries,
    config: &ExperimentConfig,
    algorithms: &[Algorithm],
) -> Result<Comparison> {
    if algorithms.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "comparison needs at least 2 algorithms, got {}",
            algorithms.len()
        )));
    }
    let prepared = prepare(series, config)?;
    Ok(run_algorithms(prepared, config, algorithms))
}
