//! Library half of the `boasvr` binary: configuration loading, CSV ingestion,
//! orchestration and report writing. `main.rs` only parses arguments.

pub mod error;
pub mod input;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use boasvr::optimizers::Algorithm;
use boasvr::pipeline::{self, EmbeddingChoice, ExperimentConfig};
use boasvr::Error;
use chrono::Utc;

pub use error::CliError;
use input::PriceSeries;
use output::RunRecord;

/// Reads a TOML configuration. Missing keys take their defaults; unknown keys
/// are rejected.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let config: ExperimentConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(config)
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub input: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<String>>,
}

/// Parses algorithm names and rejects unknown or unimplemented ones before any
/// work starts.
pub fn resolve_algorithms(names: Option<&[String]>, config: &ExperimentConfig) -> Result<Vec<Algorithm>, CliError> {
    let algorithms = match names {
        None => vec![config.optimizer.algorithm],
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Algorithm>().map_err(CliError::Algorithm))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if algorithms.is_empty() {
        return Err(CliError::Config("no algorithms selected".to_string()));
    }
    if let Some(missing) = algorithms.iter().find(|a| !a.is_implemented()) {
        return Err(CliError::Algorithm(Error::UnsupportedAlgorithm(missing.model_label())));
    }
    Ok(algorithms)
}

/// Summary of a finished `run`.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out: PathBuf,
    pub algorithms: Vec<Algorithm>,
    pub failed: usize,
}

pub fn run(args: &RunArgs) -> Result<RunSummary, CliError> {
    let started = Utc::now();
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let algorithms = resolve_algorithms(args.algorithms.as_deref(), &config)?;

    let bytes = fs::read(&args.input).map_err(CliError::io(&args.input))?;
    let prices = input::parse_csv(&bytes[..], &input::series_name(&args.input))?;
    let prepared = pipeline::prepare(&prices.series, &config)?;
    let comparison = pipeline::run_algorithms(prepared, &config, &algorithms);

    let record = RunRecord {
        config: &config,
        algorithms: &algorithms,
        prices: &prices,
        input_file: args
            .input
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        input_sha256: output::sha256_hex(&bytes),
        comparison: &comparison,
        started,
        finished: Utc::now(),
    };
    output::write_all(&args.out, &record)?;

    let failed = comparison.runs.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        return Err(CliError::PartialFailure {
            failed,
            total: algorithms.len(),
        });
    }
    Ok(RunSummary {
        out: args.out.clone(),
        algorithms,
        failed,
    })
}

/// Embedding chosen for a price file, with the diagnostics behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedInfo {
    pub observations: usize,
    pub dim: usize,
    pub delay: usize,
    /// `None` when the embedding was fixed by configuration.
    pub delay_at_local_minimum: Option<bool>,
    pub dimension_converged: Option<bool>,
}

pub fn embed_info(input: &Path, config: Option<&Path>) -> Result<EmbedInfo, CliError> {
    let config = match config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    let PriceSeries { series, .. } = input::load_csv(input)?;
    let info = match config.embedding {
        EmbeddingChoice::Fixed { dim, delay } => EmbedInfo {
            observations: series.len(),
            dim,
            delay,
            delay_at_local_minimum: None,
            dimension_converged: None,
        },
        EmbeddingChoice::Auto {
            max_delay,
            max_dim,
            bins,
            fnn,
        } => {
            let (spec, delay, dimension) =
                pipeline::estimate_embedding(series.values(), max_delay, max_dim, bins, &fnn)?;
            EmbedInfo {
                observations: series.len(),
                dim: spec.dim,
                delay: spec.delay,
                delay_at_local_minimum: Some(delay.local_minimum),
                dimension_converged: Some(dimension.converged),
            }
        }
    };
    Ok(info)
}
