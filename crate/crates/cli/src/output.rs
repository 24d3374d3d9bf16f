//! Report emission.
//!
//! `report.csv`, `dm_matrix.csv`, `predictions.csv` and `results.json` are
//! pure functions of (config, input, seed). Wall-clock data lives only in
//! `timing.csv` and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use boasvr::metrics::ForecastPair;
use boasvr::optimizers::Algorithm;
use boasvr::phase_space::NormalizationParams;
use boasvr::pipeline::{CalibrationOutcome, Comparison, DmEntry, DmMatrix};
use boasvr::{ExperimentConfig, SvrHyperParams};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::input::PriceSeries;

pub const REPORT: &str = "report.csv";
pub const DM_MATRIX: &str = "dm_matrix.csv";
pub const PREDICTIONS: &str = "predictions.csv";
pub const RESULTS: &str = "results.json";
pub const TIMING: &str = "timing.csv";
pub const MANIFEST: &str = "manifest.json";

/// Everything a finished run leaves behind.
pub struct RunRecord<'a> {
    pub config: &'a ExperimentConfig,
    pub algorithms: &'a [Algorithm],
    pub prices: &'a PriceSeries,
    pub input_file: String,
    pub input_sha256: String,
    pub comparison: &'a Comparison,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
}

impl RunRecord<'_> {
    fn successes(&self) -> impl Iterator<Item = &CalibrationOutcome> {
        self.comparison.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }
}

/// Shortest representation that parses back to the same value.
fn num(v: f64) -> String {
    format!("{v}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).map_err(|e| CliError::Output {
            path: PathBuf::from("<csv>"),
            message: e.to_string(),
        })?;
    }
    writer.into_inner().map_err(|e| CliError::Output {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output {
        path: PathBuf::from("<json>"),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text.into_bytes())
}

pub fn report_csv(record: &RunRecord) -> Result<Vec<u8>, CliError> {
    let mut rows = vec![["Models", "C", "gamma", "epsilon", "MSE", "MAPE"].map(String::from).to_vec()];
    for o in record.successes() {
        rows.push(vec![
            o.algorithm.model_label(),
            num(o.params.c),
            num(o.params.gamma),
            num(o.params.epsilon),
            num(o.mse),
            o.mape.map_or_else(|| "NA".to_string(), num),
        ]);
    }
    csv_bytes(rows)
}

pub fn timing_csv(record: &RunRecord) -> Result<Vec<u8>, CliError> {
    let mut rows = vec![vec!["Models".to_string(), "Cost time".to_string()]];
    for o in record.successes() {
        rows.push(vec![o.algorithm.model_label(), format!("{:.6}", o.elapsed)]);
    }
    csv_bytes(rows)
}

fn dm_cell(entry: &DmEntry) -> String {
    match entry {
        DmEntry::Diagonal => String::new(),
        DmEntry::Statistic(r) => num(r.statistic),
        DmEntry::DegenerateVariance => "degenerate".to_string(),
        DmEntry::Unavailable => "NA".to_string(),
    }
}

/// Row `i`, column `j` holds DM(i, j); negative favours the row model.
pub fn dm_csv(dm: &DmMatrix) -> Result<Vec<u8>, CliError> {
    let labels: Vec<String> = dm.algorithms.iter().map(|a| a.model_label()).collect();
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    let mut rows = vec![header];
    for (label, entries) in labels.iter().zip(&dm.entries) {
        let mut row = vec![label.clone()];
        row.extend(entries.iter().map(dm_cell));
        rows.push(row);
    }
    csv_bytes(rows)
}

pub fn predictions_csv(record: &RunRecord) -> Result<Vec<u8>, CliError> {
    let prepared = &record.comparison.prepared;
    let outcomes: Vec<&CalibrationOutcome> = record.successes().collect();
    let mut header = ["date", "index", "actual", "actual_normalized"].map(String::from).to_vec();
    for o in &outcomes {
        let label = o.algorithm.model_label();
        header.push(label.clone());
        header.push(format!("{label}_normalized"));
    }
    let mut rows = vec![header];
    for (row, &t) in prepared.test.target_index.iter().enumerate() {
        let mut line = vec![
            record.prices.dates[t].to_string(),
            t.to_string(),
            num(prepared.series.values()[t]),
            num(prepared.test.targets[row]),
        ];
        for o in &outcomes {
            line.push(num(o.predictions_denormalized[row]));
            line.push(num(o.predictions[row]));
        }
        rows.push(line);
    }
    csv_bytes(rows)
}

#[derive(Serialize)]
struct EmbeddingSummary<'a> {
    dim: usize,
    delay: usize,
    estimated: bool,
    mi_curve: Option<&'a [f64]>,
    delay_at_local_minimum: Option<bool>,
    fnn_fractions: Option<&'a [f64]>,
    dimension_converged: Option<bool>,
}

#[derive(Serialize)]
struct AlgorithmSummary<'a> {
    model: String,
    status: &'static str,
    error: Option<String>,
    params: Option<SvrHyperParams>,
    mse: Option<f64>,
    mape: Option<f64>,
    best_fitness: Option<f64>,
    evaluations: Option<usize>,
    solver_converged: Option<bool>,
    history: Option<&'a [f64]>,
}

#[derive(Serialize)]
struct DmSummary {
    row: String,
    column: String,
    statistic: Option<f64>,
    significant: Option<bool>,
    note: Option<&'static str>,
}

#[derive(Serialize)]
struct Results<'a> {
    series: &'a str,
    observations: usize,
    embedding: EmbeddingSummary<'a>,
    scaler: NormalizationParams,
    train_rows: usize,
    test_rows: usize,
    algorithms: Vec<AlgorithmSummary<'a>>,
    dm_tests: Vec<DmSummary>,
}

pub fn results_json(record: &RunRecord) -> Result<Vec<u8>, CliError> {
    let prepared = &record.comparison.prepared;
    let embedding = EmbeddingSummary {
        dim: prepared.embedding.dim,
        delay: prepared.embedding.delay,
        estimated: prepared.delay_estimate.is_some(),
        mi_curve: prepared.delay_estimate.as_ref().map(|d| d.curve.as_slice()),
        delay_at_local_minimum: prepared.delay_estimate.as_ref().map(|d| d.local_minimum),
        fnn_fractions: prepared.dimension_estimate.as_ref().map(|d| d.fractions.as_slice()),
        dimension_converged: prepared.dimension_estimate.as_ref().map(|d| d.converged),
    };
    let algorithms = record
        .comparison
        .runs
        .iter()
        .map(|run| match &run.outcome {
            Ok(o) => AlgorithmSummary {
                model: run.algorithm.model_label(),
                status: "ok",
                error: None,
                params: Some(o.params),
                mse: Some(o.mse),
                mape: o.mape,
                best_fitness: Some(o.best_fitness),
                evaluations: Some(o.evaluations),
                solver_converged: Some(o.converged),
                history: Some(&o.optimizer_history),
            },
            Err(e) => AlgorithmSummary {
                model: run.algorithm.model_label(),
                status: "failed",
                error: Some(e.to_string()),
                params: None,
                mse: None,
                mape: None,
                best_fitness: None,
                evaluations: None,
                solver_converged: None,
                history: None,
            },
        })
        .collect();
    let dm = &record.comparison.dm;
    let mut dm_tests = Vec::new();
    for (i, row) in dm.entries.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let (statistic, significant, note) = match entry {
                DmEntry::Statistic(r) => (Some(r.statistic), Some(r.significant), None),
                DmEntry::DegenerateVariance => (None, None, Some("degenerate variance")),
                _ => (None, None, Some("unavailable")),
            };
            dm_tests.push(DmSummary {
                row: dm.algorithms[i].model_label(),
                column: dm.algorithms[j].model_label(),
                statistic,
                significant,
                note,
            });
        }
    }
    json_bytes(&Results {
        series: prepared.series.name(),
        observations: prepared.series.len(),
        embedding,
        scaler: prepared.scaler,
        train_rows: prepared.train.len(),
        test_rows: prepared.test.len(),
        algorithms,
        dm_tests,
    })
}

#[derive(Serialize)]
struct InputSummary<'a> {
    file: &'a str,
    sha256: &'a str,
    rows: usize,
}

#[derive(Serialize)]
struct Calibrated {
    model: String,
    c: f64,
    gamma: f64,
    epsilon: f64,
}

#[derive(Serialize)]
struct Timing {
    model: String,
    seconds: f64,
}

#[derive(Serialize)]
struct FileDigest {
    file: &'static str,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    algorithms: Vec<String>,
    config: &'a ExperimentConfig,
    input: InputSummary<'a>,
    calibrated: Vec<Calibrated>,
    outputs: Vec<FileDigest>,
    started: String,
    finished: String,
    timings: Vec<Timing>,
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(CliError::io(path))
}

/// Writes every output file into `dir`, creating it if needed.
pub fn write_all(dir: &Path, record: &RunRecord) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let deterministic = [
        (REPORT, report_csv(record)?),
        (DM_MATRIX, dm_csv(&record.comparison.dm)?),
        (PREDICTIONS, predictions_csv(record)?),
        (RESULTS, results_json(record)?),
    ];
    let mut outputs = Vec::new();
    for (name, bytes) in &deterministic {
        write(dir, name, bytes)?;
        outputs.push(FileDigest {
            file: name,
            sha256: sha256_hex(bytes),
        });
    }
    write(dir, TIMING, &timing_csv(record)?)?;

    let manifest = Manifest {
        tool: "boasvr",
        version: env!("CARGO_PKG_VERSION"),
        seed: record.config.seed,
        algorithms: record.algorithms.iter().map(|a| a.model_label()).collect(),
        config: record.config,
        input: InputSummary {
            file: &record.input_file,
            sha256: &record.input_sha256,
            rows: record.prices.series.len(),
        },
        calibrated: record
            .successes()
            .map(|o| Calibrated {
                model: o.algorithm.model_label(),
                c: o.params.c,
                gamma: o.params.gamma,
                epsilon: o.params.epsilon,
            })
            .collect(),
        outputs,
        started: record.started.to_rfc3339_opts(SecondsFormat::Millis, true),
        finished: record.finished.to_rfc3339_opts(SecondsFormat::Millis, true),
        timings: record
            .successes()
            .map(|o| Timing {
                model: o.algorithm.model_label(),
                seconds: o.elapsed,
            })
            .collect(),
    };
    write(dir, MANIFEST, &json_bytes(&manifest)?)
}

/// Recomputes MSE and MAPE from a pair of normalised columns.
pub fn recompute_metrics(actual: &[f64], predicted: &[f64]) -> Option<(f64, Option<f64>)> {
    let pair = ForecastPair::new(actual, predicted).ok()?;
    Some((pair.mse(), pair.mape().ok()))
}
