//! Price-history ingestion.
//!
//! Input is a headed CSV with at least a `date` column (ISO `YYYY-MM-DD`)
//! and a `close` column; header matching ignores case and surrounding
//! whitespace, and other columns are ignored. Dates must strictly increase
//! and closes must be finite and positive. Nothing is imputed.

use std::fs;
use std::io::Read;
use std::path::Path;

use boasvr::TimeSeries;
use chrono::NaiveDate;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub series: TimeSeries,
}

/// Reads and validates a price file; the series is named after the file stem.
pub fn load_csv(path: &Path) -> Result<PriceSeries, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    parse_csv(&bytes[..], &series_name(path))
}

pub(crate) fn series_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| CliError::Parse {
            row: 0,
            column: name.to_string(),
            message: "required column is missing from the header".to_string(),
        })
}

pub fn parse_csv<R: Read>(reader: R, name: &str) -> Result<PriceSeries, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Parse {
            row: 0,
            column: "header".to_string(),
            message: e.to_string(),
        })?
        .clone();
    let date_col = column(&headers, "date")?;
    let close_col = column(&headers, "close")?;

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut closes = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let parse_error = |column: &str, message: String| CliError::Parse {
            row,
            column: column.to_string(),
            message,
        };
        let record = record.map_err(|e| parse_error("*", e.to_string()))?;

        let date_text = record.get(date_col).unwrap_or_default();
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
            .map_err(|e| parse_error("date", format!("{date_text:?} is not a YYYY-MM-DD date ({e})")))?;

        let close_text = record.get(close_col).unwrap_or_default();
        let close: f64 = close_text
            .parse()
            .map_err(|_| parse_error("close", format!("{close_text:?} is not a number")))?;
        if !close.is_finite() {
            return Err(parse_error("close", format!("{close_text:?} is not a finite number")));
        }
        if close <= 0.0 {
            return Err(CliError::NonPositivePrice { row, value: close });
        }

        if let Some(previous) = dates.last() {
            if date <= *previous {
                return Err(CliError::NonMonotonicDates {
                    row,
                    previous: previous.to_string(),
                    current: date.to_string(),
                });
            }
        }
        dates.push(date);
        closes.push(close);
    }
    if closes.is_empty() {
        return Err(CliError::Parse {
            row: 0,
            column: "close".to_string(),
            message: "file has no data rows".to_string(),
        });
    }
    let series = TimeSeries::new(name, closes).map_err(CliError::Pipeline)?;
    Ok(PriceSeries { dates, series })
}
