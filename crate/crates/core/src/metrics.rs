//! Forecast accuracy measures and the Diebold-Mariano test.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// Two-sided 5% critical value of the standard normal.
pub const DM_CRITICAL_VALUE: f64 = 1.96;

/// Actual and predicted values of equal, non-zero length.
#[derive(Debug, Clone, Copy)]
pub struct ForecastPair<'a> {
    actual: &'a [f64],
    predicted: &'a [f64],
}

impl<'a> ForecastPair<'a> {
    pub fn new(actual: &'a [f64], predicted: &'a [f64]) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(Error::LengthMismatch {
                left: actual.len(),
                right: predicted.len(),
            });
        }
        if actual.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(actual)?;
        check_finite(predicted)?;
        Ok(Self { actual, predicted })
    }

    pub fn actual(&self) -> &[f64] {
        self.actual
    }

    pub fn predicted(&self) -> &[f64] {
        self.predicted
    }

    /// Forecast errors `actual - predicted`.
    pub fn errors(&self) -> Vec<f64> {
        self.actual
            .iter()
            .zip(self.predicted)
            .map(|(y, f)| y - f)
            .collect()
    }

    pub fn mse(&self) -> f64 {
        let sum: f64 = self
            .actual
            .iter()
            .zip(self.predicted)
            .map(|(y, f)| (y - f) * (y - f))
            .sum();
        sum / self.actual.len() as f64
    }

    /// Mean absolute relative error, as a fraction.
    pub fn mape(&self) -> Result<f64> {
        if let Some(index) = self.actual.iter().position(|&y| y == 0.0) {
            return Err(Error::ZeroActual { index });
        }
        let sum: f64 = self
            .actual
            .iter()
            .zip(self.predicted)
            .map(|(y, f)| ((y - f) / y).abs())
            .sum();
        Ok(sum / self.actual.len() as f64)
    }
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    Ok(ForecastPair::new(actual, predicted)?.mse())
}

pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    ForecastPair::new(actual, predicted)?.mape()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub significant: bool,
    pub loss: Loss,
}

/// Diebold-Mariano statistic on squared-error losses of two one-step
/// forecasts.
///
/// With `d_t = a_t^2 - b_t^2` the statistic is `mean(d) / sqrt(var(d) / N)`
/// where `var` uses the `N - 1` divisor. A negative value means the first
/// forecast has the smaller squared errors.
pub fn dm_test(errors_a: &[f64], errors_b: &[f64]) -> Result<DmResult> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::LengthMismatch {
            left: errors_a.len(),
            right: errors_b.len(),
        });
    }
    if errors_a.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 1,
            got: errors_a.len(),
        });
    }
    check_finite(errors_a)?;
    check_finite(errors_b)?;

    let differential: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .map(|(a, b)| a * a - b * b)
        .collect();
    dm_from_differential(&differential)
}

/// DM statistic from a precomputed loss differential.
pub fn dm_from_differential(differential: &[f64]) -> Result<DmResult> {
    let n = differential.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 1, got: n });
    }
    let mean = differential.iter().sum::<f64>() / n as f64;
    let variance = differential
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / (n - 1) as f64;
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let statistic = mean / (variance / n as f64).sqrt();
    Ok(DmResult {
        statistic,
        significant: statistic.abs() > DM_CRITICAL_VALUE,
        loss: Loss::SquaredError,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[0.0, 2.0]).unwrap(), 0.5);
        assert_eq!(mse(&[], &[]).unwrap_err(), Error::Empty);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[4.0, 5.0], &[4.0, 5.0]).unwrap(), 0.0);
        assert_eq!(mape(&[2.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(
            mape(&[1.0, 0.0], &[1.0, 1.0]).unwrap_err(),
            Error::ZeroActual { index: 1 }
        );
    }

    #[test]
    fn dm_identical_errors_is_degenerate() {
        let e = [0.1, -0.2, 0.3];
        assert_eq!(dm_test(&e, &e).unwrap_err(), Error::DegenerateVariance);
    }

    #[test]
    fn dm_zero_mean_differential() {
        let r = dm_from_differential(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(!r.significant);
    }

    #[test]
    fn dm_hand_computation() {
        // mean 2.5, unbiased variance 5/3, statistic 2.5 / sqrt(5/12)
        let r = dm_from_differential(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let expected = 2.5 / (5.0f64 / 12.0).sqrt();
        assert!((r.statistic - expected).abs() < 1e-12);
        assert!((r.statistic - 3.872983346207417).abs() < 1e-9);
        assert!(r.significant);
    }

    #[test]
    fn dm_from_errors_squares_them() {
        // a^2 - b^2 = [1, 2, 3, 4]
        let a = [1.0, 2.0f64.sqrt(), 3.0f64.sqrt(), 2.0];
        let b = [0.0; 4];
        let r = dm_test(&a, &b).unwrap();
        assert!((r.statistic - 3.872983346207417).abs() < 1e-9);
        assert!(dm_test(&[1.0], &[2.0]).is_err());
    }
}
