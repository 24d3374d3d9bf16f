//! Delay-coordinate reconstruction of a scalar series.
//!
//! The delay is picked at the first minimum of the lagged mutual information
//! and the dimension by the false-nearest-neighbour test of Kennel et al.
//! Rows of the embedded design matrix are
//! `[x[i], x[i + tau], ..., x[i + (m - 1) tau]]` with target
//! `x[i + (m - 1) tau + 1]`, i.e. the observation right after the last
//! coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self {
            name: name.into(),
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Min-max scaler parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: f64,
    pub max: f64,
}

impl NormalizationParams {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normalization bounds must be finite, got [{min}, {max}]"
            )));
        }
        if max == min {
            return Err(Error::DegenerateRange { value: min });
        }
        if max < min {
            return Err(Error::InvalidParameter(format!(
                "normalization max {max} is below min {min}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Fits the scaler to the extremes of `values`.
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 1,
                got: values.len(),
            });
        }
        check_finite(values)?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(min, max)
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn apply(&self, value: f64) -> f64 {
        (value - self.min) / self.span()
    }

    pub fn invert(&self, value: f64) -> f64 {
        value * self.span() + self.min
    }
}

/// Scales the series onto `[0, 1]` and returns the parameters needed to undo it.
pub fn normalize(series: &TimeSeries) -> Result<(TimeSeries, NormalizationParams)> {
    let params = NormalizationParams::fit(series.values())?;
    let values = series.values().iter().map(|&v| params.apply(v)).collect();
    Ok((
        TimeSeries {
            name: series.name.clone(),
            values,
        },
        params,
    ))
}

pub fn denormalize(values: &[f64], params: &NormalizationParams) -> Vec<f64> {
    values.iter().map(|&v| params.invert(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    /// Embedding dimension `m`.
    pub dim: usize,
    /// Time delay `tau`, in samples.
    pub delay: usize,
}

impl EmbeddingSpec {
    pub fn new(dim: usize, delay: usize) -> Result<Self> {
        if dim == 0 || delay == 0 {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension and delay must be positive, got m={dim}, tau={delay}"
            )));
        }
        Ok(Self { dim, delay })
    }

    /// Span covered by one row, i.e. `(m - 1) * tau`.
    pub fn window(&self) -> usize {
        (self.dim - 1) * self.delay
    }

    /// Number of rows an `n`-point series yields: `n - 1 - (m - 1) tau`.
    pub fn rows(&self, n: usize) -> usize {
        n.saturating_sub(1 + self.window())
    }
}

/// Design matrix and one-step-ahead targets.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Position of each target in the source series (0-based).
    pub target_index: Vec<usize>,
    pub spec: EmbeddingSpec,
}

impl EmbeddedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            inputs: self.inputs[range.clone()].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            target_index: self.target_index[range].to_vec(),
            spec: self.spec,
        }
    }
}

pub fn embed(values: &[f64], spec: EmbeddingSpec) -> Result<EmbeddedDataset> {
    let rows = spec.rows(values.len());
    if rows == 0 {
        return Err(Error::SeriesTooShort {
            needed: 1 + spec.window(),
            got: values.len(),
        });
    }
    let inputs = (0..rows)
        .map(|i| (0..spec.dim).map(|j| values[i + j * spec.delay]).collect())
        .collect();
    let target_index: Vec<usize> = (0..rows).map(|i| i + spec.window() + 1).collect();
    let targets = target_index.iter().map(|&t| values[t]).collect();
    Ok(EmbeddedDataset {
        inputs,
        targets,
        target_index,
        spec,
    })
}

/// Chronological split; the first `floor(rows * train_fraction)` rows train.
pub fn split(
    dataset: &EmbeddedDataset,
    train_fraction: f64,
) -> Result<(EmbeddedDataset, EmbeddedDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let rows = dataset.len();
    let train = train_row_count(rows, train_fraction);
    if train == 0 || train == rows {
        return Err(Error::EmptyPartition {
            train,
            test: rows - train,
        });
    }
    Ok((dataset.slice(0..train), dataset.slice(train..rows)))
}

pub(crate) fn train_row_count(rows: usize, train_fraction: f64) -> usize {
    (rows as f64 * train_fraction).floor() as usize
}

/// Default histogram resolution for `pairs` lagged pairs.
pub fn default_bins(pairs: usize) -> usize {
    ((pairs as f64).sqrt().floor() as usize).max(2)
}

fn bin_of(value: f64, min: f64, width: f64, bins: usize) -> usize {
    if width <= 0.0 {
        return 0;
    }
    (((value - min) / width) as usize).min(bins - 1)
}

/// Mutual information (bits) between `x[j]` and `x[j + delay]` using an
/// equal-width histogram over the range of the whole series.
pub fn mutual_information(values: &[f64], delay: usize, bins: usize) -> Result<f64> {
    if values.len() <= delay {
        return Err(Error::SeriesTooShort {
            needed: delay,
            got: values.len(),
        });
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "mutual information needs at least 2 bins, got {bins}"
        )));
    }
    check_finite(values)?;

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let binned: Vec<usize> = values.iter().map(|&v| bin_of(v, min, width, bins)).collect();

    let pairs = values.len() - delay;
    let mut joint = vec![0usize; bins * bins];
    let mut lead = vec![0usize; bins];
    let mut lag = vec![0usize; bins];
    for j in 0..pairs {
        let (a, b) = (binned[j], binned[j + delay]);
        joint[a * bins + b] += 1;
        lead[a] += 1;
        lag[b] += 1;
    }

    let total = pairs as f64;
    let mut terms: Vec<f64> = Vec::new();
    for a in 0..bins {
        for b in 0..bins {
            let count = joint[a * bins + b];
            if count == 0 {
                continue;
            }
            let p_ab = count as f64 / total;
            let p_a = lead[a] as f64 / total;
            let p_b = lag[b] as f64 / total;
            terms.push(p_ab * (p_ab / (p_a * p_b)).log2());
        }
    }
    // Summing in sorted order makes the estimate independent of the
    // orientation of the joint table.
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>().max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayEstimate {
    pub delay: usize,
    /// MI(tau) for tau = 0..=max_delay.
    pub curve: Vec<f64>,
    /// False when no interior local minimum existed and the argmin was used.
    pub local_minimum: bool,
}

/// First local minimum of an MI curve indexed from tau = 0.
///
/// Returns the smallest tau in `1..len-1` with `curve[tau] < curve[tau-1]`
/// and `curve[tau] <= curve[tau+1]`. Falls back to the argmin over
/// `1..len` (earliest on ties) with the flag cleared.
pub fn first_local_minimum(curve: &[f64]) -> Option<(usize, bool)> {
    if curve.len() < 2 {
        return None;
    }
    let last = curve.len() - 1;
    for tau in 1..last {
        if curve[tau] < curve[tau - 1] && curve[tau] <= curve[tau + 1] {
            return Some((tau, true));
        }
    }
    let mut best = 1;
    for tau in 2..=last {
        if curve[tau] < curve[best] {
            best = tau;
        }
    }
    Some((best, false))
}

pub fn select_delay(values: &[f64], max_delay: usize, bins: Option<usize>) -> Result<DelayEstimate> {
    if max_delay < 2 {
        return Err(Error::InvalidParameter(format!(
            "max delay must be at least 2, got {max_delay}"
        )));
    }
    if values.len() <= max_delay {
        return Err(Error::SeriesTooShort {
            needed: max_delay,
            got: values.len(),
        });
    }
    let curve = (0..=max_delay)
        .map(|tau| {
            let bins = bins.unwrap_or_else(|| default_bins(values.len() - tau));
            mutual_information(values, tau, bins)
        })
        .collect::<Result<Vec<_>>>()?;
    let (delay, local_minimum) = first_local_minimum(&curve).expect("curve has max_delay + 1 points");
    Ok(DelayEstimate {
        delay,
        curve,
        local_minimum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FnnParams {
    /// Threshold on the relative growth of the neighbour distance.
    pub rtol: f64,
    /// Threshold on the new distance relative to the attractor size.
    pub atol: f64,
    /// Largest false-neighbour fraction accepted as "unfolded".
    pub threshold: f64,
}

impl Default for FnnParams {
    fn default() -> Self {
        Self {
            rtol: 15.0,
            atol: 2.0,
            threshold: 0.01,
        }
    }
}

/// Distances below this fraction of the series range are treated as
/// floating-point noise when forming the distance ratio.
const DISTANCE_FLOOR: f64 = 1e-12;

/// Fraction of points whose nearest neighbour in dimension `dim` is false
/// when the `(dim + 1)`-th coordinate is added.
pub fn false_nearest_fraction(
    values: &[f64],
    dim: usize,
    delay: usize,
    params: &FnnParams,
) -> Result<f64> {
    let spec = EmbeddingSpec::new(dim, delay)?;
    // Every point needs its (dim + 1)-th coordinate.
    let points = values.len().saturating_sub(dim * delay);
    if points < 2 {
        return Err(Error::SeriesTooShort {
            needed: dim * delay + 1,
            got: values.len(),
        });
    }
    check_finite(values)?;

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let attractor_size = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = (max - min) * DISTANCE_FLOOR;

    let coord = |i: usize, j: usize| values[i + j * spec.delay];
    let mut false_count = 0usize;
    for i in 0..points {
        let mut nearest = usize::MAX;
        let mut nearest_sq = f64::INFINITY;
        for k in 0..points {
            if k == i {
                continue;
            }
            let mut d2 = 0.0;
            for j in 0..dim {
                let diff = coord(i, j) - coord(k, j);
                d2 += diff * diff;
                if d2 >= nearest_sq {
                    break;
                }
            }
            if d2 < nearest_sq {
                nearest_sq = d2;
                nearest = k;
            }
        }
        let extra = (coord(i, dim) - coord(nearest, dim)).abs();
        let dist = nearest_sq.sqrt();
        let ratio_fails = extra > params.rtol * dist.max(floor);
        let size_fails = attractor_size > 0.0
            && (nearest_sq + extra * extra).sqrt() / attractor_size > params.atol;
        if ratio_fails || size_fails {
            false_count += 1;
        }
    }
    Ok(false_count as f64 / points as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub dim: usize,
    /// FNN fraction for m = 1, 2, ... up to the chosen dimension (or max_dim - 1).
    pub fractions: Vec<f64>,
    /// False when no dimension below `max_dim` met the threshold.
    pub converged: bool,
}

pub fn select_dimension(
    values: &[f64],
    delay: usize,
    max_dim: usize,
    params: &FnnParams,
) -> Result<DimensionEstimate> {
    if max_dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "max dimension must be at least 2, got {max_dim}"
        )));
    }
    let needed = 1 + (max_dim - 1) * delay;
    if values.len() <= needed {
        return Err(Error::SeriesTooShort {
            needed,
            got: values.len(),
        });
    }
    let mut fractions = Vec::new();
    for dim in 1..max_dim {
        let fraction = false_nearest_fraction(values, dim, delay, params)?;
        fractions.push(fraction);
        if fraction <= params.threshold {
            return Ok(DimensionEstimate {
                dim,
                fractions,
                converged: true,
            });
        }
    }
    Ok(DimensionEstimate {
        dim: max_dim,
        fractions,
        converged: false,
    })
}
