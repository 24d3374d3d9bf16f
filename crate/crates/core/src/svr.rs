//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved over the stacked multiplier vector
//! `alpha = [beta; beta*]` of length `2n`:
//!
//! ```text
//! min  1/2 alpha' Q alpha + p' alpha
//! s.t. sum_t s_t alpha_t = 0,   0 <= alpha_t <= C
//! ```
//!
//! with signs `s = [+1; -1]`, `Q_ts = s_t s_s K(x_t, x_s)` and
//! `p = [eps - y; eps + y]`. Pairs are chosen from the maximal violating
//! pair family: the first index maximises the KKT violation, the second
//! maximises the second-order gain among violators.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyperParams {
    /// Penalty factor.
    pub c: f64,
    /// RBF width.
    pub gamma: f64,
    /// Tube radius.
    pub epsilon: f64,
}

impl SvrHyperParams {
    pub fn new(c: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        let params = Self { c, gamma, epsilon };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let k = (-gamma * squared_distance(a, b)).exp();
    if k.is_finite() {
        k
    } else {
        0.0
    }
}

/// `exp(-gamma * |a - b|^2)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(rbf(a, b, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Stop once the maximal KKT violation drops to this value.
    pub tol: f64,
    /// Upper bound on pair updates.
    pub max_iterations: u64,
    /// Record the dual objective after every pair update.
    #[serde(skip)]
    pub record_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iterations: 10_000_000,
            record_objective: false,
        }
    }
}

/// Full Gram matrices are cached up to this many training rows.
const GRAM_CACHE_LIMIT: usize = 2000;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Retained training inputs.
    pub support: Vec<Vec<f64>>,
    /// `beta_i - beta*_i` per training row.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub params: SvrHyperParams,
    pub converged: bool,
    pub iterations: u64,
    /// Dual objective (maximisation form) at the returned solution.
    pub objective: f64,
    /// Final maximal KKT violation.
    pub violation: f64,
    /// Objective after each update, when requested.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl SvrModel {
    pub fn input_dim(&self) -> usize {
        self.support.first().map_or(0, Vec::len)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<f64> {
        let dim = self.input_dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let sum: f64 = self
            .support
            .iter()
            .zip(&self.dual_coef)
            .filter(|(_, &coef)| coef != 0.0)
            .map(|(sv, &coef)| coef * rbf(sv, x, self.params.gamma))
            .sum();
        Ok(sum + self.bias)
    }

    pub fn predict(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        inputs.iter().map(|x| self.predict_one(x)).collect()
    }
}

enum Kernel<'a> {
    Cached { n: usize, gram: Vec<f64> },
    OnDemand { inputs: &'a [Vec<f64>], gamma: f64 },
}

impl<'a> Kernel<'a> {
    fn new(inputs: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = inputs.len();
        if n > GRAM_CACHE_LIMIT {
            return Kernel::OnDemand { inputs, gamma };
        }
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            gram[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf(&inputs[i], &inputs[j], gamma);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        Kernel::Cached { n, gram }
    }

    /// Row `i` of the Gram matrix, borrowed from the cache or computed into `buf`.
    fn row<'b>(&'b self, i: usize, buf: &'b mut Vec<f64>) -> &'b [f64] {
        match self {
            Kernel::Cached { n, gram } => &gram[i * n..(i + 1) * n],
            Kernel::OnDemand { inputs, gamma } => {
                buf.clear();
                buf.extend(inputs.iter().map(|x| rbf(&inputs[i], x, *gamma)));
                buf
            }
        }
    }
}

/// Dual state. Index `t < n` is `beta_t` (sign +1), `t >= n` is
/// `beta*_{t-n}` (sign -1).
struct Solver {
    n: usize,
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    linear: Vec<f64>,
}

impl Solver {
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn point(&self, t: usize) -> usize {
        if t < self.n {
            t
        } else {
            t - self.n
        }
    }

    /// Dual objective in maximisation form, `-(1/2 a'Qa + p'a)`.
    fn objective(&self) -> f64 {
        let half: f64 = self
            .alpha
            .iter()
            .zip(self.grad.iter().zip(&self.linear))
            .map(|(a, (g, p))| a * (g + p))
            .sum();
        -0.5 * half
    }

    /// Returns the working pair, or `None` with the current violation when
    /// the KKT conditions hold within `tol`.
    fn select_pair(
        &self,
        tol: f64,
        kernel: &Kernel,
        buf: &mut Vec<f64>,
    ) -> (Option<(usize, usize)>, f64) {
        let (n, c) = (self.n, self.c);
        let (alpha, grad) = (&self.alpha, &self.grad);

        // first index: largest -s_t G_t over the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if alpha[t] < c && -grad[t] >= gmax {
                gmax = -grad[t];
                i_sel = Some(t);
            }
        }
        for t in n..2 * n {
            if alpha[t] > 0.0 && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }

        // second index: best second-order gain over the "low" set, where
        // Q_ii + Q_tt - 2 s_i s_t Q_it = 2 - 2 K_it
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            let ki = kernel.row(self.point(i), buf);
            let mut consider = |t: usize, v: f64, k: f64| {
                if v >= gmax2 {
                    gmax2 = v;
                }
                let diff = gmax + v;
                if diff > 0.0 {
                    let quad = 2.0 - 2.0 * k;
                    let quad = if quad > 0.0 { quad } else { TAU };
                    let gain = -(diff * diff) / quad;
                    if gain <= best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            };
            for t in 0..n {
                if alpha[t] > 0.0 {
                    consider(t, grad[t], ki[t]);
                }
            }
            for t in n..2 * n {
                if alpha[t] < c {
                    consider(t, -grad[t], ki[t - n]);
                }
            }
        }
        let violation = gmax + gmax2;
        if violation < tol {
            return (None, violation);
        }
        match (i_sel, j_sel) {
            (Some(i), Some(j)) => (Some((i, j)), violation),
            _ => (None, violation),
        }
    }

    fn update_pair(&mut self, i: usize, j: usize, ki: &[f64], kj: &[f64]) {
        let c = self.c;
        let (si, sj) = (self.sign(i), self.sign(j));
        let pj = self.point(j);
        let kij = ki[pj];
        let old_i = self.alpha[i];
        let old_j = self.alpha[j];

        if si != sj {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = old_i - old_j;
            let mut ai = old_i + delta;
            let mut aj = old_j + delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
            self.alpha[i] = ai;
            self.alpha[j] = aj;
        } else {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = old_i + old_j;
            let mut ai = old_i - delta;
            let mut aj = old_j + delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
            self.alpha[i] = ai;
            self.alpha[j] = aj;
        }

        let di = self.alpha[i] - old_i;
        let dj = self.alpha[j] - old_j;
        // Q_ti = s_t s_i K(t, i); the beta* half takes the negated step
        let n = self.n;
        let (head, tail) = self.grad.split_at_mut(n);
        for p in 0..n {
            let step = si * ki[p] * di + sj * kj[p] * dj;
            head[p] += step;
            tail[p] -= step;
        }
    }

    /// Offset from the free variables, or the midpoint of the feasible
    /// interval when every variable sits at a bound.
    fn bias(&self) -> f64 {
        let mut upper = f64::INFINITY;
        let mut lower = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut free_count = 0usize;
        for t in 0..2 * self.n {
            let s = self.sign(t);
            let yg = s * self.grad[t];
            let a = self.alpha[t];
            if a >= self.c {
                if s < 0.0 {
                    upper = upper.min(yg);
                } else {
                    lower = lower.max(yg);
                }
            } else if a <= 0.0 {
                if s > 0.0 {
                    upper = upper.min(yg);
                } else {
                    lower = lower.max(yg);
                }
            } else {
                free_count += 1;
                free_sum += yg;
            }
        }
        let rho = if free_count > 0 {
            free_sum / free_count as f64
        } else {
            (upper + lower) / 2.0
        };
        -rho
    }
}

pub fn train(
    inputs: &[Vec<f64>],
    targets: &[f64],
    params: SvrHyperParams,
    options: &SolverOptions,
) -> Result<SvrModel> {
    params.validate()?;
    if inputs.is_empty() {
        return Err(Error::Empty);
    }
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: targets.len(),
        });
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "solver tolerance must be positive, got {}",
            options.tol
        )));
    }
    let dim = inputs[0].len();
    for row in inputs {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        check_finite(row)?;
    }
    check_finite(targets)?;

    let n = inputs.len();
    let eps = params.epsilon;
    let linear: Vec<f64> = targets
        .iter()
        .map(|y| eps - y)
        .chain(targets.iter().map(|y| eps + y))
        .collect();
    let kernel = Kernel::new(inputs, params.gamma);
    let mut solver = Solver {
        n,
        c: params.c,
        alpha: vec![0.0; 2 * n],
        grad: linear.clone(),
        linear,
    };

    let mut trace = Vec::new();
    if options.record_objective {
        trace.push(solver.objective());
    }
    let mut select_buf = Vec::new();
    let mut ki_buf = Vec::new();
    let mut kj_buf = Vec::new();
    let mut iterations = 0u64;
    let mut converged = false;
    let mut violation;
    loop {
        let (pair, v) = solver.select_pair(options.tol, &kernel, &mut select_buf);
        violation = v;
        let Some((i, j)) = pair else {
            converged = violation < options.tol;
            break;
        };
        if iterations >= options.max_iterations {
            break;
        }
        let ki = kernel.row(solver.point(i), &mut ki_buf);
        let kj = kernel.row(solver.point(j), &mut kj_buf);
        solver.update_pair(i, j, ki, kj);
        iterations += 1;
        if options.record_objective {
            trace.push(solver.objective());
        }
    }

    let dual_coef = (0..n).map(|i| solver.alpha[i] - solver.alpha[i + n]).collect();
    Ok(SvrModel {
        support: inputs.to_vec(),
        dual_coef,
        bias: solver.bias(),
        params,
        converged,
        iterations,
        objective: solver.objective(),
        violation,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: f64, gamma: f64, epsilon: f64) -> SvrHyperParams {
        SvrHyperParams::new(c, gamma, epsilon).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(rbf_kernel(&[0.3, -1.0], &[0.3, -1.0], 7.0).unwrap(), 1.0);
        let k = rbf_kernel(&[1.0, 0.0], &[0.0, 1.0], 0.5).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
        let k = rbf_kernel(&[0.0], &[3.0], 1.0).unwrap();
        assert!((k - 1.2340980408667956e-4).abs() < 1e-18);
        assert_eq!(
            rbf_kernel(&[0.0], &[0.0, 1.0], 1.0).unwrap_err(),
            Error::DimensionMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn kernel_underflow_flushes_to_zero() {
        assert_eq!(rbf_kernel(&[0.0], &[1e200], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperparams_validation() {
        assert!(SvrHyperParams::new(0.0, 1.0, 0.1).is_err());
        assert!(SvrHyperParams::new(1.0, -1.0, 0.1).is_err());
        assert!(SvrHyperParams::new(1.0, 1.0, -0.1).is_err());
        assert!(SvrHyperParams::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn constant_targets_fit_with_bias_only() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.1, (i as f64).sin()]).collect();
        let y = vec![0.5; 8];
        let model = train(&x, &y, params(3.0, 2.0, 0.1), &SolverOptions::default()).unwrap();
        assert!(model.dual_coef.iter().all(|&c| c == 0.0));
        assert_eq!(model.bias, 0.5);
        assert!(model.converged);
        let pred = model.predict(&x).unwrap();
        assert!(pred.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn bias_only_model_predicts_bias() {
        let model = SvrModel {
            support: vec![vec![0.0, 1.0], vec![2.0, 3.0]],
            dual_coef: vec![0.0, 0.0],
            bias: 0.5,
            params: params(1.0, 1.0, 0.1),
            converged: true,
            iterations: 0,
            objective: 0.0,
            violation: 0.0,
            objective_trace: Vec::new(),
        };
        assert_eq!(model.predict(&[vec![9.0, -4.0]]).unwrap(), vec![0.5]);
        assert!(matches!(
            model.predict(&[vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(1.0, 1.0, 0.1);
        let opts = SolverOptions::default();
        assert_eq!(train(&[], &[], p, &opts).unwrap_err(), Error::Empty);
        assert!(matches!(
            train(&[vec![0.0]], &[1.0, 2.0], p, &opts),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            train(&[vec![f64::NAN]], &[1.0], p, &opts),
            Err(Error::NonFinite { .. })
        ));
        let bad_tol = SolverOptions { tol: 0.0, ..opts };
        assert!(train(&[vec![0.0]], &[1.0], p, &bad_tol).is_err());
    }

    #[test]
    fn iteration_limit_returns_unconverged_model() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 30.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| (6.0 * r[0]).sin()).collect();
        let opts = SolverOptions {
            max_iterations: 3,
            ..SolverOptions::default()
        };
        let model = train(&x, &y, params(10.0, 5.0, 0.01), &opts).unwrap();
        assert!(!model.converged);
        assert_eq!(model.iterations, 3);
    }

    #[test]
    fn objective_trace_is_non_decreasing() {
        let x: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64 / 25.0, (i % 5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| (4.0 * r[0]).cos() + 0.1 * r[1]).collect();
        let opts = SolverOptions {
            tol: 1e-6,
            record_objective: true,
            ..SolverOptions::default()
        };
        let model = train(&x, &y, params(5.0, 1.0, 0.05), &opts).unwrap();
        assert!(model.converged);
        assert_eq!(model.objective_trace.len() as u64, model.iterations + 1);
        for w in model.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} then {}", w[0], w[1]);
        }
    }
}
