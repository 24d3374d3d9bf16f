//! Independent reference computations used only by tests.
#![allow(dead_code)]

/// Dense RBF Gram matrix.
pub fn gram(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}

pub struct QpSolution {
    /// `beta - beta*` per point.
    pub coef: Vec<f64>,
    pub bias: f64,
    /// Dual objective in maximisation form.
    pub objective: f64,
    pub iterations: usize,
}

/// Maximisation-form dual value for `alpha = [beta; beta*]`.
pub fn dual_value(k: &[Vec<f64>], y: &[f64], eps: f64, alpha: &[f64]) -> f64 {
    let n = y.len();
    let u: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += u[i] * k[i][j] * u[j];
        }
    }
    let tube: f64 = alpha.iter().sum::<f64>() * eps;
    let fit: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
    -0.5 * quad - tube + fit
}

/// Euclidean projection onto `{0 <= alpha <= c, sum(beta) = sum(beta*)}`.
///
/// The projection is `clip(v - lambda * s)` with `s = [1; -1]`; the scalar
/// `lambda` is found by bisection on the monotone balance function.
fn project(v: &[f64], c: f64) -> Vec<f64> {
    let n = v.len() / 2;
    let clip = |z: f64| z.clamp(0.0, c);
    let balance = |lambda: f64| -> f64 {
        (0..n).map(|i| clip(v[i] - lambda) - clip(v[n + i] + lambda)).sum()
    };
    let span = v.iter().fold(0.0f64, |m, z| m.max(z.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * span {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    (0..2 * n)
        .map(|t| if t < n { clip(v[t] - lambda) } else { clip(v[t] + lambda) })
        .collect()
}

/// Accelerated projected-gradient descent on the negated dual, with
/// function-value restarts, run to tight tolerance.
pub fn dual_qp(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, eps: f64) -> QpSolution {
    let n = y.len();
    let k = gram(x, gamma);
    let lipschitz = 2.0 * k.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;

    let gradient = |alpha: &[f64]| -> Vec<f64> {
        let u: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
        let ku: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * u[j]).sum()).collect();
        (0..2 * n)
            .map(|t| if t < n { ku[t] + eps - y[t] } else { -ku[t - n] + eps + y[t - n] })
            .collect()
    };
    let loss = |alpha: &[f64]| -dual_value(&k, y, eps, alpha);

    let mut current = vec![0.0; 2 * n];
    let mut momentum_point = current.clone();
    let mut t = 1.0f64;
    let mut value = loss(&current);
    let mut quiet = 0;
    let mut iterations = 0;
    while iterations < 2_000_000 {
        iterations += 1;
        let g = gradient(&momentum_point);
        let trial: Vec<f64> = momentum_point.iter().zip(&g).map(|(a, d)| a - step * d).collect();
        let next = project(&trial, c);
        let next_value = loss(&next);
        if next_value > value && t > 1.0 {
            // restart momentum from the last accepted point
            momentum_point = current.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let shift = next.iter().zip(&current).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        momentum_point = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        current = next;
        value = next_value;
        t = t_next;
        if shift <= 1e-14 * c.max(1.0) {
            quiet += 1;
            if quiet >= 50 {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let coef: Vec<f64> = (0..n).map(|i| current[i] - current[n + i]).collect();
    let ku: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * coef[j]).sum()).collect();
    let margin = 1e-9 * c;
    let mut free = Vec::new();
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let (b, bs) = (current[i], current[n + i]);
        let from_beta = y[i] - eps - ku[i];
        let from_beta_star = y[i] + eps - ku[i];
        // beta = 0 means y - f <= eps, a lower bound on b; beta = C an upper one
        if b > margin && b < c - margin {
            free.push(from_beta);
        } else if b <= margin {
            lower = lower.max(from_beta);
        } else {
            upper = upper.min(from_beta);
        }
        if bs > margin && bs < c - margin {
            free.push(from_beta_star);
        } else if bs <= margin {
            upper = upper.min(from_beta_star);
        } else {
            lower = lower.max(from_beta_star);
        }
    }
    let bias = if free.is_empty() {
        0.5 * (upper + lower)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    QpSolution {
        coef,
        bias,
        objective: -value,
        iterations,
    }
}

pub fn predict(x: &[Vec<f64>], coef: &[f64], bias: f64, gamma: f64, query: &[f64]) -> f64 {
    x.iter()
        .zip(coef)
        .map(|(xi, a)| {
            let d2: f64 = xi.iter().zip(query).map(|(p, q)| (p - q) * (p - q)).sum();
            a * (-gamma * d2).exp()
        })
        .sum::<f64>()
        + bias
}

/// Histogram MI in bits, written directly from the definition with
/// `log2(p_xy) - log2(p_x) - log2(p_y)` summed in natural order.
pub fn mutual_information(series: &[f64], tau: usize, bins: usize) -> f64 {
    let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bin = |v: f64| -> usize {
        if hi == lo {
            0
        } else {
            (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
        }
    };
    let pairs = series.len() - tau;
    let mut joint = vec![vec![0usize; bins]; bins];
    let mut left = vec![0usize; bins];
    let mut right = vec![0usize; bins];
    for j in 0..pairs {
        let (a, b) = (bin(series[j]), bin(series[j + tau]));
        joint[a][b] += 1;
        left[a] += 1;
        right[b] += 1;
    }
    let total = pairs as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            if joint[a][b] > 0 {
                let pxy = joint[a][b] as f64 / total;
                let px = left[a] as f64 / total;
                let py = right[b] as f64 / total;
                mi += pxy * (pxy.log2() - px.log2() - py.log2());
            }
        }
    }
    mi.max(0.0)
}
