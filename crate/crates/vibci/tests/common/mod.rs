//! Shared test oracles, kept independent of the implementation paths they
//! check.

#![allow(dead_code)]

use std::f64::consts::PI;

use vibci::dsp::{FilterKind, FilterSpec};

/// Analytic Butterworth magnitude of the digital design at `f_hz`,
/// evaluated from the closed-form prototype response at the bilinear
/// pre-warped frequency (no poles, no sections).
pub fn analytic_butterworth_magnitude(spec: &FilterSpec, f_hz: f64) -> f64 {
    let warp = |f: f64| 4.0 * (PI * f / spec.rate).tan();
    let nu = warp(f_hz);
    let omega = match spec.kind {
        FilterKind::Lowpass { cutoff_hz } => nu / warp(cutoff_hz),
        FilterKind::Bandpass { low_hz, high_hz } => {
            let (wl, wh) = (warp(low_hz), warp(high_hz));
            (nu * nu - wl * wh) / (nu * (wh - wl))
        }
        FilterKind::Bandstop { low_hz, high_hz } => {
            let (wl, wh) = (warp(low_hz), warp(high_hz));
            (nu * (wh - wl)) / (wl * wh - nu * nu)
        }
    };
    let omega2n = omega.abs().powi(2 * spec.order as i32);
    1.0 / (1.0 + omega2n).sqrt()
}

/// Exact solution of the box-constrained SVM dual
/// `min 0.5 a'Qa - e'a, 0 <= a_i <= C` with `Q_ij = y_i y_j (x_i.x_j + 1)`,
/// found by enumerating active sets (every assignment of each coordinate to
/// {lower, upper, free}) and verifying the KKT conditions. Falls back to a
/// long projected-gradient run for degenerate cases. Returns `(w, b)` of
/// the corresponding primal.
pub fn qp_oracle(x: &[Vec<f64>], y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let l = x.len();
    assert!(l <= 8, "enumeration oracle limited to small problems");
    let q = build_q(x, y);

    if let Some(alpha) = enumerate_active_sets(&q, c) {
        return primal_from_alpha(x, y, &alpha);
    }
    let alpha = projected_gradient(&q, c, 2_000_000);
    let g = kkt_violation(&q, &alpha, c);
    assert!(g < 1e-6, "projected-gradient fallback did not converge: {g}");
    primal_from_alpha(x, y, &alpha)
}

fn build_q(x: &[Vec<f64>], y: &[f64]) -> Vec<Vec<f64>> {
    let l = x.len();
    let mut q = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            let dot: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0;
            q[i][j] = y[i] * y[j] * dot;
        }
    }
    q
}

fn primal_from_alpha(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> (Vec<f64>, f64) {
    let n = x[0].len();
    let mut w = vec![0.0; n];
    let mut b = 0.0;
    for i in 0..x.len() {
        let coef = alpha[i] * y[i];
        for (wj, xj) in w.iter_mut().zip(&x[i]) {
            *wj += coef * xj;
        }
        b += coef;
    }
    (w, b)
}

fn kkt_violation(q: &[Vec<f64>], alpha: &[f64], c: f64) -> f64 {
    let l = alpha.len();
    let mut worst = 0.0f64;
    for i in 0..l {
        let g: f64 = (0..l).map(|j| q[i][j] * alpha[j]).sum::<f64>() - 1.0;
        let pg = if alpha[i] <= 1e-12 {
            g.min(0.0)
        } else if alpha[i] >= c - 1e-12 {
            g.max(0.0)
        } else {
            g
        };
        worst = worst.max(pg.abs());
    }
    worst
}

fn enumerate_active_sets(q: &[Vec<f64>], c: f64) -> Option<Vec<f64>> {
    let l = q.len();
    let patterns = 3usize.pow(l as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for code in 0..patterns {
        let mut state = Vec::with_capacity(l);
        let mut rem = code;
        for _ in 0..l {
            state.push(rem % 3); // 0 = lower, 1 = upper, 2 = free
            rem /= 3;
        }
        let free: Vec<usize> = (0..l).filter(|i| state[*i] == 2).collect();

        let mut alpha: Vec<f64> = state
            .iter()
            .map(|s| match s {
                0 => 0.0,
                1 => c,
                _ => 0.0,
            })
            .collect();

        if !free.is_empty() {
            // Solve Q_FF a_F = 1 - Q_FU * C over the free coordinates.
            let m = free.len();
            let mut a = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for (r, &i) in free.iter().enumerate() {
                for (cidx, &j) in free.iter().enumerate() {
                    a[r][cidx] = q[i][j];
                }
                let upper_sum: f64 = (0..l)
                    .filter(|j| state[*j] == 1)
                    .map(|j| q[i][j] * c)
                    .sum();
                rhs[r] = 1.0 - upper_sum;
            }
            let Some(sol) = gaussian_solve(a, rhs) else { continue };
            for (idx, &i) in free.iter().enumerate() {
                alpha[i] = sol[idx];
            }
        }

        // Feasibility and stationarity check.
        if alpha.iter().any(|a| *a < -1e-9 || *a > c + 1e-9) {
            continue;
        }
        for a in &mut alpha {
            *a = a.clamp(0.0, c);
        }
        let violation = kkt_violation(q, &alpha, c);
        if violation < 1e-7 {
            match &best {
                Some((v, _)) if *v <= violation => {}
                _ => best = Some((violation, alpha)),
            }
        }
    }
    best.map(|(_, a)| a)
}

/// Gaussian elimination with partial pivoting; `None` if near-singular.
fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[pivot][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn projected_gradient(q: &[Vec<f64>], c: f64, iters: usize) -> Vec<f64> {
    let l = q.len();
    // Step size from a Gershgorin bound on the largest eigenvalue.
    let lambda_max = (0..l)
        .map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let eta = 1.0 / lambda_max;
    let mut alpha = vec![0.0; l];
    for _ in 0..iters {
        for i in 0..l {
            let g: f64 = (0..l).map(|j| q[i][j] * alpha[j]).sum::<f64>() - 1.0;
            alpha[i] = (alpha[i] - eta * g).clamp(0.0, c);
        }
    }
    alpha
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn sine(freq: f64, rate: f64, n: usize, amplitude: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amplitude * (2.0 * PI * freq * i as f64 / rate).sin())
        .collect()
}
