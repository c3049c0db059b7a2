//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size {h:e} fell below the minimum at s = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at s = {t}")]
    TooManySteps { t: f64 },
    #[error("non-finite state at s = {t}")]
    NonFinite { t: f64 },
    #[error("output times must be non-decreasing and start at or after s0")]
    BadTimes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(s, y)` from `s0` to `s1 ≥ s0`.
pub fn dopri5<const N: usize, F>(
    mut f: F,
    s0: f64,
    y0: [f64; N],
    s1: f64,
    opts: &OdeOptions,
) -> Result<([f64; N], OdeStats), OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut stats = OdeStats::default();
    if s1 < s0 {
        return Err(OdeError::BadTimes);
    }
    if s1 == s0 {
        return Ok((y0, stats));
    }
    let span = s1 - s0;
    let mut t = s0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evals += 1;
    let mut h = initial_step(&y, &k1, span, opts);
    let mut k = [[0.0; N]; 7];
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        let last = t + h >= s1 - 1e-14 * span;
        if last {
            h = s1 - t;
        }
        k[0] = k1;
        let mut ynew = y;
        for stage in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..stage {
                    acc += A[stage][j] * k[j][i];
                }
                *yi += h * acc;
            }
            k[stage] = f(t + C[stage] * h, &ys);
            stats.evals += 1;
            if stage == 6 {
                ynew = ys;
            }
        }
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            if h * 0.2 < opts.h_min {
                return Err(OdeError::NonFinite { t });
            }
            h *= 0.2;
            stats.rejected += 1;
            continue;
        }
        if err <= 1.0 {
            stats.accepted += 1;
            t = if last { s1 } else { t + h };
            y = ynew;
            k1 = k[6];
            if last {
                return Ok((y, stats));
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < opts.h_min {
            return Err(OdeError::StepUnderflow { t, h });
        }
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], span: f64, opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(opts.h_min)
}

/// Integrates through the non-decreasing output times, returning the state
/// at each.
pub fn dopri5_at<const N: usize, F>(
    mut f: F,
    s0: f64,
    y0: [f64; N],
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    let mut t = s0;
    let mut y = y0;
    for &ti in times {
        if ti < t {
            return Err(OdeError::BadTimes);
        }
        y = dopri5(&mut f, t, y, ti, opts)?.0;
        t = ti;
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E as EULER;

    /// Gragg–Bulirsch–Stoer with fixed macro steps: modified midpoint with
    /// substep counts 2, 4, 6, 8 and polynomial extrapolation in h².
    fn gbs<const N: usize>(
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        s0: f64,
        y0: [f64; N],
        s1: f64,
        big_h: f64,
    ) -> [f64; N] {
        let steps = ((s1 - s0) / big_h).round() as usize;
        let big_h = (s1 - s0) / steps as f64;
        let counts = [2usize, 4, 6, 8];
        let mut y = y0;
        for m in 0..steps {
            let t0 = s0 + m as f64 * big_h;
            let mut table: Vec<[f64; N]> = Vec::new();
            for &nk in &counts {
                let h = big_h / nk as f64;
                let mut z0 = y;
                let f0 = f(t0, &z0);
                let mut z1 = [0.0; N];
                for i in 0..N {
                    z1[i] = z0[i] + h * f0[i];
                }
                for j in 1..nk {
                    let fz = f(t0 + j as f64 * h, &z1);
                    let mut z2 = [0.0; N];
                    for i in 0..N {
                        z2[i] = z0[i] + 2.0 * h * fz[i];
                    }
                    z0 = z1;
                    z1 = z2;
                }
                let fe = f(t0 + big_h, &z1);
                let mut r = [0.0; N];
                for i in 0..N {
                    r[i] = 0.5 * (z0[i] + z1[i] + h * fe[i]);
                }
                table.push(r);
            }
            // Neville in x = h², evaluated at 0
            let xs: Vec<f64> = counts.iter().map(|&c| (big_h / c as f64).powi(2)).collect();
            for lvl in 1..counts.len() {
                for j in (lvl..counts.len()).rev() {
                    let ratio = xs[j - lvl] / xs[j] - 1.0;
                    let mut next = table[j];
                    for i in 0..N {
                        next[i] = table[j][i] + (table[j][i] - table[j - 1][i]) / ratio;
                    }
                    table[j] = next;
                }
            }
            y = table[counts.len() - 1];
        }
        y
    }

    fn flow_rhs(kappa: f64, eps: f64, n: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
        move |_, y| {
            let u = kappa * kappa;
            let den = u * y[0] + eps;
            [
                -(eps / (n - 1.0)) * y[0] / den - u * y[0] * y[0] / den,
                -(eps / (n - 1.0)) * y[1] / den,
            ]
        }
    }

    #[test]
    fn exponential_decay() {
        let (y, stats) = dopri5(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            1.0,
            &OdeOptions::with_tol(1e-12),
        )
        .unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-11);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn gbs_oracle_is_eighth_order() {
        let y = gbs(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 1.0, 0.1);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn deformation_system_against_oracles() {
        let f = flow_rhs(1.0, 1.0, 2.0);
        let (y, _) = dopri5(&f, 0.0, [1.0, 1.0], 1.0, &OdeOptions::with_tol(1e-10)).unwrap();
        let r = gbs(&f, 0.0, [1.0, 1.0], 1.0, 1e-2);
        assert!((y[0] - r[0]).abs() < 1e-9 && (y[1] - r[1]).abs() < 1e-9);
        // n = 2 solves in closed form: a = e^{−s}, b = 2/(e^s + 1)
        assert!((r[0] - 1.0 / EULER).abs() < 1e-13);
        assert!((r[1] - 2.0 / (EULER + 1.0)).abs() < 1e-13);
        assert!((y[0] - 1.0 / EULER).abs() < 1e-9);
        assert!((y[1] - 2.0 / (EULER + 1.0)).abs() < 1e-9);
        // n = 3 has no closed form; only the oracle is available
        let f3 = flow_rhs(0.7, 0.5, 3.0);
        let (y, _) = dopri5(&f3, 0.0, [1.0, 1.0], 1.5, &OdeOptions::with_tol(1e-10)).unwrap();
        let r = gbs(&f3, 0.0, [1.0, 1.0], 1.5, 1e-2);
        assert!((y[0] - r[0]).abs() < 1e-9 && (y[1] - r[1]).abs() < 1e-9);
    }

    #[test]
    fn output_times_and_semigroup() {
        let f = flow_rhs(0.8, 1.0, 2.0);
        let opts = OdeOptions::with_tol(1e-10);
        let ys = dopri5_at(&f, 0.0, [1.0, 1.0], &[0.5, 1.0, 1.0, 2.0], &opts).unwrap();
        let (direct, _) = dopri5(&f, 0.0, [1.0, 1.0], 2.0, &opts).unwrap();
        assert_eq!(ys[1], ys[2]);
        for i in 0..2 {
            assert!((ys[3][i] - direct[i]).abs() < 2e-10);
        }
        assert_eq!(
            dopri5_at(&f, 0.0, [1.0, 1.0], &[1.0, 0.5], &opts),
            Err(OdeError::BadTimes)
        );
    }

    #[test]
    fn underflow_is_reported() {
        let opts = OdeOptions {
            h_min: 1e-3,
            ..OdeOptions::with_tol(1e-14)
        };
        let r = dopri5(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, &opts);
        assert!(matches!(
            r,
            Err(OdeError::StepUnderflow { .. }) | Err(OdeError::NonFinite { .. })
        ));
    }
}
