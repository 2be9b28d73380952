//! Associated Legendre functions.
//!
//! All functions include the Condon-Shortley phase `(-1)^m`. Angular
//! derivatives are taken with respect to `theta` where `x = cos(theta)`, using
//! the ladder identity
//!
//! ```text
//! dP_n^m/dtheta = ( P_n^{m+1} - (n+m)(n-m+1) P_n^{m-1} ) / 2
//! ```
//!
//! which stays finite at the poles for every `m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `P_n^m(x)` for `m >= 0` by upward recurrence in degree.
fn legendre_unnormalized(n: usize, m: usize, x: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if n == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = x * (2 * m + 1) as f64 * pmm;
    for l in (m + 2)..=n {
        let next = ((2 * l - 1) as f64 * x * p - (l + m - 1) as f64 * p_prev) / (l - m) as f64;
        p_prev = p;
        p = next;
    }
    p
}

/// Returns `(P_n^m(x), dP_n^m/dtheta)` at `x = cos(theta)`.
pub fn assoc_legendre(n: usize, m: usize, x: f64) -> Result<(f64, f64)> {
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "Legendre order m = {m} exceeds degree n = {n}"
        )));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Legendre argument {x} outside [-1, 1]"
        )));
    }
    let p = legendre_unnormalized(n, m, x);
    let upper = legendre_unnormalized(n, m + 1, x);
    let dtheta = if m == 0 {
        upper
    } else {
        let lower = legendre_unnormalized(n, m - 1, x);
        0.5 * (upper - ((n + m) * (n - m + 1)) as f64 * lower)
    };
    Ok((p, dtheta))
}

/// Fully normalized angular functions for all `0 <= m <= n <= n_max` at one polar angle.
///
/// With `Y_n^m = pbar_n^m(cos theta) e^{i m phi}` orthonormal on the unit sphere,
/// the table stores `pbar`, `m pbar / sin(theta)` and `d pbar / d theta`. The
/// quotient is computed without dividing by `sin(theta)`, so the poles are
/// handled exactly.
#[derive(Debug, Clone)]
pub struct AngularTable {
    pub n_max: usize,
    pbar: Vec<f64>,
    m_over_sin: Vec<f64>,
    dtheta: Vec<f64>,
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

impl AngularTable {
    pub fn new(n_max: usize, theta: f64) -> Self {
        let (s, x) = theta.sin_cos();
        let size = tri(n_max + 1, 0);
        let mut pbar = vec![0.0; size];
        // q = pbar / sin(theta) for m >= 1
        let mut q = vec![0.0; size];

        // Diagonal: pbar_m^m = -sqrt((2m+1)/(2m)) sin(theta) pbar_{m-1}^{m-1}
        let mut diag = 1.0 / (4.0 * PI).sqrt();
        let mut diag_q = 0.0; // pbar_m^m / sin for m >= 1
        for m in 0..=n_max {
            if m > 0 {
                let f = -(((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt();
                // pbar_{m}^{m}/sin = f * pbar_{m-1}^{m-1}
                diag_q = f * diag;
                diag *= f * s;
            }
            pbar[tri(m, m)] = diag;
            q[tri(m, m)] = diag_q;
            if m < n_max {
                let c = ((2 * m + 3) as f64).sqrt() * x;
                pbar[tri(m + 1, m)] = c * diag;
                q[tri(m + 1, m)] = c * diag_q;
            }
            for n in (m + 2)..=n_max {
                let nf = n as f64;
                let mf = m as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = (((nf - 1.0) * (nf - 1.0) - mf * mf)
                    / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                    .sqrt();
                pbar[tri(n, m)] = a * (x * pbar[tri(n - 1, m)] - b * pbar[tri(n - 2, m)]);
                q[tri(n, m)] = a * (x * q[tri(n - 1, m)] - b * q[tri(n - 2, m)]);
            }
        }

        let mut m_over_sin = vec![0.0; size];
        let mut dtheta = vec![0.0; size];
        for n in 0..=n_max {
            for m in 0..=n {
                let idx = tri(n, m);
                if m > 0 {
                    m_over_sin[idx] = m as f64 * q[idx];
                }
                let nf = n as f64;
                let mf = m as f64;
                let up = if m < n {
                    ((nf + mf + 1.0) * (nf - mf)).sqrt() * pbar[tri(n, m + 1)]
                } else {
                    0.0
                };
                let down = if m > 0 {
                    ((nf + mf) * (nf - mf + 1.0)).sqrt() * pbar[tri(n, m - 1)]
                } else if n > 0 {
                    // pbar_n^{-1} = -pbar_n^1
                    -(nf * (nf + 1.0)).sqrt() * pbar[tri(n, 1)]
                } else {
                    0.0
                };
                dtheta[idx] = 0.5 * (up - down);
            }
        }

        AngularTable {
            n_max,
            pbar,
            m_over_sin,
            dtheta,
        }
    }

    /// `(pbar, m pbar / sin, d pbar / d theta)` for any `|m| <= n`.
    ///
    /// Negative orders follow `Y_n^{-m} = (-1)^m conj(Y_n^m)`.
    #[inline]
    pub fn get(&self, n: usize, m: i64) -> (f64, f64, f64) {
        let am = m.unsigned_abs() as usize;
        let idx = tri(n, am);
        if m >= 0 {
            (self.pbar[idx], self.m_over_sin[idx], self.dtheta[idx])
        } else {
            let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
            (
                sign * self.pbar[idx],
                -sign * self.m_over_sin[idx],
                sign * self.dtheta[idx],
            )
        }
    }
}

/// Normalization `sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!)` linking `P_n^m` and `pbar_n^m`.
pub fn normalization(n: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in (n - m + 1)..=(n + m) {
        ratio /= k as f64;
    }
    ((2 * n + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}
