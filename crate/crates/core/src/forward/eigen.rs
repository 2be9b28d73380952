use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specialfun::sph_bessel_j;

/// `selfcheck` fails when the margin drops below this.
pub const EIGENVALUE_MARGIN_THRESHOLD: f64 = 0.05;

const SCAN_STEP: f64 = 0.005;

/// `j_n(t)` and `psi_n'(t) = j_n(t) + t j_n'(t)` for `n = 1..=n_scan`.
fn interior_values(n_scan: usize, t: f64) -> Result<Vec<[f64; 2]>> {
    let (j, dj) = sph_bessel_j(n_scan, t)?;
    Ok((1..=n_scan).map(|n| [j[n], j[n] + t * dj[n]]).collect())
}

fn bisect(n: usize, which: usize, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = interior_values(n, mid)?[n - 1][which];
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Distance in `t = k rho` from `k rho` to the nearest interior Maxwell
/// eigenvalue of the ball of radius `rho`, i.e. the nearest positive zero of
/// `j_n` (TE) or `psi_n'` (TM) for `1 <= n <= n_scan`. Capped at `pi`.
pub fn maxwell_eigenvalue_margin(k: f64, rho: f64, n_scan: usize) -> Result<f64> {
    if !(k > 0.0 && rho > 0.0) || !k.is_finite() || !rho.is_finite() || n_scan == 0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue margin needs k > 0, rho > 0, n_scan >= 1; got {k}, {rho}, {n_scan}"
        )));
    }
    let t = k * rho;
    let lo = (t - PI).max(1e-3);
    let hi = t + PI;
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut best = PI;
    let mut prev_t = lo;
    let mut prev = interior_values(n_scan, lo)?;
    for s in 1..=steps {
        let cur_t = lo + (hi - lo) * s as f64 / steps as f64;
        let cur = interior_values(n_scan, cur_t)?;
        for n in 1..=n_scan {
            for which in 0..2 {
                let a = prev[n - 1][which];
                let b = cur[n - 1][which];
                let zero = if a == 0.0 {
                    Some(prev_t)
                } else if (a > 0.0) != (b > 0.0) {
                    Some(bisect(n, which, prev_t, cur_t, a)?)
                } else {
                    None
                };
                if let Some(z) = zero {
                    best = best.min((z - t).abs());
                }
            }
        }
        prev_t = cur_t;
        prev = cur;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_for_reference_wavenumber() {
        let m = maxwell_eigenvalue_margin(0.75, 1.0, 20).unwrap();
        // nearest zero is the first zero of psi_1' at 2.7437...
        assert!((m - (2.743707269992269 - 0.75)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn margin_vanishes_at_eigenvalue() {
        let m = maxwell_eigenvalue_margin(4.4934094579, 1.0, 20).unwrap();
        assert!(m < 1e-6, "{m}");
        assert!(m < EIGENVALUE_MARGIN_THRESHOLD);
    }

    #[test]
    fn margin_at_first_j1_zero() {
        // first zero of j_0 is pi but n starts at 1; j_1 vanishes at 4.4934...
        let m = maxwell_eigenvalue_margin(PI, 1.0, 1).unwrap();
        assert!((m - (PI - 2.743707269992269)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(maxwell_eigenvalue_margin(0.0, 1.0, 5).is_err());
        assert!(maxwell_eigenvalue_margin(1.0, -1.0, 5).is_err());
        assert!(maxwell_eigenvalue_margin(1.0, 1.0, 0).is_err());
    }
}
