//! Spherical Bessel, Neumann, Hankel and Riccati-Bessel functions of real argument.
//!
//! `j_n` is obtained by Miller's downward recurrence
//!
//! ```text
//! j_{n-1}(t) = (2n+1)/t * j_n(t) - j_{n+1}(t)
//! ```
//!
//! started at `order_max + max(15, ceil(1.5 t))` and normalized against the
//! closed forms of `j_0` or `j_1` (whichever is larger in magnitude, so that
//! zeros of `j_0` do not spoil the scale). `y_n` is stable upward.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order any table may be built for.
pub const MAX_ORDER: usize = 200;

const RESCALE_THRESHOLD: f64 = 1e250;

/// Spherical Bessel functions of the first and second kind with derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    pub order_max: usize,
    pub argument: f64,
    pub j_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub j_derivs: Vec<f64>,
    pub y_derivs: Vec<f64>,
}

/// Which radial solution a wavefunction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadialKind {
    /// `j_n`, finite at the origin (kind 1).
    Regular,
    /// `h_n^(1) = j_n + i y_n`, outgoing (kind 3).
    Outgoing,
}

fn check_args(order_max: usize, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "spherical Bessel argument must be positive and finite, got {t}"
        )));
    }
    if order_max > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "order {order_max} exceeds the hard cap {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// `j_0 ..= j_{count-1}` by downward recurrence.
fn bessel_j_downward(count: usize, t: f64) -> Vec<f64> {
    let start = count + 15usize.max((1.5 * t).ceil() as usize);
    let mut out = vec![0.0; count];
    let mut upper = 0.0_f64; // j_{n+1}
    let mut current = 1e-300_f64; // j_n, arbitrary seed
    for n in (1..=start).rev() {
        let lower = (2 * n + 1) as f64 / t * current - upper;
        upper = current;
        current = lower;
        // `current` now holds j_{n-1}
        if n - 1 < count {
            out[n - 1] = current;
        }
        if current.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            current *= s;
            upper *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    // The ratio j_1/j_0 is exact from the recurrence even when only one of them
    // is stored, so recover the unnormalized j_1 when count == 1.
    let (raw0, raw1) = if count > 1 {
        (out[0], out[1])
    } else {
        (current, upper)
    };
    let (sin_t, cos_t) = t.sin_cos();
    let j0 = sin_t / t;
    let j1 = (sin_t / t - cos_t) / t;
    let scale = if j0.abs() >= j1.abs() {
        j0 / raw0
    } else {
        j1 / raw1
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Tabulates `j_n`, `y_n` and their derivatives for `n = 0..=order_max`.
pub fn sph_bessel_table(order_max: usize, t: f64) -> Result<RadialTable> {
    check_args(order_max, t)?;
    let count = order_max + 2;
    let j = bessel_j_downward(count, t);

    let (sin_t, cos_t) = t.sin_cos();
    let mut y = vec![0.0; count];
    y[0] = -cos_t / t;
    y[1] = -cos_t / (t * t) - sin_t / t;
    for n in 1..count - 1 {
        y[n + 1] = (2 * n + 1) as f64 / t * y[n] - y[n - 1];
    }
    if let Some(order) = y.iter().take(order_max + 1).position(|v| !v.is_finite()) {
        return Err(Error::Overflow { order, argument: t });
    }

    let deriv = |f: &[f64], n: usize| -> f64 {
        if n == 0 {
            -f[1]
        } else {
            f[n - 1] - (n + 1) as f64 / t * f[n]
        }
    };
    let j_derivs: Vec<f64> = (0..=order_max).map(|n| deriv(&j, n)).collect();
    let y_derivs: Vec<f64> = (0..=order_max).map(|n| deriv(&y, n)).collect();
    if y_derivs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow {
            order: order_max,
            argument: t,
        });
    }

    let mut j_values = j;
    j_values.truncate(order_max + 1);
    y.truncate(order_max + 1);
    Ok(RadialTable {
        order_max,
        argument: t,
        j_values,
        y_values: y,
        j_derivs,
        y_derivs,
    })
}

/// Spherical Hankel functions of the first kind `h_n = j_n + i y_n` and their derivatives.
pub fn sph_hankel1(order_max: usize, t: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let table = sph_bessel_table(order_max, t)?;
    Ok(table.hankel())
}

impl RadialTable {
    pub fn hankel(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let h = self
            .j_values
            .iter()
            .zip(&self.y_values)
            .map(|(&j, &y)| Complex64::new(j, y))
            .collect();
        let dh = self
            .j_derivs
            .iter()
            .zip(&self.y_derivs)
            .map(|(&j, &y)| Complex64::new(j, y))
            .collect();
        (h, dh)
    }

    /// Radial value `z_n(t)` for the requested kind.
    pub fn value(&self, kind: RadialKind, n: usize) -> Complex64 {
        match kind {
            RadialKind::Regular => Complex64::new(self.j_values[n], 0.0),
            RadialKind::Outgoing => Complex64::new(self.j_values[n], self.y_values[n]),
        }
    }

    /// Derivative `z_n'(t)` for the requested kind.
    pub fn derivative(&self, kind: RadialKind, n: usize) -> Complex64 {
        match kind {
            RadialKind::Regular => Complex64::new(self.j_derivs[n], 0.0),
            RadialKind::Outgoing => Complex64::new(self.j_derivs[n], self.y_derivs[n]),
        }
    }

    /// Riccati derivative `(t z_n(t))' = z_n + t z_n'`.
    pub fn riccati_derivative(&self, kind: RadialKind, n: usize) -> Complex64 {
        self.value(kind, n) + self.argument * self.derivative(kind, n)
    }
}

/// Riccati-Bessel pairs `(psi_n, psi_n')` with `psi_n(t) = t z_n(t)`.
pub fn riccati(order_max: usize, t: f64, kind: RadialKind) -> Result<Vec<(Complex64, Complex64)>> {
    if kind == RadialKind::Regular {
        // y_n is not needed for the regular kind; avoid spurious overflow errors.
        let (j, dj) = sph_bessel_j(order_max, t)?;
        return Ok(j
            .iter()
            .zip(&dj)
            .map(|(&jn, &djn)| {
                (
                    Complex64::new(t * jn, 0.0),
                    Complex64::new(jn + t * djn, 0.0),
                )
            })
            .collect());
    }
    let table = sph_bessel_table(order_max, t)?;
    Ok((0..=order_max)
        .map(|n| (t * table.value(kind, n), table.riccati_derivative(kind, n)))
        .collect())
}

/// Regular functions only: `j_n` and `j_n'` for `n = 0..=order_max`.
///
/// Never overflows, so it is usable at arguments where `y_n` would.
pub fn sph_bessel_j(order_max: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_args(order_max, t)?;
    let j = bessel_j_downward(order_max + 2, t);
    let dj = (0..=order_max)
        .map(|n| {
            if n == 0 {
                -j[1]
            } else {
                j[n - 1] - (n + 1) as f64 / t * j[n]
            }
        })
        .collect();
    let mut values = j;
    values.truncate(order_max + 1);
    Ok((values, dj))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series j_n(t) = t^n/(2n+1)!! sum_k (-t^2/2)^k / (k! prod_{i=1..k} (2n+2i+1)).
    fn j_series(n: usize, t: f64) -> f64 {
        let mut lead = 1.0;
        for i in 0..n {
            lead *= t / (2 * i + 3) as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -t * t / 2.0 / (k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        lead * sum
    }

    #[test]
    fn j0_closed_form() {
        let t = sph_bessel_table(0, 1.0).unwrap();
        assert!((t.j_values[0] - 0.8414709848078965).abs() < 1e-15);
    }

    #[test]
    fn tiny_argument_limit() {
        let t = sph_bessel_table(3, 1e-8).unwrap();
        assert!((t.j_values[0] - 1.0).abs() < 1e-15);
        for n in 1..=3 {
            assert!(t.j_values[n].abs() < 1e-8);
        }
    }

    #[test]
    fn j5_matches_power_series() {
        let t = sph_bessel_table(5, 2.0).unwrap();
        let oracle = j_series(5, 2.0);
        assert!(
            (t.j_values[5] - oracle).abs() <= 1e-12 * oracle.abs(),
            "{} vs {}",
            t.j_values[5],
            oracle
        );
        // the series starts from t^n/(2n+1)!!; check the leading term bookkeeping
        assert!((j_series(0, 1.0) - 1.0f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn series_agreement_across_orders() {
        for &t in &[0.3, 0.75, 1.7, 3.2] {
            let table = sph_bessel_table(20, t).unwrap();
            for n in 0..=20 {
                let o = j_series(n, t);
                assert!(
                    (table.j_values[n] - o).abs() <= 1e-12 * o.abs(),
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn normalization_near_zero_of_j0() {
        let t = std::f64::consts::PI;
        let table = sph_bessel_table(4, t).unwrap();
        assert!(table.j_values[0].abs() < 1e-15);
        assert!((table.j_values[1] - 1.0 / t).abs() < 1e-14);
    }

    #[test]
    fn hankel_closed_forms() {
        let i = Complex64::i();
        let (h, _) = sph_hankel1(1, 2.0).unwrap();
        let expect = -i * (i * 2.0).exp() / 2.0;
        assert!((h[0] - expect).norm() < 1e-14);
        let (h, _) = sph_hankel1(1, 3.0).unwrap();
        let expect = -(i * 3.0).exp() * (3.0 + i) / 9.0;
        assert!((h[1] - expect).norm() < 1e-14);
    }

    #[test]
    fn hankel_wronskian_form() {
        // Im(h conj(h')) t^2 = j y' - j' y scaled: equals -1
        let (h, dh) = sph_hankel1(4, 1.7).unwrap();
        let w = (h[4] * dh[4].conj()).im * 1.7 * 1.7;
        assert!((w + 1.0).abs() < 1e-10, "{w}");
    }

    #[test]
    fn riccati_closed_forms() {
        let r = riccati(2, 1.3, RadialKind::Regular).unwrap();
        assert!((r[0].0.re - 1.3f64.sin()).abs() < 1e-15);
        assert!((r[0].1.re - 1.3f64.cos()).abs() < 1e-15);
        let r = riccati(0, 0.9, RadialKind::Outgoing).unwrap();
        let expect = -Complex64::i() * (Complex64::i() * 0.9).exp();
        assert!((r[0].0 - expect).norm() < 1e-15);
        let r = riccati(2, 2.5, RadialKind::Regular).unwrap();
        let table = sph_bessel_table(2, 2.5).unwrap();
        assert!((r[2].0.re - 2.5 * table.j_values[2]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            sph_bessel_table(3, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            sph_bessel_table(3, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            sph_bessel_table(201, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn neumann_overflow_is_reported() {
        assert!(matches!(
            sph_bessel_table(200, 0.01),
            Err(Error::Overflow { .. })
        ));
        // the regular part alone stays available
        let (j, _) = sph_bessel_j(200, 0.01).unwrap();
        assert_eq!(j[200], 0.0);
    }
}
