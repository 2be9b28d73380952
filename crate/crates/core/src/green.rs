//! Free-space kernels: the Helmholtz fundamental solution, the dyadic Green's
//! tensor and the electric dipole field built from it.
//!
//! The dipole field is
//!
//! ```text
//! E^i(x; y, p) = (i/k) curl curl (Phi(x, y) p) = (i/k) (k^2 Phi I + Hess Phi) p
//! ```
//!
//! with `Phi(x, y) = exp(ik|x-y|) / (4 pi |x-y|)`.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{CVector, Point};

/// Separations below this are treated as coincident.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-8;

/// Free-space wavenumber `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(Wavenumber(k))
        } else {
            Err(Error::InvalidArgument(format!(
                "wavenumber must be positive and finite, got {k}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Electric point dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole {
    pub location: Point,
    pub polarization: Point,
}

impl Dipole {
    pub fn new(location: Point, polarization: Point) -> Self {
        Dipole {
            location,
            polarization,
        }
    }
}

/// `Phi`, `Phi'` and `Phi''` as functions of the separation `r`.
#[inline]
fn radial_derivatives(r: f64, k: f64) -> (Complex64, Complex64, Complex64) {
    let ik = Complex64::new(0.0, k);
    let phi = (ik * r).exp() / (4.0 * PI * r);
    let a = ik - 1.0 / r;
    let d1 = phi * a;
    let d2 = phi * (a * a + 1.0 / (r * r));
    (phi, d1, d2)
}

fn separation(x: &Point, y: &Point) -> Result<(Point, f64)> {
    let d = x - y;
    let r = d.norm();
    if r < COINCIDENCE_THRESHOLD {
        return Err(Error::CoincidentPoints {
            separation: r,
            threshold: COINCIDENCE_THRESHOLD,
        });
    }
    Ok((d / r, r))
}

/// Fundamental solution of the Helmholtz equation.
pub fn phi(x: &Point, y: &Point, k: Wavenumber) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok(radial_derivatives(r, k.get()).0)
}

/// Dyadic Green's tensor `G(x, y)` with `G p = (i/k) curl curl (Phi p)`.
pub fn green_tensor(x: &Point, y: &Point, k: Wavenumber) -> Result<Matrix3<Complex64>> {
    let (r_hat, r) = separation(x, y)?;
    let k = k.get();
    let (phi, d1, d2) = radial_derivatives(r, k);
    let pref = Complex64::new(0.0, 1.0 / k);
    // Hess Phi = Phi'' r_hat r_hat^T + (Phi'/r)(I - r_hat r_hat^T)
    let along = d2 - d1 / r;
    let iso = phi * (k * k) + d1 / r;
    Ok(Matrix3::from_fn(|a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        pref * (iso * delta + along * (r_hat[a] * r_hat[b]))
    }))
}

/// Incident field of a dipole, `G(x, y) p`.
pub fn incident_field(x: &Point, dipole: &Dipole, k: Wavenumber) -> Result<CVector> {
    let g = green_tensor(x, &dipole.location, k)?;
    Ok(g * dipole.polarization.map(|c| Complex64::new(c, 0.0)))
}

/// `curl E^i = i k grad(Phi) x p`.
pub fn curl_incident_field(x: &Point, dipole: &Dipole, k: Wavenumber) -> Result<CVector> {
    let (r_hat, r) = separation(x, &dipole.location)?;
    let k = k.get();
    let (_, d1, _) = radial_derivatives(r, k);
    let scale = Complex64::new(0.0, k) * d1;
    let c = r_hat.cross(&dipole.polarization);
    Ok(c.map(|v| scale * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn k(v: f64) -> Wavenumber {
        Wavenumber::new(v).unwrap()
    }

    #[test]
    fn unit_separation_value() {
        let v = phi(&Vector3::new(1.0, 0.0, 0.0), &Vector3::zeros(), k(0.75)).unwrap();
        let expect = Complex64::new(0.0, 0.75).exp() / (4.0 * PI);
        assert!((v - expect).norm() < 1e-16);
    }

    #[test]
    fn symmetric_in_arguments() {
        let x = Vector3::new(0.2, -1.3, 0.7);
        let y = Vector3::new(-0.5, 0.4, 1.1);
        assert_eq!(phi(&x, &y, k(0.9)).unwrap(), phi(&y, &x, k(0.9)).unwrap());
        let gxy = green_tensor(&x, &y, k(0.9)).unwrap();
        let gyx = green_tensor(&y, &x, k(0.9)).unwrap();
        assert!((gxy - gyx.transpose()).norm() < 1e-15 * gxy.norm());
    }

    #[test]
    fn coincident_points_rejected() {
        let x = Vector3::new(0.1, 0.1, 0.1);
        assert!(matches!(
            phi(&x, &x, k(1.0)),
            Err(Error::CoincidentPoints { .. })
        ));
        let y = x + Vector3::new(1e-9, 0.0, 0.0);
        assert!(green_tensor(&x, &y, k(1.0)).is_err());
    }

    #[test]
    fn zero_polarization_gives_zero_field() {
        let d = Dipole::new(Vector3::zeros(), Vector3::zeros());
        let e = incident_field(&Vector3::new(0.3, 0.1, -0.2), &d, k(1.0)).unwrap();
        assert_eq!(e.norm(), 0.0);
    }

    #[test]
    fn curl_vanishes_for_radial_polarization() {
        let y = Vector3::new(0.1, 0.2, 0.3);
        let x = Vector3::new(1.1, -0.4, 0.9);
        let d = Dipole::new(y, (x - y) * 2.5);
        let c = curl_incident_field(&x, &d, k(1.0)).unwrap();
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn far_field_decays_like_inverse_distance() {
        let kk = 0.75;
        let wavelength = 2.0 * PI / kk;
        let dir = Vector3::new(1.0, 2.0, -0.5).normalize();
        let g50 = green_tensor(&(dir * 50.0 * wavelength), &Vector3::zeros(), k(kk)).unwrap();
        let g100 = green_tensor(&(dir * 100.0 * wavelength), &Vector3::zeros(), k(kk)).unwrap();
        let ratio = g100.norm() / g50.norm();
        assert!((ratio - 0.5).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn invalid_wavenumbers() {
        assert!(Wavenumber::new(0.0).is_err());
        assert!(Wavenumber::new(-1.0).is_err());
        assert!(Wavenumber::new(f64::NAN).is_err());
    }
}
