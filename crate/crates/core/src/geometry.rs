//! Spherical coordinate chart and small vector helpers.

use nalgebra::Vector3;
use num_complex::Complex64;

pub type Point = Vector3<f64>;
pub type CVector = Vector3<Complex64>;

/// Local orthonormal frame `(r_hat, theta_hat, phi_hat)` at a point.
///
/// `theta` is measured from the `+x3` axis and `phi` from `+x1`. On the axis
/// the azimuth is taken as `atan2(0, 0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalFrame {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub r_hat: Point,
    pub theta_hat: Point,
    pub phi_hat: Point,
}

impl SphericalFrame {
    pub fn at(point: &Point) -> Self {
        let r = point.norm();
        let rho = point.x.hypot(point.y);
        let theta = rho.atan2(point.z);
        let phi = point.y.atan2(point.x);
        Self::from_angles(r, theta, phi)
    }

    pub fn from_angles(r: f64, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SphericalFrame {
            r,
            theta,
            phi,
            r_hat: Vector3::new(st * cp, st * sp, ct),
            theta_hat: Vector3::new(ct * cp, ct * sp, -st),
            phi_hat: Vector3::new(-sp, cp, 0.0),
        }
    }

    /// Cartesian vector from spherical components.
    #[inline]
    pub fn to_cartesian(&self, cr: Complex64, ct: Complex64, cp: Complex64) -> CVector {
        Vector3::new(
            cr * self.r_hat.x + ct * self.theta_hat.x + cp * self.phi_hat.x,
            cr * self.r_hat.y + ct * self.theta_hat.y + cp * self.phi_hat.y,
            cr * self.r_hat.z + ct * self.theta_hat.z + cp * self.phi_hat.z,
        )
    }
}

/// Real vector promoted to complex.
#[inline]
pub fn complexify(v: &Point) -> CVector {
    v.map(|c| Complex64::new(c, 0.0))
}

/// Bilinear (non-conjugating) product of a real and a complex vector.
#[inline]
pub fn rdot(a: &Point, b: &CVector) -> Complex64 {
    b.x * a.x + b.y * a.y + b.z * a.z
}
