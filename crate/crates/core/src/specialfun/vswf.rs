//! Vector spherical wavefunctions.
//!
//! With fully normalized harmonics `Y_n^m` (Condon-Shortley phase),
//!
//! ```text
//! M_nm(x) = curl(x z_n(k r) Y_n^m)          = z_n(kr) (grad_s Y x r_hat)
//! N_nm(x) = curl(M_nm) / k
//!         = n(n+1) z_n(kr)/(kr) Y r_hat + (kr z_n(kr))'/(kr) grad_s Y
//! ```
//!
//! where `grad_s Y = dY/dtheta theta_hat + (1/sin theta) dY/dphi phi_hat`.
//! Both are divergence free and satisfy `curl curl F = k^2 F`; `curl N = k M`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::bessel::{sph_bessel_j, sph_bessel_table, RadialKind};
use super::legendre::AngularTable;
use crate::error::{Error, Result};
use crate::geometry::{CVector, Point, SphericalFrame};

/// TE (`M`) or TM (`N`) wavefunction family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Te,
    Tm,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Te => "TE",
            Family::Tm => "TM",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VswfValue {
    pub field: CVector,
    pub kind: RadialKind,
    pub family: Family,
    pub n: usize,
    pub m: i64,
}

/// Flat index of mode `(n, m)`, `n >= 1`, `|m| <= n`.
#[inline]
pub fn mode_index(n: usize, m: i64) -> usize {
    n * n - 1 + (m + n as i64) as usize
}

/// Number of modes with `1 <= n <= n_max`.
#[inline]
pub fn mode_count(n_max: usize) -> usize {
    n_max * (n_max + 2)
}

/// Iterator over `(n, m)` in flat-index order.
pub fn modes(n_max: usize) -> impl Iterator<Item = (usize, i64)> {
    (1..=n_max).flat_map(|n| (-(n as i64)..=n as i64).map(move |m| (n, m)))
}

/// Both families for every mode up to `n_max`, evaluated at one point.
#[derive(Debug, Clone)]
pub struct VswfTable {
    pub n_max: usize,
    pub frame: SphericalFrame,
    m_fields: Vec<CVector>,
    n_fields: Vec<CVector>,
}

impl VswfTable {
    pub fn new(n_max: usize, k: f64, point: &Point, kind: RadialKind) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        let frame = SphericalFrame::at(point);
        let count = mode_count(n_max);
        let mut m_fields = vec![CVector::zeros(); count];
        let mut n_fields = vec![CVector::zeros(); count];

        if frame.r == 0.0 {
            if kind == RadialKind::Outgoing {
                return Err(Error::InvalidArgument(
                    "outgoing wavefunctions are singular at the origin".into(),
                ));
            }
            if n_max >= 1 {
                // N_1m(0) = (2/3) grad(r Y_1^m); every other mode vanishes.
                let c0 = (3.0 / (4.0 * PI)).sqrt();
                let c1 = (3.0 / (8.0 * PI)).sqrt();
                let two_thirds = 2.0 / 3.0;
                let i = Complex64::i();
                let one = Complex64::new(1.0, 0.0);
                n_fields[mode_index(1, -1)] = Vector3::new(one, -i, Complex64::new(0.0, 0.0))
                    * Complex64::new(two_thirds * c1, 0.0);
                n_fields[mode_index(1, 0)] = Vector3::new(0.0.into(), 0.0.into(), one)
                    * Complex64::new(two_thirds * c0, 0.0);
                n_fields[mode_index(1, 1)] = Vector3::new(one, i, Complex64::new(0.0, 0.0))
                    * Complex64::new(-two_thirds * c1, 0.0);
            }
            return Ok(VswfTable {
                n_max,
                frame,
                m_fields,
                n_fields,
            });
        }

        let t = k * frame.r;
        let (z, dz): (Vec<Complex64>, Vec<Complex64>) = match kind {
            RadialKind::Regular => {
                let (j, dj) = sph_bessel_j(n_max, t)?;
                (
                    j.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
                    dj.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
                )
            }
            RadialKind::Outgoing => sph_bessel_table(n_max, t)?.hankel(),
        };
        let ang = AngularTable::new(n_max, frame.theta);
        let i = Complex64::i();

        // e^{i m phi} for m = 0..=n_max
        let base = Complex64::from_polar(1.0, frame.phi);
        let mut phases = Vec::with_capacity(n_max + 1);
        let mut e = Complex64::new(1.0, 0.0);
        for _ in 0..=n_max {
            phases.push(e);
            e *= base;
        }

        for n in 1..=n_max {
            let zr = z[n] / t;
            let dpsi = (z[n] + t * dz[n]) / t;
            let nn1 = (n * (n + 1)) as f64;
            for m in -(n as i64)..=(n as i64) {
                let (p, ms, d) = ang.get(n, m);
                let phase = if m >= 0 {
                    phases[m as usize]
                } else {
                    phases[(-m) as usize].conj()
                };
                let idx = mode_index(n, m);
                m_fields[idx] = frame.to_cartesian(
                    Complex64::new(0.0, 0.0),
                    i * ms * z[n] * phase,
                    -d * z[n] * phase,
                );
                n_fields[idx] = frame.to_cartesian(
                    nn1 * p * zr * phase,
                    d * dpsi * phase,
                    i * ms * dpsi * phase,
                );
            }
        }
        Ok(VswfTable {
            n_max,
            frame,
            m_fields,
            n_fields,
        })
    }

    #[inline]
    pub fn get(&self, family: Family, n: usize, m: i64) -> &CVector {
        let idx = mode_index(n, m);
        match family {
            Family::Te => &self.m_fields[idx],
            Family::Tm => &self.n_fields[idx],
        }
    }

    pub fn fields(&self, family: Family) -> &[CVector] {
        match family {
            Family::Te => &self.m_fields,
            Family::Tm => &self.n_fields,
        }
    }
}

/// Evaluates a single wavefunction.
pub fn vswf_eval(
    family: Family,
    kind: RadialKind,
    n: usize,
    m: i64,
    wavenumber: f64,
    point: &Point,
) -> Result<VswfValue> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "wavefunction degree must be >= 1".into(),
        ));
    }
    if m.unsigned_abs() as usize > n {
        return Err(Error::InvalidArgument(format!(
            "order |m| = {} exceeds n = {n}",
            m.abs()
        )));
    }
    let table = VswfTable::new(n, wavenumber, point, kind)?;
    Ok(VswfValue {
        field: *table.get(family, n, m),
        kind,
        family,
        n,
        m,
    })
}
