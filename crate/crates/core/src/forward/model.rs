use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::modes::{solve_modes, ModeCoefficients};
use super::{LayeredCavityConfig, Region};
use crate::error::{Error, Result};
use crate::geometry::{complexify, CVector, Point};
use crate::green::{curl_incident_field, incident_field, Dipole, Wavenumber};
use crate::specialfun::{mode_count, modes, Family, RadialKind, VswfTable};

/// Expansion of a dipole field in outgoing wavefunctions about the origin,
/// valid for `|x| > |y|`:
///
/// ```text
/// E^i(x) = sum_nm te[nm] M3_nm(x) + tm[nm] N3_nm(x)
/// te[nm] = -k^2 / (n(n+1)) conj(M1_nm(y)) . p
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCoefficients {
    pub n_max: usize,
    pub te: Vec<Complex64>,
    pub tm: Vec<Complex64>,
}

impl SourceCoefficients {
    pub fn get(&self, family: Family) -> &[Complex64] {
        match family {
            Family::Te => &self.te,
            Family::Tm => &self.tm,
        }
    }
}

fn expand_dipole(y: &Point, p: &Point, k: f64, n_max: usize) -> Result<SourceCoefficients> {
    let table = VswfTable::new(n_max, k, y, RadialKind::Regular)?;
    let count = mode_count(n_max);
    let mut te = vec![Complex64::new(0.0, 0.0); count];
    let mut tm = vec![Complex64::new(0.0, 0.0); count];
    for (idx, (n, _m)) in modes(n_max).enumerate() {
        let scale = -k * k / (n * (n + 1)) as f64;
        let mf = table.fields(Family::Te)[idx];
        let nf = table.fields(Family::Tm)[idx];
        te[idx] = (mf.x.conj() * p.x + mf.y.conj() * p.y + mf.z.conj() * p.z) * scale;
        tm[idx] = (nf.x.conj() * p.x + nf.y.conj() * p.y + nf.z.conj() * p.z) * scale;
    }
    Ok(SourceCoefficients { n_max, te, tm })
}

/// Forward problem with its mode coefficients solved once.
///
/// The solved model is immutable; evaluations may run concurrently.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    config: LayeredCavityConfig,
    regions: Vec<Region>,
    modes: ModeCoefficients,
}

impl ForwardModel {
    pub fn new(config: LayeredCavityConfig) -> Result<Self> {
        let modes = solve_modes(&config)?;
        let regions = config.medium.regions();
        Ok(ForwardModel {
            config,
            regions,
            modes,
        })
    }

    pub fn config(&self) -> &LayeredCavityConfig {
        &self.config
    }

    pub fn modes(&self) -> &ModeCoefficients {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.config.n_max
    }

    pub fn k(&self) -> Wavenumber {
        self.config.k()
    }

    fn check_inside(&self, point: &Point) -> Result<()> {
        let r = point.norm();
        let a = self.config.cavity_radius();
        if !(r < a) {
            return Err(Error::SourceOutsideCavity {
                radius: r,
                cavity_radius: a,
            });
        }
        Ok(())
    }

    /// Outgoing-wave coefficients of the dipole `(y, p)`.
    pub fn source_expansion(&self, y: &Point, p: &Point) -> Result<SourceCoefficients> {
        self.check_inside(y)?;
        if y.norm() == 0.0 {
            return Err(Error::SourceAtOrigin);
        }
        expand_dipole(y, p, self.k().get(), self.n_max())
    }

    /// Weight `R_n * (-k^2 / (n(n+1)))` linking regular wavefunctions at the
    /// source and the receiver in the scattered field.
    pub fn scattering_weight(&self, family: Family, n: usize) -> Complex64 {
        let k = self.k().get();
        self.modes.get(family, n).reflection * (-k * k / (n * (n + 1)) as f64)
    }

    /// Scattered field inside the cavity at `x` due to the dipole `(y, p)`.
    pub fn scattered_field(&self, x: &Point, y: &Point, p: &Point) -> Result<CVector> {
        self.check_inside(x)?;
        let coeffs = self.source_expansion(y, p)?;
        let table = VswfTable::new(self.n_max(), self.k().get(), x, RadialKind::Regular)?;
        Ok(self.scattered_from_table(&coeffs, &table))
    }

    /// Scattered-field dyadic `T` with `E^s(x, y, p) = T p`.
    pub fn scattered_tensor(&self, x: &Point, y: &Point) -> Result<Matrix3<Complex64>> {
        let mut t = Matrix3::zeros();
        for c in 0..3 {
            let e = self.scattered_field(x, y, &Vector3::ith(c, 1.0))?;
            t.set_column(c, &e);
        }
        Ok(t)
    }

    fn scattered_from_table(&self, coeffs: &SourceCoefficients, table: &VswfTable) -> CVector {
        let mut out = CVector::zeros();
        for fam in [Family::Te, Family::Tm] {
            let fields = table.fields(fam);
            let c = coeffs.get(fam);
            let mut idx = 0;
            for n in 1..=self.n_max() {
                let r = self.modes.get(fam, n).reflection;
                for _ in 0..(2 * n + 1) {
                    out += fields[idx] * (r * c[idx]);
                    idx += 1;
                }
            }
        }
        out
    }

    /// Total field and `curl` of the total field evaluated with the
    /// representation of `region` (0 = cavity, last = exterior).
    pub fn region_fields(
        &self,
        region: usize,
        x: &Point,
        dipole: &Dipole,
        coeffs: &SourceCoefficients,
    ) -> Result<(CVector, CVector)> {
        let n_max = self.n_max();
        let last = self.regions.len() - 1;
        let kl = self.regions[region].wavenumber;
        let regular = if region < last {
            Some(VswfTable::new(n_max, kl, x, RadialKind::Regular)?)
        } else {
            None
        };
        let outgoing = if region > 0 {
            Some(VswfTable::new(n_max, kl, x, RadialKind::Outgoing)?)
        } else {
            None
        };

        let (mut e, mut curl) = if region == 0 {
            (
                incident_field(x, dipole, self.k())?,
                curl_incident_field(x, dipole, self.k())?,
            )
        } else {
            (CVector::zeros(), CVector::zeros())
        };

        for fam in [Family::Te, Family::Tm] {
            let other = match fam {
                Family::Te => Family::Tm,
                Family::Tm => Family::Te,
            };
            let c = coeffs.get(fam);
            let mut idx = 0;
            for n in 1..=n_max {
                let sol = self.modes.get(fam, n);
                let (a_reg, a_out) = if region == 0 {
                    (sol.reflection, Complex64::new(0.0, 0.0))
                } else if region == last {
                    (Complex64::new(0.0, 0.0), sol.transmission)
                } else {
                    sol.shells[region - 1]
                };
                for _ in 0..(2 * n + 1) {
                    let ci = c[idx];
                    if let Some(t) = &regular {
                        let w = a_reg * ci;
                        e += t.fields(fam)[idx] * w;
                        curl += t.fields(other)[idx] * (w * kl);
                    }
                    if let Some(t) = &outgoing {
                        let w = a_out * ci;
                        e += t.fields(fam)[idx] * w;
                        curl += t.fields(other)[idx] * (w * kl);
                    }
                    idx += 1;
                }
            }
        }
        Ok((e, curl))
    }

    /// Largest relative jump of tangential `E` and tangential `A curl E`
    /// across any interface, over `samples` pseudo-random points per interface.
    pub fn interface_residual(&self, y: &Point, p: &Point, samples: usize) -> Result<f64> {
        let coeffs = self.source_expansion(y, p)?;
        let dipole = Dipole::new(*y, *p);
        let mut rng = ChaCha8Rng::seed_from_u64(0x1f2e_3d4c);
        let radii = self.config.medium.interfaces();
        let mut worst: f64 = 0.0;
        for (i, &radius) in radii.iter().enumerate() {
            let mut jump_e: f64 = 0.0;
            let mut jump_h: f64 = 0.0;
            let mut scale_e: f64 = 0.0;
            let mut scale_h: f64 = 0.0;
            for _ in 0..samples {
                let dir = loop {
                    let v = Vector3::new(
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                    );
                    if v.norm() > 1e-6 {
                        break v.normalize();
                    }
                };
                let x = dir * radius;
                let nu = complexify(&dir);
                let (e_in, c_in) = self.region_fields(i, &x, &dipole, &coeffs)?;
                let (e_out, c_out) = self.region_fields(i + 1, &x, &dipole, &coeffs)?;
                let a_in = self.regions[i].inv_permeability;
                let a_out = self.regions[i + 1].inv_permeability;
                let te_in = nu.cross(&e_in);
                let te_out = nu.cross(&e_out);
                let th_in = nu.cross(&c_in) * Complex64::new(a_in, 0.0);
                let th_out = nu.cross(&c_out) * Complex64::new(a_out, 0.0);
                jump_e = jump_e.max((te_in - te_out).norm());
                jump_h = jump_h.max((th_in - th_out).norm());
                scale_e = scale_e.max(te_in.norm()).max(te_out.norm());
                scale_h = scale_h.max(th_in.norm()).max(th_out.norm());
            }
            if scale_e > 0.0 {
                worst = worst.max(jump_e / scale_e);
            }
            if scale_h > 0.0 {
                worst = worst.max(jump_h / scale_h);
            }
        }
        Ok(worst)
    }
}

/// Expansion coefficients of the dipole `(y, p)` for `config`.
pub fn source_expansion(
    y: &Point,
    p: &Point,
    config: &LayeredCavityConfig,
) -> Result<SourceCoefficients> {
    let r = y.norm();
    if !(r < config.cavity_radius()) {
        return Err(Error::SourceOutsideCavity {
            radius: r,
            cavity_radius: config.cavity_radius(),
        });
    }
    if r == 0.0 {
        return Err(Error::SourceAtOrigin);
    }
    expand_dipole(y, p, config.k().get(), config.n_max)
}

/// One-shot scattered field; prefer [`ForwardModel`] for repeated evaluation.
pub fn scattered_field(
    x: &Point,
    y: &Point,
    p: &Point,
    config: &LayeredCavityConfig,
) -> Result<CVector> {
    ForwardModel::new(config.clone())?.scattered_field(x, y, p)
}

pub fn interface_residual(
    config: &LayeredCavityConfig,
    y: &Point,
    p: &Point,
    samples: usize,
) -> Result<f64> {
    ForwardModel::new(config.clone())?.interface_residual(y, p, samples)
}
