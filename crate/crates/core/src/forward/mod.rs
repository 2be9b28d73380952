//! Analytic forward solver for a dipole inside a spherical cavity surrounded
//! by concentric homogeneous shells.
//!
//! Each shell carries constant scalars `A` (inverse relative permeability) and
//! `N` (relative permittivity), so inside it `curl curl E = k^2 (N/A) E`.
//! Beyond the last shell the medium is vacuum again. Fields are expanded in
//! vector spherical wavefunctions and matched degree by degree.

mod eigen;
mod model;
mod modes;

pub use eigen::{maxwell_eigenvalue_margin, EIGENVALUE_MARGIN_THRESHOLD};
pub use model::{
    interface_residual, scattered_field, source_expansion, ForwardModel, SourceCoefficients,
};
pub use modes::{solve_modes, ModeCoefficients, ModeSolution, CONDITION_LIMIT};

use crate::error::{Error, Result};
use crate::green::Wavenumber;
use crate::specialfun::MAX_ORDER;

/// Target size of the first neglected term of the dipole expansion at the cavity wall.
pub const NEAR_FIELD_TOLERANCE: f64 = 1e-10;

/// One homogeneous layer `inner < r < outer_radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub outer_radius: f64,
    /// `A`, the inverse relative permeability.
    pub inv_permeability: f64,
    /// `N`, the relative permittivity.
    pub permittivity: f64,
}

impl Shell {
    pub fn new(outer_radius: f64, inv_permeability: f64, permittivity: f64) -> Self {
        Shell {
            outer_radius,
            inv_permeability,
            permittivity,
        }
    }
}

/// `k sqrt(N / A)`, the wavenumber inside a homogeneous isotropic layer.
pub fn effective_wavenumber(a: f64, n: f64, k: Wavenumber) -> Result<f64> {
    if !(a > 0.0 && n > 0.0) || !a.is_finite() || !n.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "material coefficients must be positive, got A = {a}, N = {n}"
        )));
    }
    Ok(k.get() * (n / a).sqrt())
}

/// A radial region with its wavenumber and `A` coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub wavenumber: f64,
    pub inv_permeability: f64,
}

/// Geometry and materials without a truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMedium {
    pub cavity_radius: f64,
    pub shells: Vec<Shell>,
    pub k: Wavenumber,
}

impl LayeredMedium {
    pub fn new(cavity_radius: f64, shells: Vec<Shell>, k: Wavenumber) -> Result<Self> {
        if !(cavity_radius > 0.0) || !cavity_radius.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "cavity radius must be positive, got {cavity_radius}"
            )));
        }
        let mut inner = cavity_radius;
        for (i, s) in shells.iter().enumerate() {
            if !(s.outer_radius > inner) || !s.outer_radius.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "shell {i}: outer radius {} must exceed the inner radius {inner}",
                    s.outer_radius
                )));
            }
            if !(s.inv_permeability > 0.0 && s.permittivity > 0.0)
                || !s.inv_permeability.is_finite()
                || !s.permittivity.is_finite()
            {
                return Err(Error::InvalidConfig(format!(
                    "shell {i}: A = {} and N = {} must be positive",
                    s.inv_permeability, s.permittivity
                )));
            }
            inner = s.outer_radius;
        }
        Ok(LayeredMedium {
            cavity_radius,
            shells,
            k,
        })
    }

    /// Regions from the cavity outwards; first and last are vacuum.
    pub fn regions(&self) -> Vec<Region> {
        let k = self.k.get();
        let vacuum = Region {
            wavenumber: k,
            inv_permeability: 1.0,
        };
        let mut out = Vec::with_capacity(self.shells.len() + 2);
        out.push(vacuum);
        for s in &self.shells {
            out.push(Region {
                wavenumber: k * (s.permittivity / s.inv_permeability).sqrt(),
                inv_permeability: s.inv_permeability,
            });
        }
        out.push(vacuum);
        out
    }

    /// Interface radii from the cavity wall outwards.
    pub fn interfaces(&self) -> Vec<f64> {
        std::iter::once(self.cavity_radius)
            .chain(self.shells.iter().map(|s| s.outer_radius))
            .collect()
    }

    pub fn outer_radius(&self) -> f64 {
        self.shells
            .last()
            .map_or(self.cavity_radius, |s| s.outer_radius)
    }

    /// Wave-size rule `ceil(k_eff,max * r_max) + 8`.
    pub fn truncation_order(&self) -> usize {
        let k_max = self
            .regions()
            .iter()
            .map(|r| r.wavenumber)
            .fold(0.0, f64::max);
        (k_max * self.outer_radius()).ceil() as usize + 8
    }

    /// Degree at which the expansion of a dipole at `source_radius`, seen on
    /// the cavity wall, has decayed to `NEAR_FIELD_TOLERANCE`.
    pub fn near_field_order(&self, source_radius: f64) -> usize {
        let q = source_radius / self.cavity_radius;
        if !(q > 0.0) {
            return 0;
        }
        if q >= 1.0 {
            return MAX_ORDER;
        }
        ((NEAR_FIELD_TOLERANCE.ln() / q.ln()).ceil() as usize).min(MAX_ORDER)
    }

    /// Order used by the pipeline for sources and receivers up to `source_radius`.
    pub fn resolved_order(&self, source_radius: f64) -> usize {
        self.truncation_order()
            .max(self.near_field_order(source_radius))
    }

    pub fn with_order(self, n_max: usize) -> Result<LayeredCavityConfig> {
        LayeredCavityConfig::new(self, n_max)
    }

    pub fn is_vacuum(&self) -> bool {
        self.shells
            .iter()
            .all(|s| s.inv_permeability == 1.0 && s.permittivity == 1.0)
    }
}

/// Complete forward-problem definition.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredCavityConfig {
    pub medium: LayeredMedium,
    pub n_max: usize,
}

impl LayeredCavityConfig {
    pub fn new(medium: LayeredMedium, n_max: usize) -> Result<Self> {
        if n_max == 0 || n_max > MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "truncation order must lie in 1..={MAX_ORDER}, got {n_max}"
            )));
        }
        Ok(LayeredCavityConfig { medium, n_max })
    }

    pub fn k(&self) -> Wavenumber {
        self.medium.k
    }

    pub fn cavity_radius(&self) -> f64 {
        self.medium.cavity_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(k: f64) -> LayeredMedium {
        LayeredMedium::new(
            1.5,
            vec![Shell::new(2.5, 1.0, 2.0)],
            Wavenumber::new(k).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn effective_wavenumber_examples() {
        let k = Wavenumber::new(0.75).unwrap();
        assert!((effective_wavenumber(1.0, 2.0, k).unwrap() - 1.0606601717798212).abs() < 1e-12);
        assert_eq!(effective_wavenumber(3.0, 3.0, k).unwrap(), 0.75);
        let one = Wavenumber::new(1.0).unwrap();
        assert_eq!(effective_wavenumber(4.0, 1.0, one).unwrap(), 0.5);
        assert!(effective_wavenumber(0.0, 1.0, one).is_err());
        assert!(effective_wavenumber(1.0, -2.0, one).is_err());
    }

    #[test]
    fn truncation_rule_examples() {
        assert_eq!(ball(0.75).truncation_order(), 11);
        assert_eq!(ball(0.5).truncation_order(), 10);
        assert_eq!(ball(1.0).truncation_order(), 12);
    }

    #[test]
    fn near_field_order_grows_with_source_radius() {
        let m = ball(0.75);
        assert_eq!(m.near_field_order(0.0), 0);
        assert!(m.near_field_order(0.5) < m.near_field_order(1.0));
        assert_eq!(m.near_field_order(1.0), 57);
        assert_eq!(m.resolved_order(0.1), 11);
    }

    #[test]
    fn validation() {
        let k = Wavenumber::new(1.0).unwrap();
        assert!(LayeredMedium::new(1.5, vec![Shell::new(1.4, 1.0, 2.0)], k).is_err());
        assert!(LayeredMedium::new(
            1.5,
            vec![Shell::new(2.0, 1.0, 2.0), Shell::new(1.8, 1.0, 1.0)],
            k
        )
        .is_err());
        assert!(LayeredMedium::new(1.5, vec![Shell::new(2.0, 0.0, 2.0)], k).is_err());
        assert!(LayeredMedium::new(-1.0, vec![], k).is_err());
        assert!(ball(1.0).with_order(0).is_err());
        assert!(ball(1.0).with_order(201).is_err());
    }
}
