use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{LayeredCavityConfig, Region};
use crate::error::{Error, Result};
use crate::specialfun::{sph_bessel_table, Family, RadialTable};

/// Equilibrated mode systems with a larger condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Coefficients of one `(n, family)` mode, per unit outgoing incident amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    /// Regular scattered amplitude inside the cavity.
    pub reflection: Complex64,
    /// `(regular, outgoing)` amplitudes in each shell.
    pub shells: Vec<(Complex64, Complex64)>,
    /// Outgoing amplitude beyond the last shell.
    pub transmission: Complex64,
}

/// Solutions for every degree `1..=n_max`, indexed by `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub n_max: usize,
    pub te: Vec<ModeSolution>,
    pub tm: Vec<ModeSolution>,
}

impl ModeCoefficients {
    pub fn get(&self, family: Family, n: usize) -> &ModeSolution {
        match family {
            Family::Te => &self.te[n - 1],
            Family::Tm => &self.tm[n - 1],
        }
    }
}

/// Tangential traces of the regular and outgoing solutions of one region at one radius.
struct Traces {
    e_reg: Complex64,
    e_out: Complex64,
    h_reg: Complex64,
    h_out: Complex64,
}

fn traces(table: &RadialTable, region: &Region, family: Family, n: usize) -> Traces {
    let kl = region.wavenumber;
    let a = region.inv_permeability;
    let j = Complex64::new(table.j_values[n], 0.0);
    let h = Complex64::new(table.j_values[n], table.y_values[n]);
    let t = table.argument;
    let dpsi_j = Complex64::new(table.j_values[n] + t * table.j_derivs[n], 0.0);
    let dpsi_h = Complex64::new(
        table.j_values[n] + t * table.j_derivs[n],
        table.y_values[n] + t * table.y_derivs[n],
    );
    match family {
        // E_tan ~ z_n(kr), (A curl E)_tan ~ A psi'(kr) / r
        Family::Te => Traces {
            e_reg: j,
            e_out: h,
            h_reg: dpsi_j * a,
            h_out: dpsi_h * a,
        },
        // E_tan ~ psi'(kr) / (kr), (A curl E)_tan ~ A k z_n(kr)
        Family::Tm => Traces {
            e_reg: dpsi_j / kl,
            e_out: dpsi_h / kl,
            h_reg: j * (a * kl),
            h_out: h * (a * kl),
        },
    }
}

/// Radial tables for every (interface, side) pair: `[inner, outer]` per interface.
fn interface_tables(config: &LayeredCavityConfig) -> Result<Vec<[RadialTable; 2]>> {
    let regions = config.medium.regions();
    config
        .medium
        .interfaces()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            Ok([
                sph_bessel_table(config.n_max, regions[i].wavenumber * r)?,
                sph_bessel_table(config.n_max, regions[i + 1].wavenumber * r)?,
            ])
        })
        .collect()
}

fn solve_one(
    regions: &[Region],
    tables: &[[RadialTable; 2]],
    family: Family,
    n: usize,
) -> Result<ModeSolution> {
    let shells = regions.len() - 2;
    let size = 2 * shells + 2;
    let mut mat = DMatrix::<Complex64>::zeros(size, size);
    let mut rhs = DVector::<Complex64>::zeros(size);

    // column of (region, outgoing?) or None when the amplitude is fixed
    let column = |l: usize, outgoing: bool| -> Option<usize> {
        if l == 0 {
            (!outgoing).then_some(0)
        } else if l == shells + 1 {
            outgoing.then_some(size - 1)
        } else {
            Some(2 * l - 1 + usize::from(outgoing))
        }
    };

    for (i, pair) in tables.iter().enumerate() {
        for (side, l) in [(0usize, i), (1usize, i + 1)] {
            let sign = if side == 0 { 1.0 } else { -1.0 };
            let tr = traces(&pair[side], &regions[l], family, n);
            for (row, reg, out) in [(2 * i, tr.e_reg, tr.e_out), (2 * i + 1, tr.h_reg, tr.h_out)] {
                if let Some(c) = column(l, false) {
                    mat[(row, c)] += reg * sign;
                }
                match column(l, true) {
                    Some(c) => mat[(row, c)] += out * sign,
                    // unit incident amplitude in the cavity
                    None if l == 0 => rhs[row] -= out * sign,
                    None => {}
                }
            }
        }
    }

    // Equilibrate columns then rows; the raw system spans hundreds of decades at high n.
    let mut col_scale = vec![1.0; size];
    for (c, s) in col_scale.iter_mut().enumerate() {
        let m = mat.column(c).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if m > 0.0 && m.is_finite() {
            *s = 1.0 / m;
        }
        for r in 0..size {
            mat[(r, c)] *= *s;
        }
    }
    for r in 0..size {
        let m = mat.row(r).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if m > 0.0 && m.is_finite() {
            for c in 0..size {
                mat[(r, c)] /= m;
            }
            rhs[r] /= m;
        }
    }

    let sv = mat.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::DegenerateModes {
            degree: n,
            family: family.name(),
            condition,
        });
    }

    let sol = mat.lu().solve(&rhs).ok_or(Error::DegenerateModes {
        degree: n,
        family: family.name(),
        condition,
    })?;
    let x: Vec<Complex64> = sol.iter().zip(&col_scale).map(|(v, s)| v * *s).collect();
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        // well-posed system whose coefficients leave the f64 range (y_n / j_n at high n)
        let argument = tables
            .iter()
            .flat_map(|pair| pair.iter().map(|t| t.argument))
            .fold(f64::INFINITY, f64::min);
        return Err(Error::Overflow { order: n, argument });
    }
    Ok(ModeSolution {
        reflection: x[0],
        shells: (1..=shells).map(|l| (x[2 * l - 1], x[2 * l])).collect(),
        transmission: x[size - 1],
    })
}

/// Solves the transmission problem for every degree and both families.
///
/// Per degree the unknowns are the cavity reflection, a regular/outgoing pair
/// per shell and the exterior transmission; the equations are continuity of
/// tangential `E` and tangential `A curl E` at every interface.
pub fn solve_modes(config: &LayeredCavityConfig) -> Result<ModeCoefficients> {
    let regions = config.medium.regions();
    let tables = interface_tables(config)?;
    let mut te = Vec::with_capacity(config.n_max);
    let mut tm = Vec::with_capacity(config.n_max);
    for n in 1..=config.n_max {
        te.push(solve_one(&regions, &tables, Family::Te, n)?);
        tm.push(solve_one(&regions, &tables, Family::Tm, n)?);
    }
    Ok(ModeCoefficients {
        n_max: config.n_max,
        te,
        tm,
    })
}
