use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{complexify, rdot, CVector, Point};
use crate::green::{green_tensor, Wavenumber};
use crate::measurement::SphereGrid;

/// Sampling points within this distance of the sphere are rejected.
pub const SURFACE_TOLERANCE: f64 = 1e-9;

fn check_off_surface(z: &Point, grid: &SphereGrid) -> Result<()> {
    let r = z.norm();
    if (r - grid.radius).abs() <= SURFACE_TOLERANCE {
        return Err(Error::SamplingOnSurface { radius: r });
    }
    Ok(())
}

/// Writes `b[2 i + l] = e_l(x_i) . G(x_i, z) h` into `out`.
pub(crate) fn fill_rhs(
    z: &Point,
    h: &Point,
    grid: &SphereGrid,
    k: Wavenumber,
    out: &mut [Complex64],
) -> Result<()> {
    check_off_surface(z, grid)?;
    let hc = complexify(h);
    for (i, node) in grid.nodes.iter().enumerate() {
        let gh = green_tensor(&node.position, z, k)? * hc;
        out[2 * i] = rdot(&node.e1, &gh);
        out[2 * i + 1] = rdot(&node.e2, &gh);
    }
    Ok(())
}

/// Tangential components of the dipole field `G(., z) h` on the sphere.
pub fn rhs_vector(
    z: &Point,
    h: &Point,
    grid: &SphereGrid,
    k: Wavenumber,
) -> Result<DVector<Complex64>> {
    let mut b = DVector::zeros(2 * grid.len());
    fill_rhs(z, h, grid, k, b.as_mut_slice())?;
    Ok(b)
}

/// Quadrature of the electric single layer `sum_j w_j G(x, y_j) g(y_j)`.
pub fn single_layer_eval(
    g: &DVector<Complex64>,
    x: &Point,
    grid: &SphereGrid,
    k: Wavenumber,
) -> Result<CVector> {
    if g.len() != 2 * grid.len() {
        return Err(Error::DimensionMismatch {
            declared: grid.len(),
            found: g.len() / 2,
        });
    }
    check_off_surface(x, grid)?;
    let mut out = CVector::zeros();
    for (j, node) in grid.nodes.iter().enumerate() {
        let density = complexify(&node.e1) * g[2 * j] + complexify(&node.e2) * g[2 * j + 1];
        out += green_tensor(x, &node.position, k)? * density * Complex64::new(node.weight, 0.0);
    }
    Ok(out)
}
