use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::SphereGrid;
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, LayeredCavityConfig};
use crate::geometry::rdot;
use crate::green::Wavenumber;
use crate::linalg::{matmul, Op};
use crate::specialfun::{mode_count, Family, RadialKind, VswfTable};

/// Raw near-field samples on a sphere grid.
///
/// Row `(i, l)` sits at index `2 i + l` and column `(j, m)` at `2 j + m`
/// (node outer, tangent component inner). The entry is
///
/// ```text
/// S[(i,l),(j,m)] = e_l(x_i) . E^s(x_i; x_j, e_m(x_j))
/// ```
///
/// the tangential scattered field at node `i` due to a tangential dipole at
/// node `j`. Quadrature weights live in `grid` and are applied by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldMatrix {
    pub k: Wavenumber,
    pub grid: SphereGrid,
    pub entries: DMatrix<Complex64>,
    /// `None` for noiseless data.
    pub noise: Option<NoiseSpec>,
}

impl NearFieldMatrix {
    pub fn new(
        k: Wavenumber,
        grid: SphereGrid,
        entries: DMatrix<Complex64>,
        noise: Option<NoiseSpec>,
    ) -> Result<Self> {
        let size = 2 * grid.len();
        if entries.shape() != (size, size) {
            return Err(Error::DimensionMismatch {
                declared: grid.len(),
                found: entries.nrows() / 2,
            });
        }
        Ok(NearFieldMatrix {
            k,
            grid,
            entries,
            noise,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.is_some()
    }

    /// `||S - S^T||_F / ||S||_F`; zero for the zero matrix.
    pub fn symmetry_defect(&self) -> f64 {
        let norm = self.entries.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.entries - self.entries.transpose()).norm() / norm
    }

    /// `A = S diag(w)`, the discrete near-field operator.
    pub fn weighted(&self) -> DMatrix<Complex64> {
        let w = self.grid.component_weights();
        let mut a = self.entries.clone();
        for (c, wc) in w.iter().enumerate() {
            a.column_mut(c).scale_mut(*wc);
        }
        a
    }

    /// `diag(sqrt(w)) S diag(sqrt(w))`, the near-field operator in `L^2(Sigma)`
    /// coordinates. Its singular values approximate those of the continuous
    /// operator; those of [`weighted`](Self::weighted) do not, since they
    /// measure the data in the unweighted Euclidean norm.
    pub fn l2_operator(&self) -> DMatrix<Complex64> {
        let r: Vec<f64> = self
            .grid
            .component_weights()
            .iter()
            .map(|w| w.sqrt())
            .collect();
        DMatrix::from_fn(self.size(), self.size(), |i, j| {
            self.entries[(i, j)] * (r[i] * r[j])
        })
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Assembles the near-field matrix of `model` on `grid`.
///
/// Uses the separable form `S = B D B^H` with `B[(i,l), mode] = e_l(x_i) . F1_mode(x_i)`
/// and `D` the per-degree scattering weights; mathematically identical to
/// evaluating [`ForwardModel::scattered_field`] for every node pair.
pub fn assemble_nearfield(model: &ForwardModel, grid: &SphereGrid) -> Result<NearFieldMatrix> {
    let a = model.config().cavity_radius();
    if !(grid.radius < a) {
        return Err(Error::SourceOutsideCavity {
            radius: grid.radius,
            cavity_radius: a,
        });
    }
    let n_max = model.n_max();
    let modes = mode_count(n_max);
    let k = model.k();
    let n = grid.len();

    let rows: Vec<[Vec<Complex64>; 2]> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| {
            let table = VswfTable::new(n_max, k.get(), &node.position, RadialKind::Regular)
                .map_err(|e| Error::Assembly {
                    i,
                    j: i,
                    source: Box::new(e),
                })?;
            let mut out = [
                vec![Complex64::new(0.0, 0.0); 2 * modes],
                vec![Complex64::new(0.0, 0.0); 2 * modes],
            ];
            for (l, e) in [node.e1, node.e2].iter().enumerate() {
                for (f, fam) in [Family::Te, Family::Tm].into_iter().enumerate() {
                    for (idx, field) in table.fields(fam).iter().enumerate() {
                        out[l][f * modes + idx] = rdot(e, field);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut weights = vec![Complex64::new(0.0, 0.0); 2 * modes];
    for (f, fam) in [Family::Te, Family::Tm].into_iter().enumerate() {
        let mut idx = 0;
        for deg in 1..=n_max {
            let d = model.scattering_weight(fam, deg);
            for _ in 0..(2 * deg + 1) {
                weights[f * modes + idx] = d;
                idx += 1;
            }
        }
    }

    let b = DMatrix::from_fn(2 * n, 2 * modes, |r, c| rows[r / 2][r % 2][c]);
    let bd = DMatrix::from_fn(2 * n, 2 * modes, |r, c| b[(r, c)] * weights[c]);
    let entries = matmul(&bd, Op::None, &b, Op::Adjoint);
    let out = NearFieldMatrix::new(k, grid.clone(), entries, None)?;
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Builds the forward model for `config` and assembles its matrix.
pub fn assemble_from_config(
    config: &LayeredCavityConfig,
    grid: &SphereGrid,
) -> Result<NearFieldMatrix> {
    assemble_nearfield(&ForwardModel::new(config.clone())?, grid)
}

/// One entry evaluated directly from the scattered field; used for validation.
pub fn pointwise_entry(
    model: &ForwardModel,
    grid: &SphereGrid,
    row: usize,
    col: usize,
) -> Result<Complex64> {
    let (i, l) = (row / 2, row % 2);
    let (j, m) = (col / 2, col % 2);
    let x = grid.nodes[i].position;
    let y = grid.nodes[j].position;
    let e = model
        .scattered_field(&x, &y, grid.tangent(j, m))
        .map_err(|e| Error::Assembly {
            i,
            j,
            source: Box::new(e),
        })?;
    Ok(rdot(grid.tangent(i, l), &e))
}
