use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::rhs::{fill_rhs, rhs_vector};
use super::solve::{
    filtered, morozov_from_spectrum, tikhonov_solve, AlphaChoice, AlphaFlag, SvdFactorization,
    TikhonovSolution,
};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::green::Wavenumber;
use crate::linalg::{matmul, Op};
use crate::measurement::{NearFieldMatrix, SphereGrid};

/// Sampling points per work unit; fixed so results do not depend on threads.
pub const BLOCK_SIZE: usize = 256;

/// Relative slack on the mask radius absorbing lattice round-off.
const MASK_SLACK: f64 = 1e-9;

/// Axis-aligned lattice of sampling points with a spherical mask.
///
/// Points are ordered with `x` fastest, then `y`, then `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
    pub mask_radius: f64,
}

impl SamplingGrid {
    pub fn new(min: [f64; 3], max: [f64; 3], spacing: f64, mask_radius: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if !(mask_radius >= 0.0) || !mask_radius.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "mask radius must be >= 0, got {mask_radius}"
            )));
        }
        let mut dims = [0; 3];
        for a in 0..3 {
            if !(max[a] >= min[a]) || !min[a].is_finite() || !max[a].is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "box axis {a}: max {} must be >= min {}",
                    max[a], min[a]
                )));
            }
            dims[a] = ((max[a] - min[a]) / spacing + 1e-9).floor() as usize + 1;
        }
        Ok(SamplingGrid {
            min,
            max,
            spacing,
            dims,
            mask_radius,
        })
    }

    /// Cube `[-half, half]^3`.
    pub fn cube(half: f64, spacing: f64, mask_radius: f64) -> Result<Self> {
        Self::new([-half; 3], [half; 3], spacing, mask_radius)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of lattice index `i` along `axis`. When the spacing divides
    /// the box, the endpoints are hit exactly.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let d = self.dims[axis];
        let span = self.max[axis] - self.min[axis];
        if d > 1 && ((span / self.spacing) - (d - 1) as f64).abs() < 1e-9 {
            self.min[axis] + span * (i as f64 / (d - 1) as f64)
        } else {
            self.min[axis] + i as f64 * self.spacing
        }
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * iz)
    }

    pub fn point(&self, idx: usize) -> Point {
        let ix = idx % self.dims[0];
        let iy = (idx / self.dims[0]) % self.dims[1];
        let iz = idx / (self.dims[0] * self.dims[1]);
        Vector3::new(
            self.coordinate(0, ix),
            self.coordinate(1, iy),
            self.coordinate(2, iz),
        )
    }

    pub fn is_masked(&self, z: &Point) -> bool {
        z.norm() <= self.mask_radius * (1.0 + MASK_SLACK)
    }

    /// Lattice index closest to zero along `axis`.
    pub fn origin_index(&self, axis: usize) -> usize {
        (0..self.dims[axis])
            .min_by(|&a, &b| {
                self.coordinate(axis, a)
                    .abs()
                    .total_cmp(&self.coordinate(axis, b).abs())
            })
            .unwrap_or(0)
    }
}

/// How the regularization parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Morozov,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingOptions {
    pub polarization: Point,
    /// Noise level `h` used by the discrepancy principle.
    pub noise_level: f64,
    pub alpha: AlphaMode,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl Default for ImagingOptions {
    fn default() -> Self {
        ImagingOptions {
            polarization: Vector3::new(1.0, -1.0, 1.0) / 3f64.sqrt(),
            noise_level: 0.02,
            alpha: AlphaMode::Morozov,
            threads: 0,
        }
    }
}

/// Normalized indicator over a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingField {
    pub grid: SamplingGrid,
    pub masked: Vec<bool>,
    /// `1 / g_norm_discrete`, zero on masked points.
    pub raw: Vec<f64>,
    /// Normalized so that the maximum over active points is 1; 1 on masked points.
    pub indicator: Vec<f64>,
    /// `log10` of the indicator; 0 on masked points.
    pub log_indicator: Vec<f64>,
    /// Regularization parameter per point, zero on masked points.
    pub alpha: Vec<f64>,
    /// Active points whose alpha was a flagged bracket endpoint.
    pub flagged: usize,
}

impl ImagingField {
    pub fn active_count(&self) -> usize {
        self.masked.iter().filter(|m| !**m).count()
    }

    /// `(min, max)` of `log10 I` over active points.
    pub fn log_range(&self) -> (f64, f64) {
        self.log_indicator
            .iter()
            .zip(&self.masked)
            .filter(|(_, m)| !**m)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| {
                (lo.min(*v), hi.max(*v))
            })
    }
}

fn choose_alpha(
    sigma: &[f64],
    beta: &[Complex64],
    b_norm: f64,
    opts: &ImagingOptions,
) -> Result<AlphaChoice> {
    match opts.alpha {
        AlphaMode::Morozov => morozov_from_spectrum(sigma, beta, b_norm, opts.noise_level),
        AlphaMode::Fixed(alpha) => {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "fixed alpha must be positive, got {alpha}"
                )));
            }
            Ok(AlphaChoice {
                alpha,
                flag: None,
                discrepancy_value: f64::NAN,
                iterations: 0,
            })
        }
    }
}

/// Unnormalized indicator `1 / g_norm_discrete` at one point and its solution.
pub fn indicator_at(
    z: &Point,
    svd: &SvdFactorization,
    grid: &SphereGrid,
    k: Wavenumber,
    opts: &ImagingOptions,
) -> Result<(f64, TikhonovSolution, AlphaChoice)> {
    let b = rhs_vector(z, &opts.polarization, grid, k)?;
    let b_norm = b.norm();
    if !(b_norm > 0.0) {
        return Err(Error::ZeroRhs);
    }
    let beta = svd.project(&b);
    let choice = choose_alpha(&svd.singular_values, beta.as_slice(), b_norm, opts)?;
    let sol = tikhonov_solve(svd, &b, choice.alpha)?;
    Ok((1.0 / sol.g_norm_discrete, sol, choice))
}

/// Per-point results of one block: `(raw, alpha, flagged)`.
fn solve_block(
    points: &[Point],
    svd: &SvdFactorization,
    grid: &SphereGrid,
    k: Wavenumber,
    opts: &ImagingOptions,
) -> Result<Vec<(f64, f64, bool)>> {
    let size = 2 * grid.len();
    let nb = points.len();
    let mut rhs = DMatrix::<Complex64>::zeros(size, nb);
    for (c, z) in points.iter().enumerate() {
        fill_rhs(
            z,
            &opts.polarization,
            grid,
            k,
            rhs.column_mut(c).as_mut_slice(),
        )?;
    }
    let beta = matmul(&svd.u, Op::Adjoint, &rhs, Op::None);
    let sigma = &svd.singular_values;
    let mut coeffs = DMatrix::<Complex64>::zeros(sigma.len(), nb);
    let mut meta = Vec::with_capacity(nb);
    for c in 0..nb {
        let b_norm = rhs.column(c).norm();
        if !(b_norm > 0.0) {
            return Err(Error::ZeroRhs);
        }
        let beta_c = beta.column(c);
        let choice = choose_alpha(sigma, beta_c.as_slice(), b_norm, opts)?;
        let f = filtered(sigma, beta_c.as_slice(), choice.alpha);
        coeffs.column_mut(c).copy_from_slice(&f);
        let flagged = !matches!(choice.flag, None | Some(AlphaFlag::NoNoise));
        meta.push((choice.alpha, flagged));
    }
    let gw = matmul(&svd.weighted_v, Op::None, &coeffs, Op::None);
    Ok((0..nb)
        .map(|c| {
            let norm = gw.column(c).norm();
            (1.0 / norm, meta[c].0, meta[c].1)
        })
        .collect())
}

/// Indicator over `sampling` from a precomputed factorization.
pub fn run_imaging_with(
    svd: &SvdFactorization,
    grid: &SphereGrid,
    k: Wavenumber,
    sampling: &SamplingGrid,
    opts: &ImagingOptions,
) -> Result<ImagingField> {
    let total = sampling.len();
    let masked: Vec<bool> = (0..total)
        .map(|i| sampling.is_masked(&sampling.point(i)))
        .collect();
    let active: Vec<usize> = (0..total).filter(|&i| !masked[i]).collect();
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }

    let work = || -> Result<Vec<Vec<(f64, f64, bool)>>> {
        active
            .par_chunks(BLOCK_SIZE)
            .map(|chunk| {
                let pts: Vec<Point> = chunk.iter().map(|&i| sampling.point(i)).collect();
                solve_block(&pts, svd, grid, k, opts)
            })
            .collect()
    };
    let blocks = if opts.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?
    } else {
        work()?
    };

    let mut raw = vec![0.0; total];
    let mut alpha = vec![0.0; total];
    let mut flagged = 0;
    for (&idx, &(r, a, f)) in active.iter().zip(blocks.iter().flatten()) {
        if !r.is_finite() {
            return Err(Error::NonFinite);
        }
        raw[idx] = r;
        alpha[idx] = a;
        flagged += usize::from(f);
    }
    let peak = active.iter().map(|&i| raw[i]).fold(0.0f64, f64::max);
    let mut indicator = vec![1.0; total];
    let mut log_indicator = vec![0.0; total];
    for &i in &active {
        indicator[i] = raw[i] / peak;
        log_indicator[i] = indicator[i].log10();
    }
    Ok(ImagingField {
        grid: sampling.clone(),
        masked,
        raw,
        indicator,
        log_indicator,
        alpha,
        flagged,
    })
}

/// Factorizes `data` and images `sampling`.
pub fn run_imaging(
    data: &NearFieldMatrix,
    sampling: &SamplingGrid,
    opts: &ImagingOptions,
) -> Result<ImagingField> {
    let svd = super::solve::svd_factorize(data)?;
    run_imaging_with(&svd, &data.grid, data.k, sampling, opts)
}

/// Linear-interpolation percentile, `p` in `[0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (p / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Radial bands used to compare the indicator inside and outside the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellBands {
    pub inside: (f64, f64),
    pub outside: (f64, f64),
}

impl Default for ShellBands {
    fn default() -> Self {
        ShellBands {
            inside: (1.15, 1.35),
            outside: (1.7, 2.2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSeparation {
    /// 90th percentile of `log10 I` in the inside band.
    pub inside_p90: f64,
    /// 10th percentile of `log10 I` in the outside band.
    pub outside_p10: f64,
    pub inside_count: usize,
    pub outside_count: usize,
}

impl ShellSeparation {
    /// `outside_p10 - inside_p90` in decades; positive when the bands separate.
    pub fn gap(&self) -> f64 {
        self.outside_p10 - self.inside_p90
    }

    pub fn separated(&self) -> bool {
        self.inside_p90 < self.outside_p10
    }
}

pub fn shell_separation(field: &ImagingField, bands: &ShellBands) -> Option<ShellSeparation> {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for i in 0..field.grid.len() {
        if field.masked[i] {
            continue;
        }
        let r = field.grid.point(i).norm();
        if r >= bands.inside.0 && r <= bands.inside.1 {
            inside.push(field.log_indicator[i]);
        } else if r >= bands.outside.0 && r <= bands.outside.1 {
            outside.push(field.log_indicator[i]);
        }
    }
    Some(ShellSeparation {
        inside_p90: percentile(&inside, 90.0)?,
        outside_p10: percentile(&outside, 10.0)?,
        inside_count: inside.len(),
        outside_count: outside.len(),
    })
}

/// `sqrt(sum_j w_j |g_j|^2)` for a density in the `(node, component)` layout.
pub fn weighted_norm(g: &DVector<Complex64>, grid: &SphereGrid) -> f64 {
    g.iter()
        .zip(grid.component_weights())
        .map(|(v, w)| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout() {
        let g = SamplingGrid::cube(3.0, 0.1, 1.0).unwrap();
        assert_eq!(g.dims, [61, 61, 61]);
        assert_eq!(g.point(0), Vector3::new(-3.0, -3.0, -3.0));
        assert_eq!(g.point(g.len() - 1), Vector3::new(3.0, 3.0, 3.0));
        assert_eq!(g.point(1).x, g.coordinate(0, 1));
        assert_eq!(g.point(61).y, g.coordinate(1, 1));
        let o = g.index(g.origin_index(0), g.origin_index(1), g.origin_index(2));
        assert_eq!(g.point(o), Vector3::zeros());
        assert!(g.is_masked(&g.point(g.index(40, 30, 30))));
        assert!(!g.is_masked(&g.point(g.index(41, 30, 30))));
    }

    #[test]
    fn lattice_validation() {
        assert!(SamplingGrid::cube(3.0, 0.0, 1.0).is_err());
        assert!(SamplingGrid::new([0.0; 3], [-1.0, 1.0, 1.0], 0.1, 0.0).is_err());
        assert!(SamplingGrid::cube(3.0, 0.1, -1.0).is_err());
    }

    #[test]
    fn percentiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(percentile(&v, 0.0), Some(1.0));
        assert_eq!(percentile(&v, 100.0), Some(4.0));
        assert!((percentile(&v, 90.0).unwrap() - 3.7).abs() < 1e-15);
        assert_eq!(percentile(&[], 50.0), None);
    }
}
