use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::NearFieldMatrix;

/// Root-finder iteration cap.
pub const MAX_ROOT_STEPS: usize = 200;
/// Lower end of the search bracket relative to `sigma_1^2`.
pub const BRACKET_FLOOR: f64 = 1e-14;
/// The root is accepted when `|d(alpha)| <= ROOT_TOLERANCE * ||b||`.
pub const ROOT_TOLERANCE: f64 = 1e-8;

/// Full SVD `A = U diag(sigma) V^H` of the weighted matrix `A = S diag(w)`.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    /// Sorted descending.
    pub singular_values: Vec<f64>,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
    /// Quadrature weight of each unknown, length `2n`.
    pub weights: Vec<f64>,
    /// The factored matrix.
    pub matrix: DMatrix<Complex64>,
    /// `diag(sqrt(w)) V`, maps spectral coefficients to weighted unknowns.
    pub(crate) weighted_v: DMatrix<Complex64>,
}

impl SvdFactorization {
    /// Factorizes `matrix` with column weights `weights`.
    pub fn new(matrix: DMatrix<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if matrix.ncols() != weights.len() {
            return Err(Error::DimensionMismatch {
                declared: weights.len(),
                found: matrix.ncols(),
            });
        }
        if matrix
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let svd = matrix.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V^H").adjoint();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
        let v = DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
        let weighted_v =
            DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * weights[r].sqrt());
        Ok(SvdFactorization {
            singular_values,
            u,
            v,
            weights,
            matrix,
            weighted_v,
        })
    }

    /// `||A||_2 = sigma_1`.
    pub fn norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn size(&self) -> usize {
        self.matrix.ncols()
    }

    /// `||U diag(sigma) V^H - A||_F / ||A||_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let s = DMatrix::from_fn(self.u.ncols(), self.v.ncols(), |r, c| {
            if r == c {
                Complex64::new(self.singular_values[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rebuilt = &self.u * s * self.v.adjoint();
        let norm = self.matrix.norm();
        if norm == 0.0 {
            rebuilt.norm()
        } else {
            (rebuilt - &self.matrix).norm() / norm
        }
    }

    /// Spectral coefficients `U^H b`.
    pub fn project(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        self.u.adjoint() * b
    }
}

/// SVD of the weighted near-field matrix.
pub fn svd_factorize(matrix: &NearFieldMatrix) -> Result<SvdFactorization> {
    if !matrix.is_finite() {
        return Err(Error::NonFinite);
    }
    SvdFactorization::new(matrix.weighted(), matrix.grid.component_weights())
}

/// Regularized density and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSolution {
    /// `g[2 j + m]` is the `e_m` component at node `j`.
    pub g: DVector<Complex64>,
    pub alpha: f64,
    /// `||A g - b||_2`.
    pub discrepancy: f64,
    /// `sqrt(sum_j w_j |g_j|^2)`.
    pub g_norm_discrete: f64,
}

/// Residual and solution norm of the Tikhonov solution in the spectral basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralState {
    pub residual: f64,
    pub g_norm: f64,
}

/// `(||A g_alpha - b||, ||g_alpha||)` from `beta = U^H b` in `O(n)`.
pub fn spectral_state(sigma: &[f64], beta: &[Complex64], alpha: f64) -> SpectralState {
    let mut res2 = 0.0;
    let mut g2 = 0.0;
    for (s, b) in sigma.iter().zip(beta) {
        let d = s * s + alpha;
        let b2 = b.norm_sqr();
        let r = alpha / d;
        let f = s / d;
        res2 += r * r * b2;
        g2 += f * f * b2;
    }
    SpectralState {
        residual: res2.sqrt(),
        g_norm: g2.sqrt(),
    }
}

/// Filter factors applied to `beta`: `c_i = sigma_i / (sigma_i^2 + alpha) beta_i`.
pub fn filtered(sigma: &[f64], beta: &[Complex64], alpha: f64) -> Vec<Complex64> {
    sigma
        .iter()
        .zip(beta)
        .map(|(s, b)| b * (s / (s * s + alpha)))
        .collect()
}

/// `g = sum_i sigma_i / (sigma_i^2 + alpha) (u_i^H b) v_i`.
pub fn tikhonov_solve(
    svd: &SvdFactorization,
    b: &DVector<Complex64>,
    alpha: f64,
) -> Result<TikhonovSolution> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if b.len() != svd.u.nrows() {
        return Err(Error::DimensionMismatch {
            declared: svd.u.nrows(),
            found: b.len(),
        });
    }
    let beta = svd.project(b);
    let state = spectral_state(&svd.singular_values, beta.as_slice(), alpha);
    let c = DVector::from_vec(filtered(&svd.singular_values, beta.as_slice(), alpha));
    let g = &svd.v * &c;
    let g_norm_discrete = (&svd.weighted_v * &c).norm();
    Ok(TikhonovSolution {
        g,
        alpha,
        discrepancy: state.residual,
        g_norm_discrete,
    })
}

/// `||(A^H A + alpha I) g - A^H b|| / ||A^H b||`.
pub fn normal_equation_residual(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    sol: &TikhonovSolution,
) -> f64 {
    let ah = a.adjoint();
    let rhs = &ah * b;
    let lhs = &ah * (a * &sol.g) + &sol.g * Complex64::new(sol.alpha, 0.0);
    let scale = rhs.norm();
    if scale == 0.0 {
        lhs.norm()
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// Why a returned alpha is not a root of the discrepancy function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaFlag {
    /// `h = 0`; the lower bracket end is returned.
    NoNoise,
    /// `d > 0` on the whole bracket; the lower end is returned.
    RootBelowBracket,
    /// `d < 0` on the whole bracket; the upper end is returned.
    RootAboveBracket,
    /// The iteration cap was hit before the tolerance.
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub flag: Option<AlphaFlag>,
    /// `d(alpha)` at the returned value.
    pub discrepancy_value: f64,
    pub iterations: usize,
}

/// `d(alpha) = ||A g_alpha - b|| - h ||A||_2 ||g_alpha||`, nondecreasing in alpha.
pub fn discrepancy_function(sigma: &[f64], beta: &[Complex64], h: f64, alpha: f64) -> f64 {
    let s = spectral_state(sigma, beta, alpha);
    s.residual - h * sigma.first().copied().unwrap_or(0.0) * s.g_norm
}

/// Morozov root from precomputed `beta = U^H b`.
pub fn morozov_from_spectrum(
    sigma: &[f64],
    beta: &[Complex64],
    b_norm: f64,
    h: f64,
) -> Result<AlphaChoice> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be >= 0, got {h}"
        )));
    }
    if !(b_norm > 0.0) {
        return Err(Error::ZeroRhs);
    }
    let s1 = sigma.first().copied().unwrap_or(0.0);
    if !(s1 > 0.0) {
        return Err(Error::InvalidArgument(
            "operator is identically zero".into(),
        ));
    }
    let lo_alpha = BRACKET_FLOOR * s1 * s1;
    let hi_alpha = s1 * s1;
    let f = |x: f64| discrepancy_function(sigma, beta, h, x.exp());
    let flagged = |alpha: f64, flag| AlphaChoice {
        alpha,
        flag: Some(flag),
        discrepancy_value: discrepancy_function(sigma, beta, h, alpha),
        iterations: 0,
    };
    if h == 0.0 {
        return Ok(flagged(lo_alpha, AlphaFlag::NoNoise));
    }
    let (mut a, mut b) = (lo_alpha.ln(), hi_alpha.ln());
    let (mut fa, mut fb) = (f(a), f(b));
    if fa >= 0.0 {
        return Ok(flagged(lo_alpha, AlphaFlag::RootBelowBracket));
    }
    if fb <= 0.0 {
        return Ok(flagged(hi_alpha, AlphaFlag::RootAboveBracket));
    }
    let tol = ROOT_TOLERANCE * b_norm;
    // Illinois variant of regula falsi on log(alpha)
    let mut side = 0i8;
    for it in 1..=MAX_ROOT_STEPS {
        let x = (a * fb - b * fa) / (fb - fa);
        let x = if x.is_finite() && x > a && x < b {
            x
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx.abs() <= tol || (b - a) <= 1e-15 * a.abs().max(1.0) {
            return Ok(AlphaChoice {
                alpha: x.exp(),
                flag: None,
                discrepancy_value: fx,
                iterations: it,
            });
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let x = 0.5 * (a + b);
    Ok(AlphaChoice {
        alpha: x.exp(),
        flag: Some(AlphaFlag::NotConverged),
        discrepancy_value: f(x),
        iterations: MAX_ROOT_STEPS,
    })
}

/// Morozov discrepancy principle for right-hand side `b` and noise level `h`.
pub fn morozov_alpha(
    svd: &SvdFactorization,
    b: &DVector<Complex64>,
    h: f64,
) -> Result<AlphaChoice> {
    let beta = svd.project(b);
    morozov_from_spectrum(&svd.singular_values, beta.as_slice(), b.norm(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn random_vector(n: usize, seed: u64) -> DVector<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    /// Matrix with singular values decaying geometrically, like a smoothing operator.
    fn smoothing_matrix(n: usize, seed: u64) -> DMatrix<Complex64> {
        let q1 = random_matrix(n, seed).qr().q();
        let q2 = random_matrix(n, seed + 1).qr().q();
        let d = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(0.5f64.powi(r as i32), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        q1 * d * q2.adjoint()
    }

    #[test]
    fn zero_and_diagonal_matrices() {
        let z = SvdFactorization::new(DMatrix::zeros(4, 4), vec![1.0; 4]).unwrap();
        assert!(z.singular_values.iter().all(|&s| s == 0.0));
        let d = DMatrix::from_fn(4, 4, |r, c| {
            if r == c {
                Complex64::new([0.5, -3.0, 0.0, 2.0][r], [0.0, 0.0, 1.0, 0.0][r])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let svd = SvdFactorization::new(d, vec![1.0; 4]).unwrap();
        let expect = [3.0, 2.0, 1.0, 0.5];
        for (s, e) in svd.singular_values.iter().zip(expect) {
            assert!((s - e).abs() < 1e-14);
        }
        assert!(svd.reconstruction_error() < 1e-14);
    }

    #[test]
    fn small_alpha_matches_least_squares() {
        let a = random_matrix(8, 5);
        let b = random_vector(8, 6);
        let svd = SvdFactorization::new(a.clone(), vec![1.0; 8]).unwrap();
        let sol = tikhonov_solve(&svd, &b, 1e-14 * svd.norm().powi(2)).unwrap();
        let direct = a.lu().solve(&b).unwrap();
        assert!((&sol.g - &direct).norm() <= 1e-6 * direct.norm());
    }

    #[test]
    fn large_alpha_kills_solution() {
        let a = random_matrix(6, 1);
        let b = random_vector(6, 2);
        let svd = SvdFactorization::new(a, vec![1.0; 6]).unwrap();
        let alpha = 1e6 * svd.norm().powi(2);
        let sol = tikhonov_solve(&svd, &b, alpha).unwrap();
        assert!(sol.g.norm() <= b.norm() * svd.norm() / alpha);
    }

    #[test]
    fn normal_equations_and_discrepancy() {
        let a = smoothing_matrix(20, 3);
        let b = random_vector(20, 4);
        let w: Vec<f64> = (0..20).map(|i| 0.1 + 0.01 * i as f64).collect();
        let svd = SvdFactorization::new(a.clone(), w.clone()).unwrap();
        for alpha in [1e-12, 1e-6, 1e-2, 1.0] {
            let sol = tikhonov_solve(&svd, &b, alpha).unwrap();
            assert!(normal_equation_residual(&a, &b, &sol) <= 1e-10);
            let direct = (&a * &sol.g - &b).norm();
            assert!((direct - sol.discrepancy).abs() <= 1e-12 * b.norm());
            let gw: f64 = sol
                .g
                .iter()
                .zip(&w)
                .map(|(g, w)| w * g.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((gw - sol.g_norm_discrete).abs() <= 1e-12 * gw);
        }
    }

    #[test]
    fn morozov_root_and_flags() {
        let a = smoothing_matrix(24, 7);
        let b = random_vector(24, 8);
        let svd = SvdFactorization::new(a, vec![1.0; 24]).unwrap();
        let choice = morozov_alpha(&svd, &b, 0.02).unwrap();
        assert_eq!(choice.flag, None);
        assert!(choice.discrepancy_value.abs() <= 1e-6 * b.norm());

        let none = morozov_alpha(&svd, &b, 0.0).unwrap();
        assert_eq!(none.flag, Some(AlphaFlag::NoNoise));
        assert_eq!(none.alpha, BRACKET_FLOOR * svd.norm().powi(2));

        let huge = morozov_alpha(&svd, &b, 1e6).unwrap();
        assert_eq!(huge.flag, Some(AlphaFlag::RootAboveBracket));

        assert!(matches!(
            morozov_alpha(&svd, &DVector::zeros(24), 0.02),
            Err(Error::ZeroRhs)
        ));
    }

    #[test]
    fn discrepancy_is_monotone() {
        let a = smoothing_matrix(16, 11);
        let b = random_vector(16, 12);
        let svd = SvdFactorization::new(a, vec![1.0; 16]).unwrap();
        let beta = svd.project(&b);
        let s1 = svd.norm();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..40 {
            let alpha = s1 * s1 * 10f64.powf(-14.0 + 14.0 * i as f64 / 39.0);
            let d = discrepancy_function(&svd.singular_values, beta.as_slice(), 0.05, alpha);
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn morozov_is_scale_consistent() {
        let a = smoothing_matrix(16, 21);
        let b = random_vector(16, 22);
        let svd = SvdFactorization::new(a, vec![1.0; 16]).unwrap();
        let c1 = morozov_alpha(&svd, &b, 0.02).unwrap();
        let c10 = morozov_alpha(&svd, &(&b * Complex64::new(10.0, 0.0)), 0.02).unwrap();
        assert!((c1.alpha - c10.alpha).abs() <= 1e-6 * c1.alpha);
        let g1 = tikhonov_solve(&svd, &b, c1.alpha).unwrap();
        let g10 = tikhonov_solve(&svd, &(&b * Complex64::new(10.0, 0.0)), c1.alpha).unwrap();
        assert!(
            (g10.g_norm_discrete - 10.0 * g1.g_norm_discrete).abs() <= 1e-12 * g10.g_norm_discrete
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let svd = SvdFactorization::new(random_matrix(4, 1), vec![1.0; 4]).unwrap();
        assert!(tikhonov_solve(&svd, &random_vector(4, 2), 0.0).is_err());
        assert!(tikhonov_solve(&svd, &random_vector(3, 2), 1.0).is_err());
        let mut bad = random_matrix(4, 1);
        bad[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            SvdFactorization::new(bad, vec![1.0; 4]),
            Err(Error::NonFinite)
        ));
    }
}
