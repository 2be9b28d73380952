use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::assemble::NearFieldMatrix;
use crate::error::{Error, Result};

/// Relative complex Gaussian noise level and generator seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise level must be >= 0, got {level}"
            )));
        }
        Ok(NoiseSpec { level, seed })
    }
}

/// Multiplies each entry by `1 + h (z1 + i z2) / sqrt(2)` with standard normal
/// `z1, z2` drawn in row-major order from a ChaCha8 stream seeded by `spec.seed`.
///
/// `h = 0` returns the input unchanged.
pub fn add_noise(matrix: &NearFieldMatrix, spec: &NoiseSpec) -> NearFieldMatrix {
    let mut out = matrix.clone();
    if spec.level == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale = spec.level * FRAC_1_SQRT_2;
    let (rows, cols) = out.entries.shape();
    for r in 0..rows {
        for c in 0..cols {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            out.entries[(r, c)] *= Complex64::new(1.0 + scale * z1, scale * z2);
        }
    }
    out.noise = Some(*spec);
    out
}
