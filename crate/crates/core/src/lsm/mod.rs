//! Linear sampling: right-hand sides `G(., z) h` on the measurement sphere,
//! SVD-based Tikhonov solves with the discrepancy principle, and the imaging
//! function `I(z) = (1/||g_z||) / max_z (1/||g_z||)` over a sampling lattice.

mod imaging;
mod rhs;
mod solve;

pub use imaging::{
    indicator_at, percentile, run_imaging, run_imaging_with, shell_separation, weighted_norm,
    AlphaMode, ImagingField, ImagingOptions, SamplingGrid, ShellBands, ShellSeparation, BLOCK_SIZE,
};
pub use rhs::{rhs_vector, single_layer_eval, SURFACE_TOLERANCE};
pub use solve::{
    discrepancy_function, filtered, morozov_alpha, morozov_from_spectrum, normal_equation_residual,
    spectral_state, svd_factorize, tikhonov_solve, AlphaChoice, AlphaFlag, SpectralState,
    SvdFactorization, TikhonovSolution, BRACKET_FLOOR, MAX_ROOT_STEPS, ROOT_TOLERANCE,
};
