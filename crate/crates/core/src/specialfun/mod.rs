//! Special functions: spherical Bessel/Hankel, Riccati-Bessel, associated
//! Legendre and vector spherical wavefunctions. Real arguments only.

pub mod bessel;
pub mod legendre;
pub mod vswf;

pub use bessel::{
    riccati, sph_bessel_j, sph_bessel_table, sph_hankel1, RadialKind, RadialTable, MAX_ORDER,
};
pub use legendre::{assoc_legendre, AngularTable};
pub use vswf::{mode_count, mode_index, modes, vswf_eval, Family, VswfTable, VswfValue};
