//! Measurement sphere, near-field matrix assembly, noise and the NFEM1 file format.

mod assemble;
pub mod format;
mod grid;
mod noise;

pub use assemble::{assemble_from_config, assemble_nearfield, pointwise_entry, NearFieldMatrix};
pub use format::{read_manifest, read_nearfield, write_manifest, write_nearfield};
pub use grid::{GridNode, SphereGrid};
pub use noise::{add_noise, NoiseSpec};
