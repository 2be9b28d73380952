//! C ABI over the `nfem` library.
//!
//! Objects are opaque handles created by `nfem_*_new`/`nfem_data_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`NfemStatus`]; on failure the message is kept per thread and can be copied
//! out with [`nfem_last_error_message`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nalgebra::{DMatrix, Vector3};
use nfem::cli::RunConfig;
use nfem::green::Wavenumber;
use nfem::lsm::{
    indicator_at, run_imaging_with, svd_factorize, AlphaMode, ImagingOptions, SamplingGrid,
    SvdFactorization,
};
use nfem::measurement::{
    add_noise, assemble_from_config, read_nearfield, write_nearfield, NearFieldMatrix, SphereGrid,
};
use nfem::Error;
use num_complex::Complex64;

/// Result codes. Values 2, 3 and 5 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfemStatus {
    Ok = 0,
    /// Numerical failure (overflow, degenerate system, non-finite values).
    Failure = 1,
    Config = 2,
    DataFormat = 3,
    UnsupportedGeometry = 5,
    NullPointer = 6,
    InvalidArgument = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
    /// Output buffer too small; the required length was still written.
    BufferTooSmall = 10,
}

/// Near-field data set (matrix, measurement grid, wavenumber).
pub struct NfemData(NearFieldMatrix);

/// Factorized data ready for sampling.
pub struct NfemSolver {
    svd: SvdFactorization,
    grid: SphereGrid,
    k: Wavenumber,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NfemStatus {
    match err {
        Error::Config { .. } | Error::InvalidConfig(_) | Error::EmptyActiveSet => {
            NfemStatus::Config
        }
        Error::MalformedHeader(_)
        | Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::ChecksumMismatch { .. }
        | Error::WavenumberMismatch { .. } => NfemStatus::DataFormat,
        Error::UnsupportedGeometry(_) => NfemStatus::UnsupportedGeometry,
        Error::Io { .. } => NfemStatus::Io,
        Error::InvalidArgument(_)
        | Error::SamplingOnSurface { .. }
        | Error::SourceOutsideCavity { .. }
        | Error::SourceAtOrigin
        | Error::CoincidentPoints { .. }
        | Error::ZeroRhs => NfemStatus::InvalidArgument,
        _ => NfemStatus::Failure,
    }
}

struct Fail(NfemStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(NfemStatus::InvalidArgument, msg.to_string())
}

fn null(name: &str) -> Fail {
    Fail(NfemStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NfemStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NfemStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn vec3_arg(p: *const f64, name: &str) -> Result<Vector3<f64>, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vector3::new(s[0], s[1], s[2]))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out_arg<T>(p: *mut *mut T, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null("out"));
    }
    *p = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nfem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when no error was recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn nfem_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Reads an NFEM1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_read(
    path: *const c_char,
    out: *mut *mut NfemData,
) -> NfemStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        out_arg(out, NfemData(read_nearfield(&path)?))
    })
}

/// Writes `data` as an NFEM1 file.
///
/// # Safety
/// `data` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_write(data: *const NfemData, path: *const c_char) -> NfemStatus {
    guard(|| {
        let data = ref_arg(data, "data")?;
        let path = path_arg(path, "path")?;
        write_nearfield(&data.0, &path)?;
        Ok(())
    })
}

/// Synthesizes data for the concentric-sphere configuration in `config_path`.
/// Noise from the config is applied when `noisy` is nonzero.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_simulate(
    config_path: *const c_char,
    noisy: c_int,
    out: *mut *mut NfemData,
) -> NfemStatus {
    guard(|| {
        let cfg = RunConfig::from_file(&path_arg(config_path, "config_path")?)?;
        cfg.require_sphere()?;
        let clean = assemble_from_config(&cfg.cavity_config()?, &cfg.sphere_grid()?)?;
        let data = if noisy != 0 && cfg.measurement.noise_level > 0.0 {
            add_noise(&clean, &cfg.noise()?)
        } else {
            clean
        };
        out_arg(out, NfemData(data))
    })
}

/// Wraps externally computed data, e.g. from a finite-element solver.
///
/// `nodes` holds `n_nodes` records `(theta, phi, weight)`; `entries` holds the
/// `2 n_nodes x 2 n_nodes` matrix row-major as interleaved `(re, im)` pairs,
/// with rows and columns ordered `(node, tangent)` using the library's
/// `e_theta, e_phi` frame.
///
/// # Safety
/// `nodes` must hold `3 n_nodes` doubles and `entries` `8 n_nodes^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_from_raw(
    k: f64,
    radius: f64,
    n_nodes: usize,
    nodes: *const f64,
    entries: *const f64,
    out: *mut *mut NfemData,
) -> NfemStatus {
    guard(|| {
        if nodes.is_null() {
            return Err(null("nodes"));
        }
        if entries.is_null() {
            return Err(null("entries"));
        }
        if n_nodes == 0 {
            return Err(invalid("n_nodes must be positive"));
        }
        let records: Vec<(f64, f64, f64)> = std::slice::from_raw_parts(nodes, 3 * n_nodes)
            .chunks_exact(3)
            .map(|r| (r[0], r[1], r[2]))
            .collect();
        let grid = SphereGrid::from_nodes(radius, &records)?;
        let size = 2 * n_nodes;
        let raw = std::slice::from_raw_parts(entries, 2 * size * size);
        let matrix = DMatrix::from_fn(size, size, |r, c| {
            let i = 2 * (r * size + c);
            Complex64::new(raw[i], raw[i + 1])
        });
        let data = NearFieldMatrix::new(Wavenumber::new(k)?, grid, matrix, None)?;
        if !data.is_finite() {
            return Err(Fail(
                NfemStatus::Failure,
                "entries contain non-finite values".into(),
            ));
        }
        out_arg(out, NfemData(data))
    })
}

/// Number of measurement nodes, 0 for a null handle.
///
/// # Safety
/// `data` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_node_count(data: *const NfemData) -> usize {
    data.as_ref().map_or(0, |d| d.0.grid.len())
}

/// Wavenumber of the data, NaN for a null handle.
///
/// # Safety
/// `data` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_wavenumber(data: *const NfemData) -> f64 {
    data.as_ref().map_or(f64::NAN, |d| d.0.k.get())
}

/// `||S - S^T||_F / ||S||_F`, NaN for a null handle.
///
/// # Safety
/// `data` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_symmetry_defect(data: *const NfemData) -> f64 {
    data.as_ref().map_or(f64::NAN, |d| d.0.symmetry_defect())
}

/// # Safety
/// `data` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nfem_data_free(data: *mut NfemData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Factorizes `data`. The solver does not borrow `data`.
///
/// # Safety
/// `data` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nfem_solver_new(
    data: *const NfemData,
    out: *mut *mut NfemSolver,
) -> NfemStatus {
    guard(|| {
        let data = &ref_arg(data, "data")?.0;
        let svd = svd_factorize(data)?;
        out_arg(
            out,
            NfemSolver {
                svd,
                grid: data.grid.clone(),
                k: data.k,
            },
        )
    })
}

/// Largest singular value of the weighted matrix, NaN for a null handle.
///
/// # Safety
/// `solver` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nfem_solver_norm(solver: *const NfemSolver) -> f64 {
    solver.as_ref().map_or(f64::NAN, |s| s.svd.norm())
}

fn options(polarization: Vector3<f64>, noise_level: f64) -> Result<ImagingOptions, Fail> {
    let norm = polarization.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("polarization must be a finite nonzero vector"));
    }
    Ok(ImagingOptions {
        polarization: polarization / norm,
        noise_level,
        alpha: AlphaMode::Morozov,
        threads: 0,
    })
}

/// Unnormalized indicator `1 / ||g_z||` and the Morozov parameter at `z`.
///
/// # Safety
/// `z` and `polarization` must point to 3 doubles; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nfem_solver_indicator(
    solver: *const NfemSolver,
    z: *const f64,
    polarization: *const f64,
    noise_level: f64,
    out_indicator: *mut f64,
    out_alpha: *mut f64,
) -> NfemStatus {
    guard(|| {
        let s = ref_arg(solver, "solver")?;
        let opts = options(vec3_arg(polarization, "polarization")?, noise_level)?;
        let (value, _, choice) = indicator_at(&vec3_arg(z, "z")?, &s.svd, &s.grid, s.k, &opts)?;
        if let Some(o) = out_indicator.as_mut() {
            *o = value;
        }
        if let Some(o) = out_alpha.as_mut() {
            *o = choice.alpha;
        }
        Ok(())
    })
}

/// Normalized `log10 I` over the lattice `box_min..box_max` with the given
/// spacing, x fastest; masked points (`|z| <= mask_radius`) are 0.
///
/// The point count is always written to `out_len`. With `out_log10` null or
/// `capacity` too small nothing is computed and `BufferTooSmall` is returned,
/// so a first call with a null buffer queries the size.
///
/// # Safety
/// `box_min`, `box_max`, `polarization` must point to 3 doubles; `out_log10`
/// must be null or valid for `capacity` doubles; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nfem_solver_image(
    solver: *const NfemSolver,
    box_min: *const f64,
    box_max: *const f64,
    spacing: f64,
    mask_radius: f64,
    polarization: *const f64,
    noise_level: f64,
    out_log10: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> NfemStatus {
    guard(|| {
        let s = ref_arg(solver, "solver")?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let lo = vec3_arg(box_min, "box_min")?;
        let hi = vec3_arg(box_max, "box_max")?;
        let sampling = SamplingGrid::new(lo.into(), hi.into(), spacing, mask_radius)?;
        *out_len = sampling.len();
        if out_log10.is_null() || capacity < sampling.len() {
            return Err(Fail(
                NfemStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, {} needed", sampling.len()),
            ));
        }
        let opts = options(vec3_arg(polarization, "polarization")?, noise_level)?;
        let field = run_imaging_with(&s.svd, &s.grid, s.k, &sampling, &opts)?;
        std::slice::from_raw_parts_mut(out_log10, field.log_indicator.len())
            .copy_from_slice(&field.log_indicator);
        Ok(())
    })
}

/// # Safety
/// `solver` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nfem_solver_free(solver: *mut NfemSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}
