use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Vector3;

use super::config::RunConfig;
use super::output::{write_imaging, WrittenFiles};
use crate::error::{Error, Result};
use crate::forward::{maxwell_eigenvalue_margin, ForwardModel, EIGENVALUE_MARGIN_THRESHOLD};
use crate::geometry::{complexify, Point};
use crate::green::green_tensor;
use crate::lsm::{
    indicator_at, run_imaging_with, shell_separation, single_layer_eval, svd_factorize, AlphaFlag,
    ImagingField, ImagingOptions, ShellBands, ShellSeparation,
};
use crate::measurement::format::manifest_path;
use crate::measurement::{
    add_noise, assemble_nearfield, read_nearfield, write_manifest, write_nearfield,
    NearFieldMatrix, SphereGrid,
};
use crate::specialfun::MAX_ORDER;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA_FORMAT: i32 = 3;
pub const EXIT_SELFCHECK: i32 = 4;
pub const EXIT_UNSUPPORTED_GEOMETRY: i32 = 5;

pub const RECIPROCITY_TOLERANCE: f64 = 1e-8;
pub const INTERFACE_TOLERANCE: f64 = 1e-6;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
pub const INTERFACE_SAMPLES: usize = 20;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidConfig(_) | Error::EmptyActiveSet => EXIT_CONFIG,
        Error::MalformedHeader(_)
        | Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::ChecksumMismatch { .. }
        | Error::WavenumberMismatch { .. } => EXIT_DATA_FORMAT,
        Error::UnsupportedGeometry(_) => EXIT_UNSUPPORTED_GEOMETRY,
        _ => EXIT_FAILURE,
    }
}

fn emit(out: &mut dyn Write, text: fmt::Arguments) -> Result<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| Error::io("<stdout>", e))
}

fn load(config: &Path, out_dir: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_file(config)?;
    if let Some(dir) = out_dir {
        cfg.output.dir = dir.to_path_buf();
    }
    Ok(cfg)
}

/// Dipole used by the interface diagnostics: on the measurement sphere,
/// the farthest point the data ever sources from.
fn probe_dipole(rho: f64) -> (Point, Point) {
    let y = Vector3::new(0.48, 0.6, 0.64) * rho;
    let p = Vector3::new(1.0, -1.0, 1.0) / 3f64.sqrt();
    (y, p)
}

fn noisy_sibling(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_noisy.{}", ext.to_string_lossy()),
        None => format!("{stem}_noisy"),
    };
    path.with_file_name(name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateReport {
    pub noiseless: PathBuf,
    pub noisy: Option<PathBuf>,
    pub n_max: usize,
    pub nodes: usize,
    pub symmetry_defect: f64,
    pub interface_residual: f64,
}

pub fn simulate(
    config: &Path,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<SimulateReport> {
    let cfg = load(config, out_dir)?;
    cfg.require_sphere()?;
    let cavity = cfg.cavity_config()?;
    let n_max = cavity.n_max;
    let model = ForwardModel::new(cavity)?;
    let grid = cfg.sphere_grid()?;
    let start = Instant::now();
    let data = assemble_nearfield(&model, &grid)?;
    let elapsed = start.elapsed().as_secs_f64();
    let defect = data.symmetry_defect();
    let (y, p) = probe_dipole(cfg.measurement.rho);
    let residual = model.interface_residual(&y, &p, INTERFACE_SAMPLES)?;

    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::io(&cfg.output.dir, e))?;
    let path = cfg.output.dir.join(&cfg.output.data_file);
    let mut manifest = vec![
        ("format".to_string(), "NFEM1".to_string()),
        ("resolved_n_max".into(), n_max.to_string()),
        ("nodes".into(), grid.len().to_string()),
        ("symmetry_defect".into(), format!("{defect:e}")),
        ("interface_residual".into(), format!("{residual:e}")),
    ];
    manifest.extend(cfg.to_pairs());

    write_nearfield(&data, &path)?;
    let mut clean = manifest.clone();
    clean.push(("kind".into(), "noiseless".into()));
    write_manifest(&manifest_path(&path), &clean)?;

    let noisy = if cfg.measurement.noise_level > 0.0 {
        let noisy_path = noisy_sibling(&path);
        let noisy = add_noise(&data, &cfg.noise()?);
        write_nearfield(&noisy, &noisy_path)?;
        let mut m = manifest;
        m.push(("kind".into(), "noisy".into()));
        write_manifest(&manifest_path(&noisy_path), &m)?;
        Some(noisy_path)
    } else {
        None
    };

    emit(
        out,
        format_args!(
            "assembled {} x {} near-field matrix (N_max = {n_max}) in {elapsed:.2} s",
            data.size(),
            data.size()
        ),
    )?;
    emit(out, format_args!("reciprocity defect: {defect:.3e}"))?;
    emit(out, format_args!("interface residual: {residual:.3e}"))?;
    emit(out, format_args!("wrote {}", path.display()))?;
    if let Some(p) = &noisy {
        emit(out, format_args!("wrote {}", p.display()))?;
    }
    Ok(SimulateReport {
        noiseless: path,
        noisy,
        n_max,
        nodes: grid.len(),
        symmetry_defect: defect,
        interface_residual: residual,
    })
}

fn check_wavenumber(data: &NearFieldMatrix, cfg: &RunConfig) -> Result<()> {
    let (dk, ck) = (data.k.get(), cfg.forward.k);
    if (dk - ck).abs() > 1e-12 * ck.abs().max(dk.abs()) {
        return Err(Error::WavenumberMismatch {
            data: dk,
            config: ck,
        });
    }
    Ok(())
}

fn imaging_options(cfg: &RunConfig, data: &NearFieldMatrix) -> ImagingOptions {
    ImagingOptions {
        polarization: cfg.lsm.polarization.normalize(),
        noise_level: data.noise.map_or(cfg.measurement.noise_level, |n| n.level),
        alpha: cfg.lsm.alpha_mode,
        threads: 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructReport {
    pub field: ImagingField,
    pub files: WrittenFiles,
    pub separation: Option<ShellSeparation>,
    pub log_range: (f64, f64),
    pub wall_time: f64,
}

pub fn reconstruct(
    data: &Path,
    config: &Path,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<ReconstructReport> {
    let cfg = load(config, out_dir)?;
    let start = Instant::now();
    let matrix = read_nearfield(data)?;
    check_wavenumber(&matrix, &cfg)?;
    let sampling = cfg.sampling_grid()?;
    let opts = imaging_options(&cfg, &matrix);
    let svd = svd_factorize(&matrix)?;
    let field = run_imaging_with(&svd, &matrix.grid, matrix.k, &sampling, &opts)?;
    let files = write_imaging(
        &cfg.output.dir,
        &cfg.output.image_prefix,
        &field,
        cfg.output.csv,
        cfg.output.vtk,
        cfg.output.sections,
    )?;
    let wall_time = start.elapsed().as_secs_f64();
    let log_range = field.log_range();
    let separation = shell_separation(&field, &ShellBands::default());

    for f in files.all() {
        emit(out, format_args!("wrote {}", f.display()))?;
    }
    if field.flagged > 0 {
        emit(
            out,
            format_args!(
                "note: {} points used a bracket-endpoint alpha",
                field.flagged
            ),
        )?;
    }
    match &separation {
        Some(s) => emit(
            out,
            format_args!(
                "shell separation: inside p90 = {:.3}, outside p10 = {:.3}, gap = {:.3} decades ({})",
                s.inside_p90,
                s.outside_p10,
                s.gap(),
                if s.separated() { "separated" } else { "NOT separated" }
            ),
        )?,
        None => emit(out, format_args!("shell separation: bands not covered by the sampling grid"))?,
    }
    emit(
        out,
        format_args!(
            "log10_I in [{:.4}, {:.4}] over {} active points; wall time {wall_time:.2} s",
            log_range.0,
            log_range.1,
            field.active_count()
        ),
    )?;
    Ok(ReconstructReport {
        field,
        files,
        separation,
        log_range,
        wall_time,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} {:.3e} (threshold {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfcheckReport {
    pub checks: Vec<Check>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn below(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        value,
        threshold,
        passed: value <= threshold,
    }
}

/// Runs the diagnostic suite; the caller maps a failed report to a nonzero exit.
pub fn selfcheck_config(cfg: &RunConfig) -> Result<SelfcheckReport> {
    cfg.require_sphere()?;
    let mut checks = Vec::new();
    let k = cfg.forward.k;
    let rho = cfg.measurement.rho;

    let n_scan = ((k * rho).ceil() as usize + 10).max(10);
    let margin = maxwell_eigenvalue_margin(k, rho, n_scan)?;
    checks.push(Check {
        name: "eigenvalue_margin",
        value: margin,
        threshold: EIGENVALUE_MARGIN_THRESHOLD,
        passed: margin >= EIGENVALUE_MARGIN_THRESHOLD,
    });

    let cavity = cfg.cavity_config()?;
    let n_max = cavity.n_max;
    let model = ForwardModel::new(cavity.clone())?;
    let small = SphereGrid::new(6, 12, rho)?;
    let matrix = assemble_nearfield(&model, &small)?;
    checks.push(below(
        "reciprocity",
        matrix.symmetry_defect(),
        RECIPROCITY_TOLERANCE,
    ));

    let (y, p) = probe_dipole(rho);
    checks.push(below(
        "interface_residual",
        model.interface_residual(&y, &p, INTERFACE_SAMPLES)?,
        INTERFACE_TOLERANCE,
    ));

    let finer = ForwardModel::new(
        cavity
            .medium
            .clone()
            .with_order((n_max + 8).min(MAX_ORDER))?,
    )?;
    let x = small.nodes[0].position;
    let yy = small.nodes[small.len() / 2 + 1].position;
    let coarse_t = model.scattered_tensor(&x, &yy)?;
    let fine_t = finer.scattered_tensor(&x, &yy)?;
    let scale = fine_t.norm().max(green_tensor(&x, &yy, model.k())?.norm());
    let change = (coarse_t - fine_t).norm() / scale;
    checks.push(below("n_max_convergence", change, CONVERGENCE_TOLERANCE));

    let norm = matrix.entries.norm();
    checks.push(Check {
        name: "matrix_norm",
        value: norm,
        threshold: f64::INFINITY,
        passed: norm.is_finite(),
    });
    Ok(SelfcheckReport { checks })
}

pub fn selfcheck(config: &Path, out: &mut dyn Write) -> Result<SelfcheckReport> {
    let cfg = RunConfig::from_file(config)?;
    let report = selfcheck_config(&cfg)?;
    for c in &report.checks {
        emit(out, format_args!("{c}"))?;
    }
    emit(
        out,
        format_args!(
            "selfcheck {}",
            if report.passed() { "passed" } else { "FAILED" }
        ),
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayPoint {
    pub x: Point,
    /// `|sum_j w_j G(x, y_j) g(y_j)|`.
    pub single_layer: f64,
    /// `|G(x, z) h|`, the field the single layer approximates.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub z: Point,
    pub masked: bool,
    pub alpha: f64,
    pub flag: Option<AlphaFlag>,
    pub morozov_value: f64,
    pub discrepancy: f64,
    pub g_norm: f64,
    pub indicator_unnormalized: f64,
    pub ray: Vec<RayPoint>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "z = ({}, {}, {})", self.z.x, self.z.y, self.z.z)?;
        if self.masked {
            writeln!(
                f,
                "note: z lies inside the mask and would be masked in reconstruct"
            )?;
        }
        writeln!(f, "alpha = {:.6e}", self.alpha)?;
        match self.flag {
            Some(flag) => writeln!(f, "alpha flag = {flag:?}")?,
            None => writeln!(f, "alpha flag = none")?,
        }
        writeln!(f, "morozov d(alpha) = {:.6e}", self.morozov_value)?;
        writeln!(f, "discrepancy ||Ag - b|| = {:.6e}", self.discrepancy)?;
        writeln!(f, "||g|| = {:.6e}", self.g_norm)?;
        write!(f, "I_unnormalized = {:.6e}", self.indicator_unnormalized)?;
        for p in &self.ray {
            write!(
                f,
                "\nray x = ({:.3}, {:.3}, {:.3}): |S g| = {:.6e}, |G h| = {:.6e}",
                p.x.x, p.x.y, p.x.z, p.single_layer, p.target
            )?;
        }
        Ok(())
    }
}

pub fn probe_point(matrix: &NearFieldMatrix, cfg: &RunConfig, z: &Point) -> Result<ProbeReport> {
    check_wavenumber(matrix, cfg)?;
    let masked = cfg.sampling_grid()?.is_masked(z);
    let opts = imaging_options(cfg, matrix);
    let svd = svd_factorize(matrix)?;
    let (value, sol, choice) = indicator_at(z, &svd, &matrix.grid, matrix.k, &opts)?;

    let dir = if z.norm() > 0.0 {
        z.normalize()
    } else {
        Vector3::new(0.0, 0.0, 1.0)
    };
    let rho = matrix.grid.radius;
    let hc = complexify(&opts.polarization);
    let mut ray = Vec::new();
    for t in [0.2, 0.4, 0.6, 0.8] {
        let x = dir * (t * rho);
        if (x - z).norm() < 1e-6 {
            continue;
        }
        let sg = single_layer_eval(&sol.g, &x, &matrix.grid, matrix.k)?;
        let target = green_tensor(&x, z, matrix.k)? * hc;
        ray.push(RayPoint {
            x,
            single_layer: sg.norm(),
            target: target.norm(),
        });
    }
    Ok(ProbeReport {
        z: *z,
        masked,
        alpha: choice.alpha,
        flag: choice.flag,
        morozov_value: choice.discrepancy_value,
        discrepancy: sol.discrepancy,
        g_norm: sol.g_norm_discrete,
        indicator_unnormalized: value,
        ray,
    })
}

pub fn probe(data: &Path, config: &Path, z: &Point, out: &mut dyn Write) -> Result<ProbeReport> {
    let cfg = RunConfig::from_file(config)?;
    let matrix = read_nearfield(data)?;
    let report = probe_point(&matrix, &cfg, z)?;
    emit(out, format_args!("{report}"))?;
    Ok(report)
}

/// Parses `X,Y,Z`.
pub fn parse_point(text: &str) -> std::result::Result<Point, String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{s}' is not a number"))
        })
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(format!(
            "expected X,Y,Z with three finite numbers, got '{text}'"
        )),
    }
}

/// Worker count from `NFEM_THREADS`; unset or 0 means automatic.
pub fn threads_from_env(value: Option<&str>) -> Result<usize> {
    match value.map(str::trim) {
        None | Some("") => Ok(0),
        Some(s) => s.parse::<usize>().map_err(|_| Error::Config {
            line: 0,
            key: "NFEM_THREADS".into(),
            message: format!("expected a non-negative integer, got '{s}'"),
        }),
    }
}
