//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [forward]
//! geometry = sphere
//! cavity_radius = 1.5
//! shells = 2.5 1 2; 3.0 1 1.5     # outer_radius A N, ';' between shells
//! k = 0.75
//! n_max = 57                      # optional override
//!
//! [measurement]
//! rho = 1
//! n_theta = 12
//! n_phi = 24
//! noise_level = 0.02
//! seed = 7
//!
//! [lsm]
//! polarization = 0.57735, -0.57735, 0.57735
//! box_min = -3, -3, -3
//! box_max = 3, 3, 3
//! spacing = 0.1
//! mask_radius = 1
//! alpha_mode = morozov            # or fixed
//! alpha_fixed = 1e-6
//!
//! [output]
//! dir = out
//! data_file = nearfield.nfem
//! image_prefix = image
//! formats = csv, vtk, sections
//! ```
//!
//! Every key is optional; omitted keys take the defaults below. Unknown
//! sections, unknown keys and repeated keys are errors.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::forward::{LayeredCavityConfig, LayeredMedium, Shell};
use crate::geometry::Point;
use crate::green::Wavenumber;
use crate::lsm::{AlphaMode, SamplingGrid};
use crate::measurement::{NoiseSpec, SphereGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSection {
    pub geometry: String,
    pub cavity_radius: f64,
    pub shells: Vec<Shell>,
    pub k: f64,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSection {
    pub rho: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub noise_level: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsmSection {
    pub polarization: Point,
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
    pub spacing: f64,
    pub mask_radius: f64,
    pub alpha_mode: AlphaMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub data_file: String,
    pub image_prefix: String,
    pub csv: bool,
    pub vtk: bool,
    pub sections: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub forward: ForwardSection,
    pub measurement: MeasurementSection,
    pub lsm: LsmSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = 1.0 / 3f64.sqrt();
        RunConfig {
            forward: ForwardSection {
                geometry: "sphere".into(),
                cavity_radius: 1.5,
                shells: vec![Shell::new(2.5, 1.0, 2.0)],
                k: 0.75,
                n_max: None,
            },
            measurement: MeasurementSection {
                rho: 1.0,
                n_theta: 12,
                n_phi: 24,
                noise_level: 0.02,
                seed: 2024,
            },
            lsm: LsmSection {
                polarization: Vector3::new(s, -s, s),
                box_min: [-3.0; 3],
                box_max: [3.0; 3],
                spacing: 0.1,
                mask_radius: 1.0,
                alpha_mode: AlphaMode::Morozov,
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
                data_file: "nearfield.nfem".into(),
                image_prefix: "image".into(),
                csv: true,
                vtk: true,
                sections: true,
            },
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "forward",
        &["geometry", "cavity_radius", "shells", "k", "n_max"],
    ),
    (
        "measurement",
        &["rho", "n_theta", "n_phi", "noise_level", "seed"],
    ),
    (
        "lsm",
        &[
            "polarization",
            "box_min",
            "box_max",
            "spacing",
            "mask_radius",
            "alpha_mode",
            "alpha_fixed",
        ],
    ),
    ("output", &["dir", "data_file", "image_prefix", "formats"]),
];

fn parse_f64(e: &Entry, key: &str) -> Result<f64> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            config_error(
                e.line,
                key,
                format!("expected a finite number, got '{}'", e.value),
            )
        })
}

fn parse_usize(e: &Entry, key: &str) -> Result<usize> {
    e.value.parse::<usize>().map_err(|_| {
        config_error(
            e.line,
            key,
            format!("expected a non-negative integer, got '{}'", e.value),
        )
    })
}

fn parse_list(text: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| config_error(line, key, format!("'{s}' is not a finite number")))
        })
        .collect()
}

fn parse_vec3(e: &Entry, key: &str) -> Result<[f64; 3]> {
    let v = parse_list(&e.value, e.line, key)?;
    v.try_into().map_err(|v: Vec<f64>| {
        config_error(e.line, key, format!("expected 3 numbers, got {}", v.len()))
    })
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table: HashMap<(String, String), Entry> = HashMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_error(line, content, "unterminated section header"))?
                    .trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(config_error(line, name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, content, "expected 'key = value'"))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| config_error(line, key, "key outside of any section"))?;
            let allowed = KEYS
                .iter()
                .find(|(s, _)| *s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            let full = format!("{sec}.{key}");
            if !allowed.contains(&key) {
                return Err(config_error(line, &full, "unknown key"));
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = table.get(&slot) {
                return Err(config_error(
                    line,
                    &full,
                    format!("repeated key, first set on line {}", prev.line),
                ));
            }
            table.insert(
                slot,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }

        let mut cfg = RunConfig::default();
        let get = |sec: &str, key: &str| table.get(&(sec.to_string(), key.to_string()));

        // forward
        if let Some(e) = get("forward", "geometry") {
            cfg.forward.geometry = e.value.to_ascii_lowercase();
        }
        if let Some(e) = get("forward", "cavity_radius") {
            cfg.forward.cavity_radius = parse_f64(e, "forward.cavity_radius")?;
        }
        if let Some(e) = get("forward", "k") {
            cfg.forward.k = parse_f64(e, "forward.k")?;
        }
        if let Some(e) = get("forward", "n_max") {
            cfg.forward.n_max = Some(parse_usize(e, "forward.n_max")?);
        }
        if let Some(e) = get("forward", "shells") {
            let mut shells = Vec::new();
            for part in e.value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let v = parse_list(part, e.line, "forward.shells")?;
                if v.len() != 3 {
                    return Err(config_error(
                        e.line,
                        "forward.shells",
                        format!("each shell needs 'outer_radius A N', got '{part}'"),
                    ));
                }
                shells.push(Shell::new(v[0], v[1], v[2]));
            }
            cfg.forward.shells = shells;
        }

        // measurement
        if let Some(e) = get("measurement", "rho") {
            cfg.measurement.rho = parse_f64(e, "measurement.rho")?;
        }
        if let Some(e) = get("measurement", "n_theta") {
            cfg.measurement.n_theta = parse_usize(e, "measurement.n_theta")?;
        }
        if let Some(e) = get("measurement", "n_phi") {
            cfg.measurement.n_phi = parse_usize(e, "measurement.n_phi")?;
        }
        if let Some(e) = get("measurement", "noise_level") {
            cfg.measurement.noise_level = parse_f64(e, "measurement.noise_level")?;
        }
        if let Some(e) = get("measurement", "seed") {
            cfg.measurement.seed = e.value.parse::<u64>().map_err(|_| {
                config_error(
                    e.line,
                    "measurement.seed",
                    format!("expected a u64, got '{}'", e.value),
                )
            })?;
        }

        // lsm
        if let Some(e) = get("lsm", "polarization") {
            let v = parse_vec3(e, "lsm.polarization")?;
            cfg.lsm.polarization = Vector3::new(v[0], v[1], v[2]);
        }
        if let Some(e) = get("lsm", "box_min") {
            cfg.lsm.box_min = parse_vec3(e, "lsm.box_min")?;
        }
        if let Some(e) = get("lsm", "box_max") {
            cfg.lsm.box_max = parse_vec3(e, "lsm.box_max")?;
        }
        if let Some(e) = get("lsm", "spacing") {
            cfg.lsm.spacing = parse_f64(e, "lsm.spacing")?;
        }
        if let Some(e) = get("lsm", "mask_radius") {
            cfg.lsm.mask_radius = parse_f64(e, "lsm.mask_radius")?;
        }
        let fixed = get("lsm", "alpha_fixed")
            .map(|e| parse_f64(e, "lsm.alpha_fixed"))
            .transpose()?;
        match get("lsm", "alpha_mode") {
            None => {}
            Some(e) => match e.value.to_ascii_lowercase().as_str() {
                "morozov" => cfg.lsm.alpha_mode = AlphaMode::Morozov,
                "fixed" => {
                    let a = fixed.ok_or_else(|| {
                        config_error(
                            e.line,
                            "lsm.alpha_fixed",
                            "alpha_mode = fixed requires alpha_fixed",
                        )
                    })?;
                    cfg.lsm.alpha_mode = AlphaMode::Fixed(a);
                }
                other => {
                    return Err(config_error(
                        e.line,
                        "lsm.alpha_mode",
                        format!("expected 'morozov' or 'fixed', got '{other}'"),
                    ))
                }
            },
        }

        // output
        if let Some(e) = get("output", "dir") {
            cfg.output.dir = PathBuf::from(&e.value);
        }
        if let Some(e) = get("output", "data_file") {
            cfg.output.data_file = e.value.clone();
        }
        if let Some(e) = get("output", "image_prefix") {
            cfg.output.image_prefix = e.value.clone();
        }
        if let Some(e) = get("output", "formats") {
            cfg.output.csv = false;
            cfg.output.vtk = false;
            cfg.output.sections = false;
            for f in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match f.to_ascii_lowercase().as_str() {
                    "csv" => cfg.output.csv = true,
                    "vtk" => cfg.output.vtk = true,
                    "sections" => cfg.output.sections = true,
                    other => {
                        return Err(config_error(
                            e.line,
                            "output.formats",
                            format!("unknown format '{other}' (csv, vtk, sections)"),
                        ))
                    }
                }
            }
        }

        cfg.validate(&|sec, key| get(sec, key).map_or(0, |e| e.line))?;
        Ok(cfg)
    }

    fn validate(&self, line_of: &dyn Fn(&str, &str) -> usize) -> Result<()> {
        let wrap = |sec: &str, key: &str, e: Error| {
            config_error(line_of(sec, key), &format!("{sec}.{key}"), e.to_string())
        };
        self.medium().map_err(|e| {
            let key = match &e {
                Error::InvalidConfig(m) if m.starts_with("shell") => "shells",
                Error::InvalidConfig(m) if m.starts_with("cavity") => "cavity_radius",
                _ => "k",
            };
            wrap("forward", key, e)
        })?;
        if let Some(n) = self.forward.n_max {
            self.medium()?
                .with_order(n)
                .map_err(|e| wrap("forward", "n_max", e))?;
        }
        self.sphere_grid()
            .map_err(|e| wrap("measurement", "n_theta", e))?;
        if !(self.measurement.rho < self.forward.cavity_radius) {
            return Err(config_error(
                line_of("measurement", "rho"),
                "measurement.rho",
                format!(
                    "measurement radius {} must be smaller than the cavity radius {}",
                    self.measurement.rho, self.forward.cavity_radius
                ),
            ));
        }
        self.noise()
            .map_err(|e| wrap("measurement", "noise_level", e))?;
        self.sampling_grid()
            .map_err(|e| wrap("lsm", "spacing", e))?;
        if self.lsm.polarization.norm() == 0.0 {
            return Err(config_error(
                line_of("lsm", "polarization"),
                "lsm.polarization",
                "must be nonzero",
            ));
        }
        if let AlphaMode::Fixed(a) = self.lsm.alpha_mode {
            if !(a > 0.0) {
                return Err(config_error(
                    line_of("lsm", "alpha_fixed"),
                    "lsm.alpha_fixed",
                    "must be positive",
                ));
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> Result<Wavenumber> {
        Wavenumber::new(self.forward.k)
    }

    pub fn medium(&self) -> Result<LayeredMedium> {
        LayeredMedium::new(
            self.forward.cavity_radius,
            self.forward.shells.clone(),
            self.wavenumber()?,
        )
    }

    /// Truncation order: the override if present, else the order resolving
    /// sources on the measurement sphere.
    pub fn cavity_config(&self) -> Result<LayeredCavityConfig> {
        let medium = self.medium()?;
        let n = self
            .forward
            .n_max
            .unwrap_or_else(|| medium.resolved_order(self.measurement.rho));
        medium.with_order(n)
    }

    pub fn sphere_grid(&self) -> Result<SphereGrid> {
        SphereGrid::new(
            self.measurement.n_theta,
            self.measurement.n_phi,
            self.measurement.rho,
        )
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.measurement.noise_level, self.measurement.seed)
    }

    pub fn sampling_grid(&self) -> Result<SamplingGrid> {
        SamplingGrid::new(
            self.lsm.box_min,
            self.lsm.box_max,
            self.lsm.spacing,
            self.lsm.mask_radius,
        )
    }

    /// Only concentric spheres have an analytic forward solver.
    pub fn require_sphere(&self) -> Result<()> {
        if self.forward.geometry == "sphere" {
            Ok(())
        } else {
            Err(Error::UnsupportedGeometry(format!(
                "'{}' has no built-in forward solver; generate NFEM1 data externally and run 'reconstruct --data'",
                self.forward.geometry
            )))
        }
    }

    /// Flattened `section.key = value` pairs for manifests.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let v3 = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let shells = self
            .forward
            .shells
            .iter()
            .map(|s| {
                format!(
                    "{} {} {}",
                    s.outer_radius, s.inv_permeability, s.permittivity
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        let mut out = vec![
            (
                "forward.geometry".to_string(),
                self.forward.geometry.clone(),
            ),
            (
                "forward.cavity_radius".into(),
                self.forward.cavity_radius.to_string(),
            ),
            ("forward.shells".into(), shells),
            ("forward.k".into(), self.forward.k.to_string()),
        ];
        if let Some(n) = self.forward.n_max {
            out.push(("forward.n_max".into(), n.to_string()));
        }
        out.extend([
            ("measurement.rho".into(), self.measurement.rho.to_string()),
            (
                "measurement.n_theta".into(),
                self.measurement.n_theta.to_string(),
            ),
            (
                "measurement.n_phi".into(),
                self.measurement.n_phi.to_string(),
            ),
            (
                "measurement.noise_level".into(),
                self.measurement.noise_level.to_string(),
            ),
            ("measurement.seed".into(), self.measurement.seed.to_string()),
            (
                "lsm.polarization".into(),
                v3(self.lsm.polarization.as_slice()),
            ),
            ("lsm.box_min".into(), v3(&self.lsm.box_min)),
            ("lsm.box_max".into(), v3(&self.lsm.box_max)),
            ("lsm.spacing".into(), self.lsm.spacing.to_string()),
            ("lsm.mask_radius".into(), self.lsm.mask_radius.to_string()),
        ]);
        match self.lsm.alpha_mode {
            AlphaMode::Morozov => out.push(("lsm.alpha_mode".into(), "morozov".into())),
            AlphaMode::Fixed(a) => {
                out.push(("lsm.alpha_mode".into(), "fixed".into()));
                out.push(("lsm.alpha_fixed".into(), a.to_string()));
            }
        }
        out
    }
}
