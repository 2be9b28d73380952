//! CSV, VTK and cross-section writers for imaging fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lsm::ImagingField;

pub const CSV_HEADER: [&str; 6] = ["z_x", "z_y", "z_z", "I", "log10_I", "masked"];

/// Plane through the origin spanned by two lattice axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    X1X2,
    X2X3,
    X1X3,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::X1X2, Plane::X2X3, Plane::X1X3];

    pub fn label(self) -> &'static str {
        match self {
            Plane::X1X2 => "x1x2",
            Plane::X2X3 => "x2x3",
            Plane::X1X3 => "x1x3",
        }
    }

    /// Axis held at the origin.
    pub fn normal_axis(self) -> usize {
        match self {
            Plane::X1X2 => 2,
            Plane::X2X3 => 0,
            Plane::X1X3 => 1,
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows(
    path: &Path,
    field: &ImagingField,
    indices: impl Iterator<Item = usize>,
) -> Result<usize> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    let mut rows = 0;
    for i in indices {
        let z = field.grid.point(i);
        w.write_record([
            z.x.to_string(),
            z.y.to_string(),
            z.z.to_string(),
            field.indicator[i].to_string(),
            field.log_indicator[i].to_string(),
            u8::from(field.masked[i]).to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
        rows += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(rows)
}

/// One row per lattice point in lattice order (x fastest).
pub fn write_csv(path: &Path, field: &ImagingField) -> Result<usize> {
    write_rows(path, field, 0..field.grid.len())
}

/// Rows of the lattice plane through the origin index, in lattice order.
pub fn write_cross_section(path: &Path, field: &ImagingField, plane: Plane) -> Result<usize> {
    let axis = plane.normal_axis();
    let fixed = field.grid.origin_index(axis);
    let [nx, ny, _] = field.grid.dims;
    write_rows(
        path,
        field,
        (0..field.grid.len()).filter(move |&i| {
            let idx = [i % nx, (i / nx) % ny, i / (nx * ny)];
            idx[axis] == fixed
        }),
    )
}

/// Legacy ASCII STRUCTURED_POINTS with `log10_I` as point scalars.
pub fn write_vtk(path: &Path, field: &ImagingField) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = &field.grid;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "log10 imaging function")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_POINTS")?;
        writeln!(w, "DIMENSIONS {} {} {}", g.dims[0], g.dims[1], g.dims[2])?;
        writeln!(w, "ORIGIN {} {} {}", g.min[0], g.min[1], g.min[2])?;
        writeln!(w, "SPACING {} {} {}", g.spacing, g.spacing, g.spacing)?;
        writeln!(w, "POINT_DATA {}", g.len())?;
        writeln!(w, "SCALARS log10_I double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &field.log_indicator {
            writeln!(w, "{v}")?;
        }
        writeln!(w, "SCALARS masked int 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for m in &field.masked {
            writeln!(w, "{}", u8::from(*m))?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Dimensions and `log10_I` values read back from a file written by [`write_vtk`].
pub fn read_vtk_scalars(path: &Path) -> Result<([usize; 3], Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::MalformedHeader(format!("{}: {m}", path.display()));
    let mut lines = text.lines();
    let mut dims = None;
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("DIMENSIONS ") {
            let v: Vec<usize> = rest
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("bad DIMENSIONS")))
                .collect::<Result<_>>()?;
            dims = Some(<[usize; 3]>::try_from(v).map_err(|_| bad("bad DIMENSIONS"))?);
        }
        if line.starts_with("SCALARS log10_I") {
            break;
        }
    }
    let dims = dims.ok_or_else(|| bad("missing DIMENSIONS"))?;
    lines.next();
    let count = dims.iter().product();
    let values = lines
        .take(count)
        .map(|l| l.trim().parse::<f64>().map_err(|_| bad("bad scalar")))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != count {
        return Err(bad("truncated scalars"));
    }
    Ok((dims, values))
}

/// `log10_I` column of a CSV written by [`write_csv`].
pub fn read_csv_log_indicator(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let col = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .position(|h| h == "log10_I")
        .ok_or_else(|| Error::MalformedHeader(format!("{}: no log10_I column", path.display())))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            rec.get(col)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::MalformedHeader(format!("{}: bad log10_I value", path.display()))
                })
        })
        .collect()
}

/// Paths produced by [`write_imaging`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WrittenFiles {
    pub csv: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub sections: Vec<PathBuf>,
}

impl WrittenFiles {
    pub fn all(&self) -> Vec<&PathBuf> {
        self.csv
            .iter()
            .chain(self.vtk.iter())
            .chain(self.sections.iter())
            .collect()
    }
}

/// Writes the selected formats as `<dir>/<prefix>.csv`, `<prefix>.vtk` and
/// `<prefix>_<plane>.csv`.
pub fn write_imaging(
    dir: &Path,
    prefix: &str,
    field: &ImagingField,
    csv: bool,
    vtk: bool,
    sections: bool,
) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = WrittenFiles::default();
    if csv {
        let p = dir.join(format!("{prefix}.csv"));
        write_csv(&p, field)?;
        out.csv = Some(p);
    }
    if vtk {
        let p = dir.join(format!("{prefix}.vtk"));
        write_vtk(&p, field)?;
        out.vtk = Some(p);
    }
    if sections {
        for plane in Plane::ALL {
            let p = dir.join(format!("{prefix}_{}.csv", plane.label()));
            write_cross_section(&p, field, plane)?;
            out.sections.push(p);
        }
    }
    Ok(out)
}
