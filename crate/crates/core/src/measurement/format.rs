//! NFEM1 binary near-field files and their text manifests.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   "NFEM1\0"                  6 bytes
//! k       f64
//! rho     f64
//! n       u32                        node count
//! noisy   u8                         0 or 1
//! h       f64                        noise level
//! seed    u64                        noise seed
//! nodes   n x (theta, phi, w)        f64 each
//! entries (2n)^2 x (re, im)          f64 each, row-major
//! crc     u64                        CRC-64/XZ of every preceding byte
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crc::{Crc, CRC_64_XZ};
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::assemble::NearFieldMatrix;
use super::grid::SphereGrid;
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::green::Wavenumber;

pub const MAGIC: &[u8; 6] = b"NFEM1\0";
const HEADER_LEN: usize = 6 + 8 + 8 + 4 + 1 + 8 + 8;
const NODE_LEN: usize = 24;
const ENTRY_LEN: usize = 16;
const CRC_LEN: usize = 8;
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

/// Total file length for `n` nodes.
pub fn encoded_len(n: usize) -> usize {
    HEADER_LEN + n * NODE_LEN + 4 * n * n * ENTRY_LEN + CRC_LEN
}

/// Node count whose encoded length is exactly `len`, if any.
fn node_count_for(len: usize) -> Option<usize> {
    let body = len.checked_sub(HEADER_LEN + CRC_LEN)? as f64;
    // 64 n^2 + 24 n - body = 0
    let n = ((-24.0 + (576.0 + 256.0 * body).sqrt()) / 128.0).round() as usize;
    (encoded_len(n) == len).then_some(n)
}

pub fn encode(matrix: &NearFieldMatrix) -> Vec<u8> {
    let n = matrix.grid.len();
    let mut buf = Vec::with_capacity(encoded_len(n));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&matrix.k.get().to_le_bytes());
    buf.extend_from_slice(&matrix.grid.radius.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    let (flag, level, seed) = match matrix.noise {
        Some(s) => (1u8, s.level, s.seed),
        None => (0u8, 0.0, 0u64),
    };
    buf.push(flag);
    buf.extend_from_slice(&level.to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    for node in &matrix.grid.nodes {
        for v in [node.theta, node.phi, node.weight] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let size = 2 * n;
    for r in 0..size {
        for c in 0..size {
            let v = matrix.entries[(r, c)];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    let crc = CRC64.checksum(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.buf[self.pos..self.pos + N]
            .try_into()
            .expect("length checked");
        self.pos += N;
        out
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn decode(buf: &[u8]) -> Result<NearFieldMatrix> {
    if buf.len() < HEADER_LEN + CRC_LEN {
        return Err(Error::MalformedHeader(format!(
            "file is {} bytes, shorter than the {}-byte header",
            buf.len(),
            HEADER_LEN + CRC_LEN
        )));
    }
    if &buf[..6] != MAGIC {
        return Err(Error::MalformedHeader("bad magic, expected NFEM1".into()));
    }
    let mut rd = Reader { buf, pos: 6 };
    let k = rd.f64();
    let rho = rd.f64();
    let n = u32::from_le_bytes(rd.take()) as usize;
    let flag = rd.take::<1>()[0];
    let level = rd.f64();
    let seed = u64::from_le_bytes(rd.take());
    if flag > 1 {
        return Err(Error::MalformedHeader(format!(
            "noise flag must be 0 or 1, got {flag}"
        )));
    }
    let k = Wavenumber::new(k)
        .map_err(|_| Error::MalformedHeader(format!("invalid wavenumber {k}")))?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::MalformedHeader(format!(
            "invalid sphere radius {rho}"
        )));
    }
    if n == 0 {
        return Err(Error::MalformedHeader("node count is zero".into()));
    }
    let expected = encoded_len(n);
    if buf.len() != expected {
        return Err(match node_count_for(buf.len()) {
            Some(found) => Error::DimensionMismatch { declared: n, found },
            None => Error::LengthMismatch {
                expected,
                found: buf.len(),
            },
        });
    }
    let stored = u64::from_le_bytes(buf[expected - CRC_LEN..].try_into().expect("8 bytes"));
    let computed = CRC64.checksum(&buf[..expected - CRC_LEN]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let records: Vec<(f64, f64, f64)> = (0..n).map(|_| (rd.f64(), rd.f64(), rd.f64())).collect();
    let grid =
        SphereGrid::from_nodes(rho, &records).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let size = 2 * n;
    let mut entries = DMatrix::zeros(size, size);
    for r in 0..size {
        for c in 0..size {
            let re = rd.f64();
            let im = rd.f64();
            entries[(r, c)] = Complex64::new(re, im);
        }
    }
    let noise = if flag == 1 {
        Some(NoiseSpec::new(level, seed).map_err(|e| Error::MalformedHeader(e.to_string()))?)
    } else {
        None
    };
    NearFieldMatrix::new(k, grid, entries, noise)
}

pub fn write_nearfield(matrix: &NearFieldMatrix, path: &Path) -> Result<()> {
    fs::write(path, encode(matrix)).map_err(|e| Error::io(path, e))
}

pub fn read_nearfield(path: &Path) -> Result<NearFieldMatrix> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf)
}

/// `<data path>.manifest`.
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Writes `key = value` lines.
pub fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(k);
        text.push_str(" = ");
        text.push_str(v);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    Error::MalformedHeader(format!("manifest line {}: expected key = value", i + 1))
                })
        })
        .collect()
}
