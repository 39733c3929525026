//! Image and table files: raw little-endian float64 planes with a JSON
//! manifest, binary PGM, and CSV tables.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimators::RidgeSample;
use crate::transform::ImageGrid;
use crate::wavelets::MorseFamily;

/// Header of a raw float64 file; `planes` lists the `n1 x n2` planes
/// stored back to back in `data_file`, which is resolved relative to the
/// manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawManifest {
    pub n1: usize,
    pub n2: usize,
    pub d1: f64,
    pub d2: f64,
    pub byte_order: String,
    pub dtype: String,
    pub data_file: String,
    pub planes: Vec<String>,
    #[serde(default)]
    pub units: Value,
    #[serde(default)]
    pub config: Value,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes planes as raw little-endian float64 next to the manifest at
/// `manifest_path` (same stem, `.f64` extension).
pub fn write_raw(
    manifest_path: &Path,
    grid: (usize, usize, f64, f64),
    planes: &[(String, &[f64])],
    units: Value,
    config: Value,
) -> Result<RawManifest> {
    let (n1, n2, d1, d2) = grid;
    let data_path = manifest_path.with_extension("f64");
    let mut out = BufWriter::new(fs::File::create(&data_path).map_err(|e| io_err(&data_path, e))?);
    for (name, data) in planes {
        if data.len() != n1 * n2 {
            return Err(Error::Io(format!(
                "plane {name} has {} values, expected {}",
                data.len(),
                n1 * n2
            )));
        }
        for v in data.iter() {
            out.write_all(&v.to_le_bytes())
                .map_err(|e| io_err(&data_path, e))?;
        }
    }
    out.flush().map_err(|e| io_err(&data_path, e))?;
    let manifest = RawManifest {
        n1,
        n2,
        d1,
        d2,
        byte_order: "little".into(),
        dtype: "f64".into(),
        data_file: data_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        planes: planes.iter().map(|(n, _)| n.clone()).collect(),
        units,
        config,
    };
    write_json(manifest_path, &manifest)?;
    Ok(manifest)
}

/// Writes a single image.
pub fn write_image_raw(
    manifest_path: &Path,
    grid: &ImageGrid,
    config: Value,
) -> Result<RawManifest> {
    write_raw(
        manifest_path,
        (grid.n1, grid.n2, grid.d1, grid.d2),
        &[("image".into(), &grid.data)],
        serde_json::json!({ "position": "sample units" }),
        config,
    )
}

/// Reads a manifest and all of its planes.
pub fn read_raw(manifest_path: &Path) -> Result<(RawManifest, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let manifest: RawManifest =
        serde_json::from_str(&text).map_err(|e| io_err(manifest_path, e))?;
    if manifest.dtype != "f64" {
        return Err(Error::Io(format!("unsupported dtype {}", manifest.dtype)));
    }
    let big = match manifest.byte_order.as_str() {
        "little" => false,
        "big" => true,
        other => return Err(Error::Io(format!("unknown byte order {other}"))),
    };
    let data_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.data_file);
    let bytes = fs::read(&data_path).map_err(|e| io_err(&data_path, e))?;
    let len = manifest.n1 * manifest.n2;
    if bytes.len() != 8 * len * manifest.planes.len() {
        return Err(Error::Io(format!(
            "{}: expected {} bytes, found {}",
            data_path.display(),
            8 * len * manifest.planes.len(),
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| {
            let b: [u8; 8] = c.try_into().expect("chunk of eight");
            if big {
                f64::from_be_bytes(b)
            } else {
                f64::from_le_bytes(b)
            }
        })
        .collect();
    let planes = values.chunks(len.max(1)).map(|c| c.to_vec()).collect();
    Ok((manifest, planes))
}

/// Reads a binary PGM (8 or 16 bit) as unit-spaced float samples; row `r`,
/// column `c` becomes `data[r * width + c]`.
pub fn read_pgm(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(io_err(path, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(io_err(path, "not a binary PGM (P5)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        token()?
            .parse::<usize>()
            .map_err(|_| io_err(path, format!("bad PGM {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(io_err(path, format!("PGM maxval {maxval} out of range")));
    }
    // one whitespace byte separates the header from the raster
    let start = pos + 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let need = width * height * depth;
    if bytes.len() < start + need {
        return Err(io_err(path, "truncated PGM raster"));
    }
    let raster = &bytes[start..start + need];
    let data = if depth == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    ImageGrid::new(height, width, 1.0, 1.0, data)
}

/// Writes a 16-bit PGM, mapping the data range linearly onto `0..=65535`.
pub fn write_pgm16(path: &Path, grid: &ImageGrid) -> Result<()> {
    let lo = grid.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(32 + 2 * grid.data.len());
    out.extend_from_slice(format!("P5\n{} {}\n65535\n", grid.n2, grid.n1).as_bytes());
    for &v in &grid.data {
        let q = ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads an image from a `.pgm` file or a raw manifest (first plane).
pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext.to_ascii_lowercase().as_str() {
        "pgm" => read_pgm(path),
        "json" => {
            let (m, planes) = read_raw(path)?;
            let first = planes
                .into_iter()
                .next()
                .ok_or_else(|| io_err(path, "manifest lists no planes"))?;
            ImageGrid::new(m.n1, m.n2, m.d1, m.d2, first)
        }
        _ => Err(io_err(
            path,
            "expected a .pgm image or a .json raw manifest",
        )),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn write_lines(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path).map_err(|e| io_err(path, e))?);
    writeln!(out, "{header}").map_err(|e| io_err(path, e))?;
    for row in rows {
        writeln!(out, "{row}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Table of the radial spectra `f, psi_0, psi_1, ...`.
pub fn write_wavelet_table(path: &Path, family: &MorseFamily, freqs: &[f64]) -> Result<()> {
    let header = std::iter::once("f".to_string())
        .chain((0..family.count()).map(|n| format!("psi_{n}")))
        .collect::<Vec<_>>()
        .join(",");
    let mut rows = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let mut row = format!("{f:.17e}");
        for n in 0..family.count() {
            row.push_str(&format!(",{:.17e}", family.psi_e_hat(f, n)?));
        }
        rows.push(row);
    }
    write_lines(path, &header, rows.into_iter())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}"))
        .unwrap_or_else(|| "nan".into())
}

/// Ridge samples; angles in radians, phase in cycles.
pub fn write_ridge_csv(path: &Path, samples: &[RidgeSample]) -> Result<()> {
    write_lines(
        path,
        "b1,b2,a,nu_rad,phase_cycles,amplitude,S_plus,sheet",
        samples.iter().map(|s| {
            format!(
                "{},{},{:.17e},{},{:.17e},{:.17e},{:.17e},{}",
                s.b1,
                s.b2,
                s.a,
                opt(s.nu),
                s.phase,
                s.amplitude,
                s.s_plus,
                s.sheet
            )
        }),
    )
}

/// Point-wise estimates at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub b1: f64,
    pub b2: f64,
    pub a: f64,
    pub theta_max: Option<f64>,
    pub nu: Option<f64>,
    pub phase: Option<f64>,
    pub amplitude: Option<f64>,
    pub s_plus: f64,
}

pub fn write_estimate_csv(path: &Path, rows: &[EstimateRow]) -> Result<()> {
    write_lines(
        path,
        "b1,b2,a,theta_max_rad,nu_rad,phase_cycles,amplitude,S_plus",
        rows.iter().map(|r| {
            format!(
                "{},{},{:.17e},{},{},{},{},{:.17e}",
                r.b1,
                r.b2,
                r.a,
                opt(r.theta_max),
                opt(r.nu),
                opt(r.phase),
                opt(r.amplitude),
                r.s_plus
            )
        }),
    )
}

/// Path of `name` inside `dir`.
pub fn artifact(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
