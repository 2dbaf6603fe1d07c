//! Matrix and patch-set file formats.
//!
//! Binary matrices: the magic line `NLDM1\n`, an ASCII header line
//! `rows cols f64le\n`, then `rows * cols` IEEE-754 doubles, little endian,
//! in the crate-wide row-major order. The text alternative is CSV with one
//! row per line at full round-trip precision (17 significant digits).
//! `load_matrix` sniffs the magic and accepts either.
//!
//! Patch sets are directories holding a `manifest.json` that names the
//! base-point and (stacked) basis matrix files.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::simpqr::PatchSet;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

pub const MATRIX_MAGIC: &[u8; 6] = b"NLDM1\n";

pub fn save_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path)?;
    file.write_all(MATRIX_MAGIC)?;
    file.write_all(format!("{} {} f64le\n", m.rows(), m.cols()).as_bytes())?;
    let mut payload = Vec::with_capacity(m.as_slice().len() * 8);
    for v in m.as_slice() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&payload)?;
    Ok(())
}

pub fn save_matrix_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(MATRIX_MAGIC) {
        load_binary(path, &bytes[MATRIX_MAGIC.len()..])
    } else {
        load_csv(path, &bytes)
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn load_binary(path: &Path, rest: &[u8]) -> Result<Matrix> {
    let header_end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader {
            path: display(path),
            detail: "missing header line".into(),
        })?;
    let header = std::str::from_utf8(&rest[..header_end]).map_err(|_| Error::MalformedHeader {
        path: display(path),
        detail: "header is not UTF-8".into(),
    })?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader {
            path: display(path),
            detail: format!("bad row count in {header:?}"),
        })?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader {
            path: display(path),
            detail: format!("bad column count in {header:?}"),
        })?;
    let dtype = parts.next().unwrap_or("");
    if dtype != "f64le" || parts.next().is_some() {
        return Err(Error::MalformedHeader {
            path: display(path),
            detail: format!("unsupported dtype in {header:?}"),
        });
    }

    let payload = &rest[header_end + 1..];
    let expected = rows * cols * 8;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            path: display(path),
            expected,
            got: payload.len(),
        });
    }
    if payload.len() != expected {
        return Err(Error::PayloadMismatch {
            path: display(path),
            rows,
            cols,
            len: payload.len() / 8,
        });
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::new(rows, cols, data)
}

fn load_csv(path: &Path, bytes: &[u8]) -> Result<Matrix> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::MalformedHeader {
        path: display(path),
        detail: "file is neither a binary matrix nor UTF-8 text".into(),
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::MalformedHeader {
                    path: display(path),
                    detail: format!("line {}: bad scalar {tok:?}", lineno + 1),
                })
            })
            .collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::PayloadMismatch {
                    path: display(path),
                    rows: rows.len(),
                    cols: c,
                    len: row.len(),
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchSetManifest {
    schema_version: u32,
    kind: String,
    ambient_dim: usize,
    intrinsic_dim: usize,
    patch_count: usize,
    /// Stacked bases: `patch_count` vertical blocks of `ambient_dim` rows.
    bases_file: String,
    base_points_file: Option<String>,
}

pub fn save_patch_set(dir: impl AsRef<Path>, patches: &PatchSet) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (n, r, count) = (
        patches.ambient_dim(),
        patches.intrinsic_dim(),
        patches.patch_count(),
    );
    let mut stacked = Matrix::zeros(count * n, r);
    for (k, basis) in patches.bases().iter().enumerate() {
        for i in 0..n {
            for j in 0..r {
                stacked.set(k * n + i, j, basis.get(i, j));
            }
        }
    }
    save_matrix(dir.join("bases.nldm"), &stacked)?;
    let base_points_file = match patches.base_points() {
        Some(bp) => {
            save_matrix(dir.join("base_points.nldm"), bp)?;
            Some("base_points.nldm".to_string())
        }
        None => None,
    };
    let manifest = PatchSetManifest {
        schema_version: 1,
        kind: "patch_set".into(),
        ambient_dim: n,
        intrinsic_dim: r,
        patch_count: count,
        bases_file: "bases.nldm".into(),
        base_points_file,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn load_patch_set(dir: impl AsRef<Path>) -> Result<PatchSet> {
    let dir = dir.as_ref();
    let manifest: PatchSetManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let stacked = load_matrix(dir.join(&manifest.bases_file))?;
    let (n, r, count) = (
        manifest.ambient_dim,
        manifest.intrinsic_dim,
        manifest.patch_count,
    );
    if stacked.rows() != count * n || stacked.cols() != r {
        return Err(Error::PayloadMismatch {
            path: display(&dir.join(&manifest.bases_file)),
            rows: count * n,
            cols: r,
            len: stacked.rows() * stacked.cols(),
        });
    }
    let bases: Vec<Matrix> = (0..count)
        .map(|k| Matrix::from_fn(n, r, |i, j| stacked.get(k * n + i, j)))
        .collect();
    let base_points = manifest
        .base_points_file
        .as_ref()
        .map(|f| load_matrix(dir.join(f)))
        .transpose()?;
    PatchSet::new(bases, base_points)
}
