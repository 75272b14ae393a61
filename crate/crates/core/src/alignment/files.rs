//! Alignment matrix files.
//!
//! Text:
//!
//! ```text
//! # termalign-alignment v1
//! # meta {"residual":..,"iterations_used":..,...}
//! <d>
//! <row 0: d space-separated decimals>
//! ...
//! ```
//!
//! Binary: magic `TAWM`, `u32` version (1), `u64` d, `u32` metadata length,
//! the metadata JSON bytes, then `d × d` `f64` values in row-major order. All
//! little-endian.
//!
//! [`load_alignment`] accepts either and tells them apart by the magic bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use super::{AlignStatus, AlignmentMatrix, IterationRecord};
use crate::linalg::Matrix;
use crate::{Error, Result};

const TEXT_MAGIC: &str = "# termalign-alignment v1";
const BIN_MAGIC: &[u8; 4] = b"TAWM";
const VERSION: u32 = 1;

/// A loaded alignment with the metadata stored alongside it.
#[derive(Clone, Debug)]
pub struct AlignmentFile {
    pub alignment: AlignmentMatrix,
    /// Everything in the metadata object, including caller-supplied keys.
    pub meta: Map<String, Value>,
}

fn metadata(w: &AlignmentMatrix, extra: &Value) -> Map<String, Value> {
    let mut meta = match extra {
        Value::Object(m) => m.clone(),
        Value::Null => Map::new(),
        other => {
            let mut m = Map::new();
            m.insert("extra".into(), other.clone());
            m
        }
    };
    meta.insert("dim".into(), w.dim().into());
    meta.insert("orthogonal".into(), w.orthogonal.into());
    meta.insert("orthogonality_error".into(), w.orthogonality_error().into());
    meta.insert("residual".into(), w.residual.into());
    meta.insert("iterations_used".into(), w.iterations_used.into());
    meta.insert("ambiguous".into(), w.ambiguous.into());
    meta.insert("status".into(), serde_json::to_value(w.status).expect("json"));
    meta.insert("history".into(), serde_json::to_value(&w.history).expect("json"));
    meta
}

/// Write the text format. `extra` (typically provenance and the run
/// configuration) is merged into the metadata object.
pub fn save_alignment(w: &AlignmentMatrix, extra: &Value, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(TEXT_MAGIC);
    out.push('\n');
    out.push_str("# meta ");
    out.push_str(&Value::Object(metadata(w, extra)).to_string());
    out.push('\n');
    out.push_str(&format!("{}\n", w.dim()));
    for row in w.w.row_iter() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn save_alignment_binary(w: &AlignmentMatrix, extra: &Value, path: &Path) -> Result<()> {
    let meta = Value::Object(metadata(w, extra)).to_string();
    let d = w.dim();
    let mut out = Vec::with_capacity(24 + meta.len() + 8 * d * d);
    out.extend_from_slice(BIN_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(meta.as_bytes());
    for row in w.w.row_iter() {
        for x in row.iter() {
            out.write_all(&x.to_le_bytes()).expect("vec write");
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_alignment(path: &Path) -> Result<AlignmentFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, meta) = if bytes.starts_with(BIN_MAGIC) {
        parse_binary(&bytes, path)?
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::parse(path.display(), 1, "invalid UTF-8"))?;
        parse_text(text, path)?
    };
    let mut alignment = AlignmentMatrix::from_matrix(w)?;
    let num = |k: &str| meta.get(k).and_then(Value::as_f64);
    alignment.residual = num("residual").unwrap_or(0.0);
    alignment.iterations_used = meta.get("iterations_used").and_then(Value::as_u64).unwrap_or(0) as usize;
    alignment.ambiguous = meta.get("ambiguous").and_then(Value::as_bool).unwrap_or(false);
    alignment.status = meta
        .get("status")
        .and_then(|v| serde_json::from_value::<AlignStatus>(v.clone()).ok())
        .unwrap_or_default();
    alignment.history = meta
        .get("history")
        .and_then(|v| serde_json::from_value::<Vec<IterationRecord>>(v.clone()).ok())
        .unwrap_or_default();
    Ok(AlignmentFile { alignment, meta })
}

fn parse_meta(s: &str, path: &Path, line: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str(s) {
        Ok(Value::Object(m)) => Ok(m),
        _ => Err(Error::parse(path.display(), line, "metadata is not a JSON object")),
    }
}

fn parse_text(text: &str, path: &Path) -> Result<(Matrix, Map<String, Value>)> {
    let name = path.display();
    let mut meta = Map::new();
    let mut d: Option<usize> = None;
    let mut rows: Vec<f64> = Vec::new();
    let mut nrows = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# meta ") {
            meta = parse_meta(rest, path, lineno)?;
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match d {
            None => {
                d = Some(
                    line.parse()
                        .ok()
                        .filter(|&d: &usize| d > 0)
                        .ok_or_else(|| Error::parse(&name, lineno, "expected the dimension d"))?,
                );
            }
            Some(d) => {
                let before = rows.len();
                for p in line.split_whitespace() {
                    let x: f64 = p
                        .parse()
                        .map_err(|_| Error::parse(&name, lineno, format!("bad number {p:?}")))?;
                    rows.push(x);
                }
                if rows.len() - before != d {
                    return Err(Error::parse(&name, lineno, format!("expected {d} values")));
                }
                nrows += 1;
                if nrows > d {
                    return Err(Error::parse(&name, lineno, "more than d rows"));
                }
            }
        }
    }
    let d = d.ok_or_else(|| Error::parse(&name, 1, "missing dimension line"))?;
    if nrows != d {
        return Err(Error::parse(&name, text.lines().count(), format!("expected {d} rows, found {nrows}")));
    }
    Ok((Matrix::from_row_slice(d, d, &rows), meta))
}

fn parse_binary(bytes: &[u8], path: &Path) -> Result<(Matrix, Map<String, Value>)> {
    let bad = |m: &str| Error::parse(path.display(), 0, m.to_string());
    let mut pos = 4;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated file"))?;
        pos += n;
        Ok(s)
    };
    let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let d = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
    if d == 0 || d > 1 << 16 {
        return Err(bad("implausible dimension"));
    }
    let meta_len = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
    let meta_bytes = take(meta_len)?;
    let meta_str = std::str::from_utf8(meta_bytes).map_err(|_| bad("metadata is not UTF-8"))?;
    let meta = parse_meta(meta_str, path, 0)?;
    let data = take(8 * d * d)?;
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok((Matrix::from_row_slice(d, d, &values), meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use rand::SeedableRng;

    #[test]
    fn round_trips_are_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut w = AlignmentMatrix::from_matrix(random_orthogonal(5, &mut rng)).unwrap();
        w.residual = 0.125;
        w.iterations_used = 4;
        w.status = AlignStatus::Converged;
        let extra = serde_json::json!({"provenance": "identical-strings"});
        let dir = tempfile::tempdir().unwrap();
        for binary in [false, true] {
            let p = dir.path().join(if binary { "w.bin" } else { "w.txt" });
            if binary {
                save_alignment_binary(&w, &extra, &p).unwrap();
            } else {
                save_alignment(&w, &extra, &p).unwrap();
            }
            let f = load_alignment(&p).unwrap();
            assert_eq!(f.alignment, w);
            assert_eq!(f.meta["provenance"], "identical-strings");
        }
    }

    #[test]
    fn malformed_text_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        fs::write(&p, "2\n1 0\n0 x\n").unwrap();
        assert!(matches!(load_alignment(&p), Err(Error::Parse { line: 3, .. })));
        fs::write(&p, "2\n1 0\n").unwrap();
        assert!(load_alignment(&p).is_err());
    }
}
