//! CSV-M matrix files and atomic file output.
//!
//! A CSV-M file holds one matrix row per line, entries separated by single
//! commas, no header, `\n` line endings. Values are written with 17
//! significant digits so that parsing the output recovers every bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Round-trip-exact rendering with 17 significant digits; NaN is `nan`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

pub fn format_csvm(a: &Matrix) -> String {
    let mut out = String::with_capacity(a.rows() * a.cols() * 24);
    for i in 0..a.rows() {
        for (j, x) in a.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*x));
        }
        out.push('\n');
    }
    out
}

pub fn parse_csvm(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.split('\n').enumerate() {
        if line.is_empty() {
            // only a trailing newline may produce an empty line
            if text.split('\n').skip(lineno + 1).any(|l| !l.is_empty()) {
                return Err(Error::Parse { line: lineno + 1, reason: "empty line".into() });
            }
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let x: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                reason: format!("not a number: {:?}", field),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse { line: lineno + 1, reason: "non-finite entry".into() });
            }
            row.push(x);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    reason: format!("expected {} entries, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, reason: "empty matrix".into() });
    }
    Matrix::from_rows(&rows)
}

pub fn read_csvm(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    parse_csvm(&text)
}

pub fn write_csvm(path: &Path, a: &Matrix) -> Result<()> {
    write_atomic(path, format_csvm(a).as_bytes())
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::Io(format!("{}: {}", path.display(), e));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
