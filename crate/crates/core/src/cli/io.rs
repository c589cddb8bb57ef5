use std::io::Write;
use std::path::Path;

use super::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes to a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let err = |e: std::io::Error| CliError::config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// Reads the `y` column of a headed CSV file.
pub fn read_series(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::config(format!("cannot read data file {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::config(format!("data header: {e}")))?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "y")
        .ok_or_else(|| CliError::config("data file has no `y` column"))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(format!("data row {}: {e}", i + 1)))?;
        let field = rec.get(col).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::config(format!("data row {}: `{field}` is not a number", i + 1)))?;
        if !v.is_finite() {
            return Err(CliError::config(format!("data row {}: non-finite value", i + 1)));
        }
        out.push(v);
    }
    Ok(out)
}
