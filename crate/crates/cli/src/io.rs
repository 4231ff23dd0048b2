//! File and stdout plumbing shared by the subcommands.

use std::io::Write;
use std::path::Path;

use ggm_core::GgmParams;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_at, CliError, CliResult};

/// Version of every JSON document the binary writes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(io_at(path))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(io_at(path))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(io_at(p)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(io_at(Path::new("<stdout>")))
        }
    }
}

pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
    text.push('\n');
    emit(path, text.as_bytes())
}

/// Serializes `rows` as CSV with a header row.
pub fn emit_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> CliResult<()> {
    let label = path.unwrap_or(Path::new("<stdout>"));
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|source| CliError::Csv {
            path: label.to_path_buf(),
            source,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: label.to_path_buf(),
        source: e.into_error(),
    })?;
    emit(path, &bytes)
}

/// Nonblank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// One integer per line.
pub fn read_symbols(path: &Path) -> CliResult<Vec<i64>> {
    lines(&read_text(path)?)
        .map(|(n, l)| {
            l.parse()
                .map_err(|_| invalid(format!("{}:{n}: not an integer: {l:?}", path.display())))
        })
        .collect()
}

pub fn write_symbols(path: Option<&Path>, symbols: &[i64]) -> CliResult<()> {
    let mut text = String::with_capacity(symbols.len() * 3);
    for s in symbols {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    emit(path, text.as_bytes())
}

/// One finite real per line.
pub fn read_reals(path: &Path) -> CliResult<Vec<f64>> {
    lines(&read_text(path)?)
        .map(|(n, l)| match l.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(invalid(format!("{}:{n}: not a finite number: {l:?}", path.display()))),
        })
        .collect()
}

#[derive(Deserialize)]
struct ParamRow {
    mu: f64,
    alpha: f64,
    beta: f64,
}

/// CSV with header `mu,alpha,beta`, one row per symbol.
pub fn read_params(path: &Path) -> CliResult<Vec<GgmParams>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<ParamRow>().enumerate() {
        let row = row.map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let p = GgmParams::new(row.mu, row.alpha, row.beta)
            .map_err(|e| invalid(format!("{} row {}: {e}", path.display(), i + 1)))?;
        out.push(p);
    }
    Ok(out)
}
