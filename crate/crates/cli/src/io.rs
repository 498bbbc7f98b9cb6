//! Sample files: one number per line, `#` comment lines, optionally a
//! single-column CSV header. LF and CRLF are accepted; output is LF.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ampbound_core::Sample;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no values found")]
    Empty,
}

fn looks_like_header(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '"')
        && !matches!(s.to_ascii_lowercase().as_str(), "nan" | "inf" | "infinity" | "-inf")
}

/// Parses sample text. The first non-comment line may be a column name.
pub fn parse_sample(text: &str) -> Result<Sample, IngestError> {
    let mut values = Vec::new();
    let mut seen_data_line = false;
    for (i, raw) in text.split('\n').enumerate() {
        let line = i + 1;
        let l = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if l.contains(',') {
            return Err(IngestError::Parse {
                line,
                message: format!("expected a single column, found `{l}`"),
            });
        }
        if !seen_data_line {
            seen_data_line = true;
            if looks_like_header(l) {
                continue;
            }
        }
        let v: f64 = l.parse().map_err(|_| IngestError::Parse {
            line,
            message: format!("`{l}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(IngestError::Parse {
                line,
                message: format!("`{l}` is not finite"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Sample::ingested(values).expect("values checked finite"))
}

pub fn ingest_sample(path: &Path) -> Result<Sample, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_sample(&text)
}

/// Sample text with an optional `#` header line; values use the shortest
/// representation that reads back exactly.
pub fn format_sample(values: &[f64], header: Option<&str>) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    if let Some(h) = header {
        let _ = writeln!(out, "{h}");
    }
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}
