//! The `wgrid` file formats.
//!
//! JSON: `{"dim": n, "shape": [N, ...], "weights": [...], "values": [...]}`
//! with row-major cell arrays. CSV, one dimension only: a header line
//! followed by `index,weight,value` rows with indices `0, 1, ..., N-1`.

use std::path::Path;

use meanosc_core::{Grid, WeightedGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed wgrid JSON at `{path}`: {message}")]
    Json { path: String, message: String },
    #[error("malformed wgrid CSV: {0}")]
    Csv(String),
    #[error("invalid wgrid: {0}")]
    Invalid(#[from] meanosc_core::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WgridJson {
    dim: usize,
    shape: Vec<usize>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    index: usize,
    weight: f64,
    value: f64,
}

/// Lower-case hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_json(text: &str) -> Result<WeightedGrid, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: WgridJson = serde_path_to_error::deserialize(de).map_err(|e| FormatError::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if raw.dim != raw.shape.len() {
        return Err(FormatError::Json {
            path: "dim".into(),
            message: format!(
                "dim = {} but shape has {} entries",
                raw.dim,
                raw.shape.len()
            ),
        });
    }
    let grid = Grid::from_shape(&raw.shape)?;
    Ok(WeightedGrid::new(grid, raw.weights, raw.values)?)
}

pub fn parse_csv(text: &str) -> Result<WeightedGrid, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for (line, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| FormatError::Csv(e.to_string()))?;
        if row.index != line {
            return Err(FormatError::Csv(format!(
                "row {} has index {}, expected {line}",
                line + 2,
                row.index
            )));
        }
        weights.push(row.weight);
        values.push(row.value);
    }
    Ok(WeightedGrid::from_1d(weights, values)?)
}

/// Parses by extension: `.csv` is CSV, anything else JSON. Returns the grid
/// and the digest of the file's bytes.
pub fn load(path: &Path) -> Result<(WeightedGrid, String), FormatError> {
    let bytes = std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let wg = if is_csv {
        parse_csv(&text)?
    } else {
        parse_json(&text)?
    };
    Ok((wg, digest(&bytes)))
}

/// Pretty JSON with a trailing newline; stable across runs.
pub fn to_json(wg: &WeightedGrid) -> String {
    let raw = WgridJson {
        dim: wg.grid().dim(),
        shape: wg.grid().shape(),
        weights: wg.weights().to_vec(),
        values: wg.values().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("finite floats serialize");
    s.push('\n');
    s
}
