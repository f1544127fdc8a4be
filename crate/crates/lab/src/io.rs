//! Plain-text formats: point sets and distance matrices as CSV, everything else as JSON.

use std::fs;
use std::path::{Path, PathBuf};

use ganlab_core::eval::DistanceMatrix;
use ganlab_core::numerics::Matrix;
use ganlab_core::synth::{Block, PointSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, LabError, Result};

/// Block layout and scales stored next to a point-set CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSidecar {
    pub blocks: Vec<Block>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
}

/// `points.csv` → `points.blocks.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".csv").unwrap_or(&name);
    csv_path.with_file_name(format!("{stem}.blocks.json"))
}

fn csv_error(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => LabError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => LabError::corrupt(path, "csv", format!("{other:?}")),
    }
}

/// Writes `x0,...,x{d-1}` rows plus the block sidecar.
pub fn write_points(path: &Path, points: &PointSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = (0..points.dim()).map(|i| format!("x{i}")).collect();
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in points.points().iter_rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().at(path)?;
    let sidecar = BlockSidecar {
        blocks: points.blocks().to_vec(),
        scales: points.scales().map(<[f64]>::to_vec),
    };
    write_json(&sidecar_path(path), &sidecar)
}

/// Reads a point-set CSV; the sidecar is optional and defaults to one block.
pub fn read_points(path: &Path) -> Result<PointSet> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    for (i, h) in header.iter().enumerate() {
        if h.trim() != format!("x{i}") {
            return Err(LabError::corrupt(
                path,
                "header",
                format!("column {i} is `{h}`, expected `x{i}`"),
            ));
        }
    }
    let d = header.len();
    if d == 0 {
        return Err(LabError::corrupt(path, "header", "no columns"));
    }
    let mut data = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != d {
            return Err(LabError::corrupt(
                path,
                format!("row {line}"),
                format!("{} fields, expected {d}", rec.len()),
            ));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| LabError::corrupt(path, format!("row {line}, x{j}"), e))?;
            data.push(v);
        }
    }
    let n = data.len() / d;
    let matrix = Matrix::new(n, d, data)?;
    let side = sidecar_path(path);
    if side.exists() {
        let s: BlockSidecar = read_json(&side)?;
        Ok(PointSet::with_blocks(matrix, s.blocks, s.scales)?)
    } else {
        Ok(PointSet::new(matrix))
    }
}

/// `query,d1,...,dk`, one row per query.
pub fn write_distances(path: &Path, m: &DistanceMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["query".to_string()];
    header.extend((1..=m.k()).map(|j| format!("d{j}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for i in 0..m.n_queries() {
        let mut rec = vec![i.to_string()];
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().at(path)
}

pub fn read_distances(path: &Path, label: &str) -> Result<DistanceMatrix> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let k = r.headers().map_err(|e| csv_error(path, e))?.len().saturating_sub(1);
    let mut data = Vec::new();
    let mut n = 0;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (j, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|e| LabError::corrupt(path, format!("row {line}, d{j}"), e))?;
            data.push(v);
        }
        n += 1;
    }
    Ok(DistanceMatrix::new(label, n, k, data)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::corrupt(path, "serialize", e))?;
    text.push('\n');
    fs::write(path, text).at(path)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).at(path)?;
    parse_json(path, &text)
}

pub(crate) fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        LabError::corrupt(path, field, e.into_inner())
    })
}
