//! Dataset ingest and atomic artifact writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::HarnessError;

/// One input row: optional identifier, SMILES and activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub id: String,
    pub smiles: String,
    pub label: f64,
}

/// Reads a CSV with a header containing `smiles` and `label` and optionally
/// `id`. Rows without an id are named by their 0-based data-row index.
pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>, HarnessError> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_dataset_from(file, path)
}

pub fn read_dataset_from<R: std::io::Read>(reader: R, path: &Path) -> Result<Vec<DatasetRow>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| HarnessError::csv(path, 1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let smiles_col = column("smiles").ok_or_else(|| HarnessError::MissingColumn {
        path: path.display().to_string(),
        column: "smiles".into(),
    })?;
    let label_col = column("label").ok_or_else(|| HarnessError::MissingColumn {
        path: path.display().to_string(),
        column: "label".into(),
    })?;
    let id_col = column("id");
    let mut rows = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| HarnessError::csv(path, line, e.to_string()))?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let label = field(label_col)
            .parse::<f64>()
            .map_err(|_| HarnessError::csv(path, line, format!("label '{}' is not a number", field(label_col))))?;
        rows.push(DatasetRow {
            id: id_col.map_or_else(|| k.to_string(), |c| field(c).to_string()),
            smiles: field(smiles_col).to_string(),
            label,
        });
    }
    Ok(rows)
}

/// Writes via a temporary file in the target directory and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::json(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut text = String::new();
    for row in rows {
        text.push_str(&serde_json::to_string(row).map_err(|e| HarnessError::json(path, e))?);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| HarnessError::csv(path, k + 1, format!("invalid JSON: {e}"))))
        .collect()
}
