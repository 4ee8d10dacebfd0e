//! Tabular ingestion: CSV/TSV with a header row of column names and the row
//! id in the first column. Empty fields are missing values.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use ndarray::Array2;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Tsv,
}

impl DataFormat {
    /// Infer from the file extension; anything that is not `.tsv` reads as CSV.
    pub fn infer(path: &Path) -> Self {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) {
            DataFormat::Tsv
        } else {
            DataFormat::Csv
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Csv => b',',
            DataFormat::Tsv => b'\t',
        }
    }
}

#[derive(Debug)]
pub struct LoadedData {
    pub data: Dataset,
    pub n_missing: usize,
}

/// Load a dataset. When `label_col` is given that column becomes the binary
/// response instead of a feature; its values must be 0 or 1 and complete.
pub fn load_dataset(path: &Path, format: DataFormat, label_col: Option<&str>) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::Data {
            path: path.to_path_buf(),
            message: "need at least a row-id column and one value column".into(),
        });
    }
    let value_names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let label_idx = match label_col {
        Some(name) => Some(
            value_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?,
        ),
        None => None,
    };

    let mut row_ids = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut y_values: Vec<f64> = Vec::new();
    let mut n_missing = 0usize;

    for (row_no, row) in reader.records().enumerate() {
        let line = row_no + 2;
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: line,
            col: "-".into(),
            message: e.to_string(),
        })?;
        if row.len() != headers.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: line,
                col: "-".into(),
                message: format!("expected {} fields, got {}", headers.len(), row.len()),
            });
        }
        row_ids.push(row.get(0).unwrap_or("").to_string());
        for (k, field) in row.iter().skip(1).enumerate() {
            let parsed = if field.is_empty() {
                n_missing += 1;
                f64::NAN
            } else {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    col: value_names[k].clone(),
                    message: format!("not a number: '{field}'"),
                })?
            };
            if Some(k) == label_idx {
                if parsed != 0.0 && parsed != 1.0 {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        row: line,
                        col: value_names[k].clone(),
                        message: format!("label must be 0 or 1, got '{field}'"),
                    });
                }
                y_values.push(parsed);
            } else {
                values.push(parsed);
            }
        }
    }

    let n = row_ids.len();
    let p = value_names.len() - usize::from(label_idx.is_some());
    let x = Array2::from_shape_vec((n, p), values).expect("row-major fill");
    let col_names: Vec<String> = value_names
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != label_idx)
        .map(|(_, c)| c.clone())
        .collect();
    let y = label_idx.map(|_| ndarray::Array1::from_vec(y_values));
    let data = Dataset::with_missing(x, col_names, row_ids, y)?;
    Ok(LoadedData { data, n_missing })
}

/// Write a dataset in the layout `load_dataset` reads back: row id first,
/// then the response (as `y`, when present), then the features. Missing
/// cells are written as empty fields.
pub fn write_dataset<W: Write>(mut w: W, data: &Dataset, format: DataFormat) -> Result<()> {
    let sep = format.delimiter() as char;
    let mut header = String::from("id");
    if data.y().is_some() {
        header.push(sep);
        header.push('y');
    }
    for name in data.col_names() {
        header.push(sep);
        header.push_str(name);
    }
    writeln!(w, "{header}")?;
    for i in 0..data.n_rows() {
        let mut line = data.row_ids()[i].clone();
        if let Some(y) = data.y() {
            line.push(sep);
            line.push_str(&y[i].to_string());
        }
        for j in 0..data.n_cols() {
            line.push(sep);
            let v = data.x()[[i, j]];
            if v.is_finite() {
                line.push_str(&v.to_string());
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
