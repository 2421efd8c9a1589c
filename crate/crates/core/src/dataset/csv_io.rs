use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Bare integers are column indices; anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = match label {
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => {
            return Err(parse_err(1, format!("label column index {i} out of range")))
        }
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .or_else(|| name.parse::<usize>().ok().filter(|&i| i < header.len()))
            .ok_or_else(|| parse_err(1, format!("label column {name:?} not found")))?,
    };
    if header.len() < 2 {
        return Err(parse_err(1, "need a label column and at least one feature".into()));
    }

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut values: Vec<F> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| parse_err(line, format!("ragged or malformed row: {e}")))?;
        for (col, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if col == label_idx {
                let id = match class_names.iter().position(|c| c == cell) {
                    Some(id) => id,
                    None => {
                        class_names.push(cell.to_string());
                        class_names.len() - 1
                    }
                };
                labels.push(id);
            } else {
                let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    parse_err(
                        line,
                        format!("non-numeric value {cell:?} in column {:?}", header[col]),
                    )
                })?;
                values.push(F::lit(v));
            }
        }
    }

    let n = labels.len();
    if n < 2 {
        return Err(Error::dataset(format!("at least 2 samples required, got {n}")));
    }
    let features = Array2::from_shape_vec((n, feature_names.len()), values)
        .map_err(|e| Error::dataset(e.to_string()))?;
    Dataset::new(features, labels, feature_names, class_names)
}

/// Writes features followed by a label column holding class names.
pub fn write_csv<F: Scalar>(
    data: &Dataset<F>,
    path: impl AsRef<Path>,
    label_header: &str,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(label_header);
    w.write_record(&header).map_err(io_err)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (i, sample) in data.features().outer_iter().enumerate() {
        row.clear();
        // Display for floats is shortest-round-trip, so reloading is exact.
        row.extend(sample.iter().map(|v| v.to_string()));
        row.push(data.class_names()[data.labels()[i]].clone());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
