//! Dataset CSV: a header of feature names plus an optional trailing `label`
//! column. Numbers use `.` as the decimal point regardless of locale.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{DataError, Dataset};
use crate::ensemble::FeatureSchema;

pub const LABEL_COLUMN: &str = "label";

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    parse_csv(file)
}

/// Rows and columns in errors are 1-based; row 1 is the first line after
/// the header.
pub fn parse_csv<R: Read>(reader: R) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let labeled = header.last().is_some_and(|h| h == LABEL_COLUMN);
    let width = header.len();
    let n_features = width - usize::from(labeled);
    let features = FeatureSchema::numeric(header[..n_features].to_vec())?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != width {
            return Err(DataError::Ragged { row, expected: width, got: record.len() });
        }
        let values = record
            .iter()
            .take(n_features)
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(DataError::Cell { row, col: j + 1, value: cell.to_string() }),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(values);
        if labeled {
            let name = &record[n_features];
            let idx = match classes.iter().position(|c| c == name) {
                Some(idx) => idx,
                None => {
                    classes.push(name.to_string());
                    classes.len() - 1
                }
            };
            labels.push(idx);
        }
    }
    let d = Dataset::new(features, rows)?;
    if labeled {
        d.with_labels(labels, classes)
    } else {
        Ok(d)
    }
}

/// Writes `d` with its label column when labeled. Values use the shortest
/// decimal form that reads back to the same double.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = d.features().names().iter().map(String::as_str).collect();
    if d.is_labeled() {
        header.push(LABEL_COLUMN);
    }
    w.write_record(&header)?;
    for (i, row) in d.rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(f64::to_string).collect();
        if let Some(l) = d.label(i) {
            cells.push(d.classes()[l].clone());
        }
        w.write_record(&cells)?;
    }
    w.flush().map_err(|e| DataError::Csv(e.into()))?;
    Ok(())
}

pub fn csv_string(d: &Dataset) -> Result<String, DataError> {
    let mut buf = Vec::new();
    write_csv(d, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
