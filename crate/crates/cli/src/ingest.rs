//! CSV ingestion.
//!
//! UTF-8, comma separated, one header row, every cell a finite decimal
//! number. The response is picked by header name; every other column becomes
//! a predictor, in file order.

use std::path::Path;

use st2e_core::Dataset;
use thiserror::Error;

use crate::error::CliError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a finite number")]
    Parse { line: u64, column: String, value: String },
    #[error("response column `{0}` not found in header")]
    MissingResponse(String),
    #[error("{0}")]
    Dataset(#[from] st2e_core::Error),
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Predictors with zero variance. They are kept, never scaled.
    pub constant_columns: Vec<String>,
}

pub fn ingest_csv(path: &Path, response: &str, standardize: bool) -> Result<Ingested, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => IngestError::Io { path: path.display().to_string(), source },
            other => IngestError::Csv { line: 1, message: format!("{other:?}") },
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let response_col =
        header.iter().position(|h| h == response).ok_or_else(|| IngestError::MissingResponse(response.into()))?;

    let p = header.len() - 1;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |pos| pos.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |pos| pos.line());
        let mut target = 0;
        for (c, cell) in record.iter().enumerate() {
            let value = cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::Parse {
                line,
                column: header[c].clone(),
                value: cell.into(),
            })?;
            if c == response_col {
                y.push(value);
            } else {
                columns[target].push(value);
                target += 1;
            }
        }
    }

    let names: Vec<String> =
        header.iter().enumerate().filter(|(c, _)| *c != response_col).map(|(_, h)| h.clone()).collect();
    let constant_columns = names
        .iter()
        .zip(&columns)
        .filter(|(_, col)| col.windows(2).all(|w| w[0] == w[1]))
        .map(|(name, _)| name.clone())
        .collect();
    if standardize {
        for col in columns.iter_mut() {
            standardize_in_place(col);
        }
        let m = mean(&y);
        y.iter_mut().for_each(|v| *v -= m);
    }
    let dataset = Dataset::from_columns(columns, y, names)?;
    Ok(Ingested { dataset, constant_columns })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Centers to mean 0 and scales to unit sample standard deviation; constant columns are only centered.
fn standardize_in_place(col: &mut [f64]) {
    let m = mean(col);
    col.iter_mut().for_each(|v| *v -= m);
    let n = col.len();
    if n < 2 {
        return;
    }
    let sd = (col.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd > 0.0 {
        col.iter_mut().for_each(|v| *v /= sd);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn response_is_split_out() {
        let f = write("a,y,b\n1,2,3\n4,5,6\n7,9,8\n");
        let ing = ingest_csv(f.path(), "y", false).unwrap();
        assert_eq!(ing.dataset.names(), &["a", "b"]);
        assert_eq!(ing.dataset.response(), &[2.0, 5.0, 9.0]);
        assert_eq!(ing.dataset.column(1), &[3.0, 6.0, 8.0]);
    }

    #[test]
    fn bad_cell_is_named() {
        let f = write("a,y\n1,2\nfoo,3\n");
        let err = ingest_csv(f.path(), "y", false).unwrap_err();
        match err {
            IngestError::Parse { line, column, value } => {
                assert_eq!((line, column.as_str(), value.as_str()), (3, "a", "foo"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_response() {
        let f = write("a,b\n1,2\n3,4\n");
        assert!(matches!(ingest_csv(f.path(), "y", false), Err(IngestError::MissingResponse(_))));
    }

    #[test]
    fn constant_column_is_flagged_and_kept() {
        let f = write("a,c,y\n1,5,2\n2,5,1\n4,5,3\n");
        let ing = ingest_csv(f.path(), "y", true).unwrap();
        assert_eq!(ing.constant_columns, vec!["c".to_string()]);
        assert_eq!(ing.dataset.p(), 2);
        assert!(ing.dataset.column(1).iter().all(|v| *v == 0.0));
        let a = ing.dataset.column(0);
        assert!(a.iter().sum::<f64>().abs() < 1e-12);
        let var = a.iter().map(|v| v * v).sum::<f64>() / 2.0;
        assert!((var - 1.0).abs() < 1e-12);
        assert!(ing.dataset.response().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn two_rows_load() {
        let f = write("a,y\n1,2\n3,5\n");
        assert_eq!(ingest_csv(f.path(), "y", false).unwrap().dataset.n(), 2);
    }
}
