//! Response vector plus candidate covariates, and CSV ingestion.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A regression dataset. The intercept is implicit and never stored in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
}

impl Dataset {
    /// Validates and builds a dataset: `n >= 1`, all values finite, no
    /// constant covariate column.
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no observations".into()));
        }
        if x.nrows() != n {
            return Err(Error::InvalidDataset(format!(
                "response has {n} rows but covariates have {}",
                x.nrows()
            )));
        }
        if names.len() != x.ncols() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} covariates",
                names.len(),
                x.ncols()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(
                "response contains non-finite values".into(),
            ));
        }
        for (j, col) in x.column_iter().enumerate() {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "covariate '{}' contains non-finite values",
                    names[j]
                )));
            }
            if col.iter().all(|&v| v == col[0]) {
                return Err(Error::InvalidDataset(format!(
                    "covariate '{}' is constant (the intercept is implicit)",
                    names[j]
                )));
            }
        }
        Ok(Dataset { y, x, names })
    }

    /// Convenience constructor from a response and covariate columns, named `x1..xp`.
    pub fn from_columns(y: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "covariate column has {} rows, response has {n}",
                c.len()
            )));
        }
        let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Dataset::new(DVector::from_vec(y), x, names)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of candidate covariates.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Copy of the dataset with the response multiplied by `factor`.
    pub fn scale_response(&self, factor: f64) -> Result<Self> {
        Dataset::new(&self.y * factor, self.x.clone(), self.names.clone())
    }

    pub fn from_csv_path(path: impl AsRef<Path>, response: &str) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Csv(format!("cannot open {}: {e}", path.as_ref().display())))?;
        Dataset::from_csv_reader(file, response)
    }

    /// Reads a headed CSV. `response` names the response column; every other
    /// column becomes a candidate covariate in file order. Rows are numbered
    /// from 1 at the first data row.
    pub fn from_csv_reader<R: Read>(reader: R, response: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let resp_col = headers
            .iter()
            .position(|h| h == response)
            .ok_or_else(|| Error::Config(format!("response column '{response}' not in header")))?;

        let mut y = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len() - 1];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            if record.len() != headers.len() {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            let mut k = 0;
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: format!("non-numeric value '{cell}'"),
                })?;
                if c == resp_col {
                    y.push(v);
                } else {
                    cols[k].push(v);
                    k += 1;
                }
            }
        }
        let n = y.len();
        let names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != resp_col)
            .map(|(_, h)| h.clone())
            .collect();
        let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Dataset::new(DVector::from_vec(y), x, names)
    }
}
