use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{ensure_dim, Error, Result};

/// Regression data: `m` inputs in `R^d` with scalar labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    inputs: Array2<f64>,
    labels: Array1<f64>,
}

impl Dataset {
    /// Builds a dataset from an `m x d` input matrix and `m` labels.
    pub fn new(inputs: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        let (m, d) = inputs.dim();
        if m == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset needs m >= 1 and d >= 1, got m={m}, d={d}"
            )));
        }
        ensure_dim("dataset labels", m, labels.len())?;
        if !inputs.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset inputs"));
        }
        if !labels.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset labels"));
        }
        Ok(Self { inputs, labels })
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn input(&self, j: usize) -> ArrayView1<'_, f64> {
        self.inputs.row(j)
    }

    /// Smallest `c` with `||x|| <= c` and `|y| <= c` for every sample.
    pub fn bound(&self) -> f64 {
        let x_max = self
            .inputs
            .axis_iter(Axis(0))
            .map(|x| x.dot(&x).sqrt())
            .fold(0.0, f64::max);
        let y_max = self.labels.iter().fold(0.0_f64, |acc, y| acc.max(y.abs()));
        x_max.max(y_max)
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select(Axis(0), rows),
            labels: self.labels.select(Axis(0), rows),
        }
    }

    /// Writes CSV with header `x0,...,x{d-1},y`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.dim())
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (x, y) in self.inputs.axis_iter(Axis(0)).zip(self.labels.iter()) {
            let mut fields: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            fields.push(y.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse("<csv>", e))?.clone();
        let width = headers.len();
        if width < 2 {
            return Err(Error::parse("<csv>", "need at least one input column and y"));
        }
        for (i, name) in headers.iter().take(width - 1).enumerate() {
            if name.trim() != format!("x{i}") {
                return Err(Error::parse(
                    "<csv>",
                    format!("column {i} should be named x{i}, found `{name}`"),
                ));
            }
        }
        if headers[width - 1].trim() != "y" {
            return Err(Error::parse("<csv>", "last column must be `y`"));
        }
        let d = width - 1;
        let mut flat = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse("<csv>", e))?;
            if record.len() != width {
                return Err(Error::parse(
                    "<csv>",
                    format!("row {} has {} fields, expected {width}", line + 1, record.len()),
                ));
            }
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("<csv>", format!("row {}: bad number `{field}`", line + 1)))?;
                if c < d {
                    flat.push(v);
                } else {
                    labels.push(v);
                }
            }
        }
        let m = labels.len();
        let inputs = Array2::from_shape_vec((m, d), flat).map_err(|e| Error::parse("<csv>", e))?;
        Dataset::new(inputs, Array1::from(labels))
    }
}
