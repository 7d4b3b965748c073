//! Data containers and the standardization convention.
//!
//! All fitting routines work on a [`StandardizedDesign`]: columns are
//! centered and scaled so that `xᵀx = n` for every column (population
//! variance 1), and the response is centered but not scaled. The intercept
//! is absorbed by the centering and recovered on the raw scale as
//! `y_center − Σ βⱼ center_j / scale_j`.

use nalgebra::{DMatrix, DVector};
use std::path::Path;

use crate::error::{Error, Result};

/// A raw regression dataset: `n` rows of `p` predictors plus a response.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::invalid(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() < 2 || x.ncols() == 0 {
            return Err(Error::invalid("need at least 2 rows and 1 predictor"));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("design and response must be finite"));
        }
        Ok(Dataset { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// A centered and scaled design ready for penalized fitting.
///
/// `xs` has centered columns scaled to satisfy `xs_jᵀ xs_j = n` exactly (up
/// to rounding); `ys` is the centered response. Center/scale vectors allow
/// mapping coefficients and intervals back to the raw scale.
#[derive(Clone, Debug)]
pub struct StandardizedDesign {
    pub xs: DMatrix<f64>,
    pub ys: DVector<f64>,
    pub col_center: DVector<f64>,
    pub col_scale: DVector<f64>,
    pub y_center: f64,
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.xs.nrows()
    }

    pub fn p(&self) -> usize {
        self.xs.ncols()
    }

    /// Raw-scale intercept implied by standardized coefficients `beta`.
    pub fn intercept(&self, beta: &DVector<f64>) -> f64 {
        let mut adj = 0.0;
        for j in 0..self.p() {
            adj += beta[j] * self.col_center[j] / self.col_scale[j];
        }
        self.y_center - adj
    }

    /// Map standardized coefficients to the raw predictor scale.
    pub fn raw_coefficients(&self, beta: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.p(), |j, _| beta[j] / self.col_scale[j])
    }
}

/// Center and scale a dataset. Fails on (numerically) constant columns,
/// which carry no signal and cannot be put on the common scale.
pub fn standardize(data: &Dataset) -> Result<StandardizedDesign> {
    let n = data.n();
    let p = data.p();
    let nf = n as f64;

    let y_center = data.y.sum() / nf;
    let ys = data.y.map(|v| v - y_center);

    let mut xs = data.x.clone();
    let mut col_center = DVector::zeros(p);
    let mut col_scale = DVector::zeros(p);
    for j in 0..p {
        let mut col = xs.column_mut(j);
        let center = col.sum() / nf;
        col.iter_mut().for_each(|v| *v -= center);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        let scale = (ss / nf).sqrt();
        if !(scale > 1e-12 * (center.abs() + 1.0)) {
            return Err(Error::invalid(format!(
                "column {j} is constant and cannot be standardized"
            )));
        }
        col.iter_mut().for_each(|v| *v /= scale);
        col_center[j] = center;
        col_scale[j] = scale;
    }

    Ok(StandardizedDesign {
        xs,
        ys,
        col_center,
        col_scale,
        y_center,
    })
}

/// Load a dataset from a headered CSV file.
///
/// `response` names the response column; every other column is a predictor.
/// Returns the dataset and predictor names in design-column order.
pub fn load_csv(path: &Path, response: &str) -> Result<(Dataset, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let resp_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::invalid(format!("response column '{response}' not found")))?;
    let pred_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != resp_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y_vals: Vec<f64> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::invalid(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::invalid(format!("row {}, column '{}': not a number: '{field}'", line + 2, headers[i]))
            })?;
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "row {}, column '{}': non-finite value",
                    line + 2,
                    headers[i]
                )));
            }
            if i == resp_idx {
                y_vals.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("csv contains no data rows"));
    }

    let n = rows.len();
    let p = pred_names.len();
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let y = DVector::from_vec(y_vals);
    Ok((Dataset::new(x, y)?, pred_names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy() -> Dataset {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 10.0, 2.0, 20.0, 3.0, 35.0, 4.0, 41.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 2.0, 5.0]);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn columns_scaled_to_sum_of_squares_n() {
        let sd = standardize(&toy()).unwrap();
        let n = sd.n() as f64;
        for j in 0..sd.p() {
            let ss: f64 = sd.xs.column(j).iter().map(|v| v * v).sum();
            assert_relative_eq!(ss, n, max_relative = 1e-12);
            let mean: f64 = sd.xs.column(j).sum() / n;
            assert_relative_eq!(mean, 0.0, epsilon = 1e-13);
        }
        assert_relative_eq!(sd.ys.sum(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn standardization_round_trips() {
        let data = toy();
        let sd = standardize(&data).unwrap();
        for j in 0..sd.p() {
            for i in 0..sd.n() {
                let back = sd.xs[(i, j)] * sd.col_scale[j] + sd.col_center[j];
                assert_relative_eq!(back, data.x[(i, j)], max_relative = 1e-12);
            }
        }
        for i in 0..sd.n() {
            assert_relative_eq!(sd.ys[i] + sd.y_center, data.y[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn intercept_reproduces_fitted_means_on_raw_scale() {
        let data = toy();
        let sd = standardize(&data).unwrap();
        let beta = DVector::from_vec(vec![0.7, -0.3]);
        let raw = sd.raw_coefficients(&beta);
        let intercept = sd.intercept(&beta);
        // Predictions must agree whichever scale they are computed on.
        for i in 0..sd.n() {
            let pred_std = sd.y_center + sd.xs.row(i).transpose().dot(&beta);
            let pred_raw = intercept + data.x.row(i).transpose().dot(&raw);
            assert_relative_eq!(pred_std, pred_raw, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_column_is_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let data = Dataset::new(x, y).unwrap();
        assert!(standardize(&data).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a,y,b\n1.0,10.0,4.0\n2.0,11.5,5.5\n3.25,12.0,6.0\n").unwrap();
        let (data, names) = load_csv(&path, "y").unwrap();
        assert_eq!(names, vec!["a", "b"]);
        assert_eq!(data.n(), 3);
        assert_eq!(data.p(), 2);
        assert_relative_eq!(data.x[(2, 0)], 3.25);
        assert_relative_eq!(data.y[1], 11.5);
    }

    #[test]
    fn csv_rejects_missing_and_nonnumeric() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,y\n1.0,x\n").unwrap();
        assert!(load_csv(&path, "y").is_err());
        std::fs::write(&path, "a,y\n1.0,NaN\n").unwrap();
        assert!(load_csv(&path, "y").is_err());
    }
}
