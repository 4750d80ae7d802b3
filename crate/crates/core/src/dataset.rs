//! Dataset and prediction-set containers.
//!
//! A [`Dataset`] holds the full pool of `N` candidate rows: a design matrix
//! whose first column is the intercept, an optional response vector, and row
//! identifiers. Rows are stored transposed (one contiguous column per row) so
//! that the inner loops of the exchange algorithms read each row with unit
//! stride.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};

/// A pool of regression observations: `N` rows of `(1, x_1, ..., x_k)` with
/// optional responses.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Transposed design, `(k+1) x N`; column `i` is the row vector `x_i`.
    xt: DMatrix<f64>,
    y: Option<DVector<f64>>,
    ids: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset from a design matrix that already carries the
    /// intercept column.
    pub fn from_design(x: DMatrix<f64>, y: Option<DVector<f64>>) -> Result<Self> {
        let n = x.nrows();
        let dim = x.ncols();
        if n <= dim {
            return Err(Error::ShapeMismatch(format!(
                "need more rows than design columns, got {n} rows and {dim} columns"
            )));
        }
        for i in 0..n {
            if x[(i, 0)] != 1.0 {
                return Err(Error::ShapeMismatch(format!(
                    "first design column must be the intercept; row {i} has {}",
                    x[(i, 0)]
                )));
            }
        }
        if let Some(y) = &y {
            if y.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "response length {} does not match {n} rows",
                    y.len()
                )));
            }
        }
        Ok(Self {
            xt: x.transpose(),
            y,
            ids: (0..n as u64).collect(),
        })
    }

    /// Builds a dataset from raw factor values, prepending the intercept.
    pub fn from_factors(factors: DMatrix<f64>, y: Option<DVector<f64>>) -> Result<Self> {
        let x = factors.insert_column(0, 1.0);
        Self::from_design(x, y)
    }

    /// Attaches (or replaces) the response vector.
    pub fn with_response(mut self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "response length {} does not match {} rows",
                y.len(),
                self.n_rows()
            )));
        }
        self.y = Some(y);
        Ok(self)
    }

    /// Replaces the default `0..N` row identifiers.
    pub fn with_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                self.n_rows()
            )));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.xt.ncols()
    }

    /// Number of factors `k` (excluding the intercept).
    pub fn n_factors(&self) -> usize {
        self.xt.nrows() - 1
    }

    /// Row dimension `k + 1` (including the intercept).
    pub fn dim(&self) -> usize {
        self.xt.nrows()
    }

    /// The row vector `x_i = (1, x_{i1}, ..., x_{ik})` as a contiguous view.
    pub fn row(&self, i: usize) -> DVectorView<'_, f64> {
        self.xt.column(i)
    }

    pub fn response(&self) -> Option<&DVector<f64>> {
        self.y.as_ref()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Materializes the `n x (k+1)` design matrix of the given rows.
    pub fn design_rows(&self, sample: &[usize]) -> DMatrix<f64> {
        let p = self.dim();
        let mut out = DMatrix::zeros(sample.len(), p);
        for (r, &i) in sample.iter().enumerate() {
            for c in 0..p {
                out[(r, c)] = self.xt[(c, i)];
            }
        }
        out
    }

    /// The sampled responses, in sample order.
    pub fn response_rows(&self, sample: &[usize]) -> Result<DVector<f64>> {
        let y = self.y.as_ref().ok_or(Error::MissingResponse)?;
        Ok(DVector::from_iterator(
            sample.len(),
            sample.iter().map(|&i| y[i]),
        ))
    }

    /// Checks that every index is distinct and within range.
    pub fn check_sample(&self, sample: &[usize]) -> Result<()> {
        let n_rows = self.n_rows();
        let mut seen = vec![false; n_rows];
        for &i in sample {
            if i >= n_rows {
                return Err(Error::ShapeMismatch(format!(
                    "sample index {i} out of range for {n_rows} rows"
                )));
            }
            if seen[i] {
                return Err(Error::ShapeMismatch(format!("duplicate sample index {i}")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Prediction points for the I-criterion: the matrix `X0` together with its
/// cached cross-product `X0' X0`.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    x0t: DMatrix<f64>,
    cross: DMatrix<f64>,
}

impl PredictionSet {
    /// Builds a prediction set from rows that already carry the intercept.
    pub fn from_design(x0: DMatrix<f64>) -> Result<Self> {
        if x0.nrows() == 0 {
            return Err(Error::ShapeMismatch("empty prediction set".into()));
        }
        for i in 0..x0.nrows() {
            if x0[(i, 0)] != 1.0 {
                return Err(Error::ShapeMismatch(format!(
                    "first prediction column must be the intercept; row {i} has {}",
                    x0[(i, 0)]
                )));
            }
        }
        let cross = x0.tr_mul(&x0);
        Ok(Self {
            x0t: x0.transpose(),
            cross,
        })
    }

    /// Builds a prediction set from raw factors, prepending the intercept.
    pub fn from_factors(factors: DMatrix<f64>) -> Result<Self> {
        Self::from_design(factors.insert_column(0, 1.0))
    }

    pub fn n_points(&self) -> usize {
        self.x0t.ncols()
    }

    pub fn dim(&self) -> usize {
        self.x0t.nrows()
    }

    pub fn point(&self, i: usize) -> DVectorView<'_, f64> {
        self.x0t.column(i)
    }

    /// The cached `X0' X0`.
    pub fn cross(&self) -> &DMatrix<f64> {
        &self.cross
    }
}
