//! OLS fitting on a sample and the influence diagnostics behind the
//! informative filter.

use nalgebra::DVector;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gram::{GramState, DEGENERATE_LEVERAGE_TOL};

/// Residual variances at or below this are treated as an exact fit.
pub const ZERO_VARIANCE_TOL: f64 = 1e-14;

/// An ordinary least squares fit over a sample, with the per-unit quantities
/// influence measures need.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta_hat: DVector<f64>,
    /// Residual mean square with denominator `n - k - 1`.
    pub sigma2_hat: f64,
    /// Fitted values, in sample order.
    pub fitted: DVector<f64>,
    /// Residuals, in sample order; `fitted + residuals` reproduces the
    /// sampled responses exactly.
    pub residuals: DVector<f64>,
    /// Leverage scores, in sample order.
    pub leverages: DVector<f64>,
}

impl OlsFit {
    pub fn len(&self) -> usize {
        self.fitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitted.len() == 0
    }

    /// Number of coefficients `k + 1`.
    pub fn dim(&self) -> usize {
        self.beta_hat.len()
    }

    /// Prediction at an arbitrary row vector.
    pub fn predict(&self, x: nalgebra::DVectorView<'_, f64>) -> f64 {
        self.beta_hat.dot(&x)
    }
}

/// Fits `beta = (X'X)^-1 X'Y` on the sampled rows.
pub fn fit_ols(dataset: &Dataset, sample: &[usize]) -> Result<OlsFit> {
    let y = dataset.response().ok_or(Error::MissingResponse)?;
    let n = sample.len();
    let p = dataset.dim();
    if n <= p {
        return Err(Error::InsufficientDof { n, dim: p });
    }
    let state = GramState::build(dataset, sample)?;
    let mut xty = DVector::zeros(p);
    for &i in sample {
        xty.axpy(y[i], &dataset.row(i), 1.0);
    }
    let beta_hat = state.gram_inv() * &xty;
    let mut fitted = DVector::zeros(n);
    let mut residuals = DVector::zeros(n);
    let mut leverages = DVector::zeros(n);
    let mut rss = 0.0;
    for (pos, &i) in sample.iter().enumerate() {
        let x = dataset.row(i);
        fitted[pos] = beta_hat.dot(&x);
        residuals[pos] = y[i] - fitted[pos];
        leverages[pos] = state.leverage(x);
        rss += residuals[pos] * residuals[pos];
    }
    Ok(OlsFit {
        beta_hat,
        sigma2_hat: rss / (n - p) as f64,
        fitted,
        residuals,
        leverages,
    })
}

/// Cook's distance of the unit at `pos` (a position within the sample, not a
/// dataset row index):
///
/// `C = e^2 / ((k+1) sigma2) * h / (1 - h)^2`
///
/// When the fit is exact (residual variance ~ 0) nothing is influential and
/// the distance is zero by convention.
pub fn cooks_distance(fit: &OlsFit, pos: usize) -> Result<f64> {
    if pos >= fit.len() {
        return Err(Error::ShapeMismatch(format!(
            "position {pos} out of range for a fit over {} rows",
            fit.len()
        )));
    }
    let h = fit.leverages[pos];
    if h >= 1.0 - DEGENERATE_LEVERAGE_TOL {
        return Err(Error::DegenerateLeverage {
            index: pos,
            leverage: h,
        });
    }
    if fit.sigma2_hat <= ZERO_VARIANCE_TOL {
        log::debug!("zero residual variance: Cook's distance defined as 0");
        return Ok(0.0);
    }
    let e = fit.residuals[pos];
    let p = fit.dim() as f64;
    Ok(e * e / (p * fit.sigma2_hat) * h / ((1.0 - h) * (1.0 - h)))
}
