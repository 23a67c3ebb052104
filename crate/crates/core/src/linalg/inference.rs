use serde::{Deserialize, Serialize};

use super::ols::{indices, FitResult};
use super::qr::PivotedQr;
use super::special::student_t_two_sided;
use super::Matrix;
use crate::datakit::Dataset;
use crate::error::{Error, Result};

/// Significance threshold for the star marker.
pub const STAR_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStat {
    /// Column index, `None` for the intercept.
    pub index: Option<usize>,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub stars: String,
}

/// Classical OLS t-tests for the intercept and every selected coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub df: usize,
    pub sigma2: f64,
    pub rows: Vec<CoefficientStat>,
}

pub fn star_code(p: f64) -> &'static str {
    if p < STAR_ALPHA {
        "***"
    } else {
        ""
    }
}

pub fn infer(ds: &Dataset, fit: &FitResult) -> Result<InferenceReport> {
    let idx = indices(&fit.support);
    let n = ds.n();
    let k = idx.len();
    if n <= k + 1 {
        return Err(Error::InferenceUnavailable(format!(
            "n = {n} leaves no residual degrees of freedom for {k} coefficients plus intercept"
        )));
    }
    let df = n - k - 1;
    let mut design = Matrix::zeros(n, k + 1);
    design.col_mut(0).fill(1.0);
    for (c, &j) in idx.iter().enumerate() {
        design.col_mut(c + 1).copy_from_slice(ds.column(j));
    }
    let qr = PivotedQr::factor(&design);
    let diag = qr.inverse_gram_diagonal().ok_or_else(|| {
        Error::InferenceUnavailable(format!(
            "selected columns are rank deficient (rank {} of {})",
            qr.rank(),
            k + 1
        ))
    })?;
    let sigma2 = fit.rss / df as f64;
    let stat = |index: Option<usize>, name: String, estimate: f64, d: f64| {
        let std_error = (sigma2 * d).sqrt();
        let t_value = if std_error > 0.0 {
            estimate / std_error
        } else if estimate == 0.0 {
            0.0
        } else {
            estimate.signum() * f64::INFINITY
        };
        let p_value = student_t_two_sided(t_value, df as f64);
        CoefficientStat {
            index,
            name,
            estimate,
            std_error,
            t_value,
            p_value,
            stars: star_code(p_value).to_string(),
        }
    };
    let mut rows = Vec::with_capacity(k + 1);
    rows.push(stat(None, "intercept term".to_string(), fit.intercept, diag[0]));
    for (c, &j) in idx.iter().enumerate() {
        rows.push(stat(Some(j), ds.name(j).to_string(), fit.coefficients[j], diag[c + 1]));
    }
    Ok(InferenceReport { df, sigma2, rows })
}
