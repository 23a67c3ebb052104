//! Dense least squares: pivoted QR, subset fits, incremental RSS updates,
//! fit metrics and classical coefficient inference.

mod inference;
mod matrix;
mod ols;
mod qr;
pub mod special;

pub use inference::{infer, star_code, CoefficientStat, InferenceReport, STAR_ALPHA};
pub use matrix::{axpy, dot, mean, norm2, Matrix};
pub use ols::{indices, ols_fit, r_squared, rmse, tss, FitResult, IncrementalFit, LsqProblem};
pub use qr::{lstsq, triangular_factor, Lstsq, PivotedQr, RANK_TOL};
