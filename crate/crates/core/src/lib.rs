//! Hierarchical best-subset selection for linear regression.
//!
//! The crate selects at most `s` explanatory variables minimizing the
//! residual sum of squares, optionally subject to strong or weak hierarchical
//! constraints among large/medium/small product categories. It contains:
//!
//! - [`datakit`]: datasets, grouping specs, category hierarchies, CSV I/O and
//!   a synthetic scanner-panel generator.
//! - [`linalg`]: pivoted-QR least squares, incremental RSS updates and
//!   coefficient inference.
//! - [`solver`]: exact anytime branch-and-bound plus a brute-force enumerator.
//! - [`baselines`]: stepwise AIC selection and L1-regularized regression with
//!   OLS refit.
//! - [`evaluation`]: k-fold cross-validation and method comparison tables.

pub mod baselines;
pub mod datakit;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod solver;

pub use error::{Error, Result};
