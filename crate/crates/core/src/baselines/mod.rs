//! Heuristic comparison methods: stepwise selection by AIC and L1-regularized
//! regression followed by an OLS refit of the selected variables.

mod lasso;
mod stepwise;

pub use lasso::{
    lasso_cd, lasso_path, lasso_select, lasso_select_with_grid, paper_grid, soft_threshold, LassoFit, LassoPath, LassoSelection,
    Standardized, CD_TOL, SUPPORT_TOL,
};
pub use stepwise::{aic, stepwise, Action, StepwiseStep, StepwiseTrace, StopReason};
