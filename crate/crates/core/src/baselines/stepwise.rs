use serde::{Deserialize, Serialize};

use crate::datakit::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, FitResult, LsqProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseStep {
    pub action: Action,
    pub variable: usize,
    /// AIC after the move.
    pub aic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The support reached `s` variables.
    ReachedSize,
    /// No single add or remove lowered the AIC.
    NoImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseTrace {
    /// AIC of the intercept-only model.
    pub initial_aic: f64,
    pub steps: Vec<StepwiseStep>,
    pub stop: StopReason,
    pub fit: FitResult,
}

/// `n ln(RSS / n) + 2 (k + 1)` with the RSS floored at `1e-12 * TSS`.
pub fn aic(rss: f64, tss: f64, n: usize, k: usize) -> f64 {
    let floor = (1e-12 * tss).max(f64::MIN_POSITIVE);
    let n = n as f64;
    n * (rss.max(floor) / n).ln() + 2.0 * (k as f64 + 1.0)
}

/// Bidirectional stepwise selection from the empty model.
///
/// Every iteration scores all single additions (ascending index) and then all
/// single removals (ascending index) and applies the move with the lowest
/// AIC; earlier moves win exact ties. Stops once `s` variables are selected
/// or no move lowers the AIC.
pub fn stepwise(ds: &Dataset, s: usize) -> Result<StepwiseTrace> {
    let p = ds.p();
    if s > p {
        return Err(Error::Config(format!("s = {s} exceeds p = {p}")));
    }
    let n = ds.n();
    let problem = LsqProblem::new(ds);
    let tss = problem.tss();
    let score = |support: &[usize]| aic(problem.subset_rss(support), tss, n, support.len());

    let mut support: Vec<usize> = Vec::new();
    let mut current = score(&support);
    let initial_aic = current;
    let mut steps = Vec::new();
    let stop = loop {
        if support.len() >= s {
            break StopReason::ReachedSize;
        }
        let mut best: Option<(f64, Action, usize)> = None;
        let mut consider = |a: f64, action, j| {
            if best.is_none_or(|(b, _, _)| a < b) {
                best = Some((a, action, j));
            }
        };
        for j in 0..p {
            if support.contains(&j) {
                continue;
            }
            let mut trial = support.clone();
            trial.push(j);
            trial.sort_unstable();
            consider(score(&trial), Action::Add, j);
        }
        for &j in &support {
            let trial: Vec<usize> = support.iter().copied().filter(|&k| k != j).collect();
            consider(score(&trial), Action::Remove, j);
        }
        match best {
            Some((a, action, j)) if a < current => {
                match action {
                    Action::Add => {
                        support.push(j);
                        support.sort_unstable();
                    }
                    Action::Remove => support.retain(|&k| k != j),
                }
                current = a;
                steps.push(StepwiseStep {
                    action,
                    variable: j,
                    aic: a,
                });
            }
            _ => break StopReason::NoImprovement,
        }
    };

    let mut mask = vec![false; p];
    for &j in &support {
        mask[j] = true;
    }
    Ok(StepwiseTrace {
        initial_aic,
        steps,
        stop,
        fit: ols_fit(ds, &mask)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_column_is_added_first() {
        let x0: Vec<f64> = (0..20).map(|i| ((i * 7) % 11) as f64).collect();
        let x1: Vec<f64> = (0..20).map(|i| ((i * 3) % 5) as f64).collect();
        let y = x0.clone();
        let ds = Dataset::from_columns_unchecked(&[x1, x0], y);
        let t = stepwise(&ds, 2).unwrap();
        assert_eq!(t.steps[0].action, Action::Add);
        assert_eq!(t.steps[0].variable, 1);
        assert!(t.steps[0].aic.is_finite());
    }

    #[test]
    fn aic_floor_keeps_values_finite() {
        assert!(aic(0.0, 10.0, 5, 1).is_finite());
        assert!(aic(0.0, 0.0, 5, 1).is_finite());
        assert_eq!(aic(1e-20, 10.0, 5, 0), aic(1e-11, 10.0, 5, 0));
    }

    #[test]
    fn s_zero_stops_immediately() {
        let ds = Dataset::from_columns_unchecked(&[vec![1.0, 2.0, 3.0]], vec![1.0, 2.0, 4.0]);
        let t = stepwise(&ds, 0).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.stop, StopReason::ReachedSize);
        assert!(stepwise(&ds, 2).is_err());
    }
}
