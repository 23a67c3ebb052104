//! K-fold cross-validation and side-by-side comparison of selection methods.

mod compare;
mod cv;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use compare::{compare, Comparison, ComparisonRow, SCHEMA};
pub use cv::{cross_validate, kfold_split, CvConfig, CvReport, FoldResult};

use crate::baselines::{lasso_select, stepwise, StopReason};
use crate::datakit::{Dataset, Hierarchy, Mode};
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, FitResult};
use crate::solver::{enumerate_exact, solve, SolverConfig};

/// A variable-selection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Stepwise,
    L1,
    /// Branch-and-bound under the given constraint set.
    Exact(Mode),
    /// Brute-force enumeration; a reference for small `p`.
    Exhaustive(Mode),
}

impl Method {
    /// The five methods of the comparison protocol.
    pub const PROTOCOL: [Method; 5] = [
        Method::Stepwise,
        Method::L1,
        Method::Exact(Mode::Basic),
        Method::Exact(Mode::Strong),
        Method::Exact(Mode::Weak),
    ];

    pub fn id(&self) -> String {
        match self {
            Method::Stepwise => "stepwise".into(),
            Method::L1 => "l1".into(),
            Method::Exact(m) => m.as_str().into(),
            Method::Exhaustive(m) => format!("exhaustive-{}", m.as_str()),
        }
    }

    /// Whether the method uses the hierarchy.
    pub fn needs_hierarchy(&self) -> bool {
        matches!(self, Method::Exact(m) | Method::Exhaustive(m) if *m != Mode::Basic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(m) = s.strip_prefix("exhaustive-") {
            return Ok(Method::Exhaustive(m.parse()?));
        }
        match s.as_str() {
            "stepwise" => Ok(Method::Stepwise),
            "l1" | "lasso" => Ok(Method::L1),
            other => other
                .parse::<Mode>()
                .map(Method::Exact)
                .map_err(|_| Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.id()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Result of running one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    pub s: usize,
    pub fit: FitResult,
    /// Exact methods only.
    pub proven_optimal: Option<bool>,
    pub best_bound: Option<f64>,
    pub nodes: Option<u64>,
    /// L1 only: the chosen penalty.
    pub lambda: Option<f64>,
    /// Stepwise only.
    pub stop: Option<StopReason>,
    pub warning: Option<String>,
    /// Selection plus refit, in seconds.
    pub wall_time: f64,
}

/// Selects at most `s` variables with `method` and fits them by OLS.
///
/// `s` is clamped to `p`. `time_limit` applies to the exact methods only.
pub fn run_method(
    ds: &Dataset,
    hierarchy: &Hierarchy,
    method: Method,
    s: usize,
    time_limit: Option<Duration>,
) -> Result<MethodRun> {
    let start = Instant::now();
    let s = s.min(ds.p());
    let mut run = MethodRun {
        method,
        s,
        fit: ols_fit(ds, &vec![false; ds.p()])?,
        proven_optimal: None,
        best_bound: None,
        nodes: None,
        lambda: None,
        stop: None,
        warning: None,
        wall_time: 0.0,
    };
    match method {
        Method::Stepwise => {
            let t = stepwise(ds, s)?;
            run.stop = Some(t.stop);
            run.fit = t.fit;
        }
        Method::L1 => {
            let sel = lasso_select(ds, s)?;
            run.lambda = sel.lambda();
            run.warning = sel.warning;
            run.fit = sel.fit;
        }
        Method::Exact(mode) | Method::Exhaustive(mode) if s > 0 => {
            let mut cfg = SolverConfig::new(s, mode);
            cfg.time_limit = time_limit;
            let out = if matches!(method, Method::Exact(_)) {
                solve(ds, hierarchy, &cfg)?
            } else {
                enumerate_exact(ds, hierarchy, &cfg)?
            };
            run.proven_optimal = Some(out.proven_optimal);
            run.best_bound = Some(out.best_bound);
            run.nodes = Some(out.nodes_explored);
            run.fit = out.best;
        }
        Method::Exact(_) | Method::Exhaustive(_) => {
            run.proven_optimal = Some(true);
            run.best_bound = Some(run.fit.rss);
            run.nodes = Some(0);
        }
    }
    run.wall_time = start.elapsed().as_secs_f64();
    Ok(run)
}
