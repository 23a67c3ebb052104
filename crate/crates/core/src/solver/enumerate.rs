use std::time::Instant;

use super::{SolveOutcome, SolverConfig};
use crate::datakit::{Dataset, Hierarchy, Mode};
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, FitResult};

/// Largest `p` the brute-force enumerator accepts.
pub const ENUMERATION_MAX_P: usize = 25;

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub outcome: SolveOutcome,
    /// Number of feasible supports fitted.
    pub evaluated: u64,
    /// Smallest RSS among supports other than the reported optimum.
    pub second_best_rss: Option<f64>,
}

impl Enumeration {
    /// Whether the optimum is separated from every other support by more than `gap` in RSS.
    pub fn is_unique(&self, gap: f64) -> bool {
        self.second_best_rss.is_none_or(|r| r - self.outcome.best.rss > gap)
    }
}

/// Fits every feasible support of size at most `s` with [`ols_fit`].
pub fn enumerate_all(ds: &Dataset, hierarchy: &Hierarchy, config: &SolverConfig) -> Result<Enumeration> {
    let start = Instant::now();
    let p = ds.p();
    if p > ENUMERATION_MAX_P {
        return Err(Error::Config(format!(
            "enumeration refuses p = {p} (limit {ENUMERATION_MAX_P})"
        )));
    }
    let s = config.s.min(p);
    let mut best: Option<(FitResult, Vec<usize>)> = None;
    let mut second: Option<f64> = None;
    let mut evaluated = 0u64;
    let mut support = vec![false; p];
    for size in 0..=s {
        for combo in Combinations::new(p, size) {
            support.iter_mut().for_each(|b| *b = false);
            for &j in &combo {
                support[j] = true;
            }
            if config.mode != Mode::Basic && !hierarchy.admits(&support, config.mode) {
                continue;
            }
            let fit = ols_fit(ds, &support)?;
            evaluated += 1;
            let replace = match &best {
                None => true,
                Some((b, bsup)) => fit.rss < b.rss || (fit.rss == b.rss && combo < *bsup),
            };
            if replace {
                if let Some((old, _)) = best.take() {
                    second = Some(second.map_or(old.rss, |r: f64| r.min(old.rss)));
                }
                best = Some((fit, combo));
            } else {
                second = Some(second.map_or(fit.rss, |r| r.min(fit.rss)));
            }
        }
    }
    let (best, _) = best.expect("the empty support is always feasible");
    let outcome = SolveOutcome {
        mode: config.mode,
        s: config.s,
        best_bound: best.rss,
        best,
        proven_optimal: true,
        nodes_explored: evaluated,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(Enumeration {
        outcome,
        evaluated,
        second_best_rss: second,
    })
}

/// Brute-force oracle for [`super::solve`].
pub fn enumerate_exact(ds: &Dataset, hierarchy: &Hierarchy, config: &SolverConfig) -> Result<SolveOutcome> {
    enumerate_all(ds, hierarchy, config).map(|e| e.outcome)
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let cur = self.current.as_mut().expect("checked");
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - k + i {
                cur[i] += 1;
                for t in i + 1..k {
                    cur[t] = cur[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
