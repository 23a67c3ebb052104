use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::state::{SelectionState, Status};
use super::{SolveOutcome, SolverConfig};
use crate::datakit::{Dataset, Hierarchy, Mode};
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, IncrementalFit, LsqProblem};

/// RSS of the fit on every column that is not fixed out. No completion of
/// the node can do better, since completions use a subset of those columns.
pub fn lower_bound(state: &SelectionState, problem: &LsqProblem) -> f64 {
    problem.subset_rss(&state.open())
}

struct Node {
    state: SelectionState,
    bound: f64,
    depth: usize,
    id: u64,
}

// Max-heap order: the "greatest" node is popped first, so smaller bound,
// then greater depth, then smaller creation id wins.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Best feasible support seen so far. Updates are totally ordered by
/// (RSS, lexicographic support).
struct Incumbent {
    support: Vec<usize>,
    rss: f64,
}

impl Incumbent {
    fn offer(&mut self, support: Vec<usize>, rss: f64) {
        let better = match rss.total_cmp(&self.rss) {
            Ordering::Less => true,
            Ordering::Equal => support < self.support,
            Ordering::Greater => false,
        };
        if better {
            self.support = support;
            self.rss = rss;
        }
    }
}

/// Forward selection that only ever adds a variable together with the
/// ancestors its mode requires, so every intermediate support is feasible.
/// Stops at `s` variables or when no addition lowers the RSS.
pub fn greedy_incumbent(problem: &LsqProblem, hierarchy: &Hierarchy, mode: Mode, s: usize) -> (Vec<usize>, f64) {
    let p = problem.p();
    let mut state = SelectionState::free(p);
    let mut fit = IncrementalFit::new(problem);
    loop {
        let mut best: Option<(f64, SelectionState)> = None;
        for j in 0..p {
            if state.status(j) != Status::Free {
                continue;
            }
            let mut trial = state.clone();
            if trial.fix(j, Status::FixedIn).is_err() || trial.propagate(hierarchy, mode, s).is_err() {
                continue;
            }
            let delta = if trial.count_fixed_in() == state.count_fixed_in() + 1 {
                fit.delta_add(j)
            } else {
                let mut f = fit.clone();
                for k in trial.fixed_in() {
                    if state.status(k) == Status::Free {
                        f.add(k);
                    }
                }
                f.rss() - fit.rss()
            };
            if best.as_ref().is_none_or(|(d, _)| delta < *d) {
                best = Some((delta, trial));
            }
        }
        match best {
            Some((delta, trial)) if delta < 0.0 => {
                for k in trial.fixed_in() {
                    if state.status(k) == Status::Free {
                        fit.add(k);
                    }
                }
                state = trial;
            }
            _ => break,
        }
    }
    let support = state.fixed_in();
    let rss = problem.subset_rss(&support);
    (support, rss)
}

/// Best-first branch-and-bound for the basic, strong and weak models.
///
/// Nodes are ordered by (lower bound, deeper first, creation order). At each
/// node the free variable whose single addition lowers the RSS of the
/// fixed-in fit the most is branched on, fixed-in child first. Nodes whose
/// bound is not below the incumbent RSS are pruned.
pub fn solve(ds: &Dataset, hierarchy: &Hierarchy, config: &SolverConfig) -> Result<SolveOutcome> {
    let start = Instant::now();
    let s = config.s;
    if s == 0 {
        return Err(Error::Config("cardinality bound s must be at least 1".into()));
    }
    if !(config.tolerance >= 0.0) {
        return Err(Error::Config("optimality tolerance must be >= 0".into()));
    }
    let p = ds.p();
    let empty = Hierarchy::empty();
    let hierarchy = if config.mode == Mode::Basic { &empty } else { hierarchy };
    if let Some(t) = hierarchy.triples().iter().find(|t| [Some(t.large), Some(t.medium), t.small].iter().flatten().any(|&j| j >= p)) {
        return Err(Error::Dimension(format!("hierarchy chain {t:?} references a column beyond p = {p}")));
    }

    if s >= p {
        let best = ols_fit(ds, &vec![true; p])?;
        return Ok(SolveOutcome {
            mode: config.mode,
            s,
            best_bound: best.rss,
            best,
            proven_optimal: true,
            nodes_explored: 0,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }

    let problem = LsqProblem::new(ds);
    let (support, rss) = greedy_incumbent(&problem, hierarchy, config.mode, s);
    let mut inc = Incumbent { support, rss };

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut root = SelectionState::free(p);
    if root.propagate(hierarchy, config.mode, s).is_ok() {
        let bound = lower_bound(&root, &problem);
        if bound < inc.rss {
            heap.push(Node {
                state: root,
                bound,
                depth: 0,
                id: next_id,
            });
        }
        next_id += 1;
    }

    let mut nodes = 0u64;
    let mut truncated = false;
    while let Some(top) = heap.peek() {
        if top.bound >= inc.rss || inc.rss <= top.bound * (1.0 + config.tolerance) {
            break;
        }
        if config.time_limit.is_some_and(|lim| start.elapsed() >= lim)
            || config.node_limit.is_some_and(|lim| nodes >= lim)
        {
            truncated = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        nodes += 1;

        let fixed_in = node.state.fixed_in();
        let fit = IncrementalFit::with_support(&problem, &fixed_in);
        inc.offer(fixed_in, fit.rss());

        let mut branch: Option<(usize, f64)> = None;
        for j in node.state.free_vars() {
            let d = fit.delta_add(j);
            if branch.is_none_or(|(_, bd)| d < bd) {
                branch = Some((j, d));
            }
        }
        let Some((j, _)) = branch else { continue };

        let parent_open = node.state.open();
        for to in [Status::FixedIn, Status::FixedOut] {
            let mut child = node.state.clone();
            if child.fix(j, to).is_err() || child.propagate(hierarchy, config.mode, s).is_err() {
                continue;
            }
            let count_in = child.count_fixed_in();
            if count_in == s {
                let support = child.fixed_in();
                let rss = problem.subset_rss(&support);
                inc.offer(support, rss);
                continue;
            }
            let open = child.open();
            if open.len() <= s {
                let rss = problem.subset_rss(&open);
                inc.offer(open, rss);
                continue;
            }
            let bound = if open == parent_open {
                node.bound
            } else {
                problem.subset_rss(&open)
            };
            if bound < inc.rss {
                heap.push(Node {
                    state: child,
                    bound,
                    depth: node.depth + 1,
                    id: next_id,
                });
            }
            next_id += 1;
        }
    }

    let mut mask = vec![false; p];
    for &j in &inc.support {
        mask[j] = true;
    }
    let best = ols_fit(ds, &mask)?;
    let open_bound = heap.peek().map(|n| n.bound);
    let (proven_optimal, best_bound) = match open_bound {
        None => (true, best.rss),
        Some(b) if !truncated => (true, b.min(best.rss)),
        Some(b) => (best.rss <= b * (1.0 + config.tolerance), b.min(best.rss)),
    };
    Ok(SolveOutcome {
        mode: config.mode,
        s,
        best,
        proven_optimal,
        nodes_explored: nodes,
        wall_time: start.elapsed().as_secs_f64(),
        best_bound,
    })
}
