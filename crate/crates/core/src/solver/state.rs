use crate::datakit::{Hierarchy, Mode, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    FixedIn,
    FixedOut,
    Free,
}

/// Partial assignment of the selection indicators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionState {
    status: Vec<Status>,
    count_fixed_in: usize,
}

/// Raised when propagation forces a variable both ways or the fixed-in
/// count exceeds the cardinality bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infeasible;

impl SelectionState {
    pub fn free(p: usize) -> Self {
        Self {
            status: vec![Status::Free; p],
            count_fixed_in: 0,
        }
    }

    pub fn from_statuses(status: Vec<Status>) -> Self {
        let count_fixed_in = status.iter().filter(|&&s| s == Status::FixedIn).count();
        Self {
            status,
            count_fixed_in,
        }
    }

    #[inline]
    pub fn status(&self, j: usize) -> Status {
        self.status[j]
    }

    pub fn statuses(&self) -> &[Status] {
        &self.status
    }

    #[inline]
    pub fn count_fixed_in(&self) -> usize {
        self.count_fixed_in
    }

    pub fn count_free(&self) -> usize {
        self.status.iter().filter(|&&s| s == Status::Free).count()
    }

    pub fn fixed_in(&self) -> Vec<usize> {
        self.with_status(|s| s == Status::FixedIn)
    }

    pub fn free_vars(&self) -> Vec<usize> {
        self.with_status(|s| s == Status::Free)
    }

    /// Columns that are not fixed out.
    pub fn open(&self) -> Vec<usize> {
        self.with_status(|s| s != Status::FixedOut)
    }

    fn with_status(&self, pred: impl Fn(Status) -> bool) -> Vec<usize> {
        self.status
            .iter()
            .enumerate()
            .filter_map(|(j, &s)| pred(s).then_some(j))
            .collect()
    }

    /// Fixes `j` to `to`. Returns whether anything changed.
    pub fn fix(&mut self, j: usize, to: Status) -> Result<bool, Infeasible> {
        debug_assert!(to != Status::Free);
        match self.status[j] {
            Status::Free => {
                self.status[j] = to;
                if to == Status::FixedIn {
                    self.count_fixed_in += 1;
                }
                Ok(true)
            }
            cur if cur == to => Ok(false),
            _ => Err(Infeasible),
        }
    }

    /// Runs the implication rules of `mode` to a fixpoint and checks the
    /// cardinality bound `s`.
    ///
    /// Strong: `In(small) => In(medium), In(large)`; `In(medium) => In(large)`;
    /// `Out(large) => Out(medium), Out(small)`; `Out(medium) => Out(small)`.
    /// Weak: `In(medium) => In(large)`; `In(small) => In(large)`;
    /// `Out(large) => Out(medium), Out(small)`.
    pub fn propagate(&mut self, hierarchy: &Hierarchy, mode: Mode, s: usize) -> Result<(), Infeasible> {
        if mode != Mode::Basic {
            loop {
                let mut changed = false;
                for t in hierarchy.triples() {
                    changed |= self.apply_rules(t, mode)?;
                }
                if !changed {
                    break;
                }
            }
        }
        if self.count_fixed_in > s {
            return Err(Infeasible);
        }
        Ok(())
    }

    fn apply_rules(&mut self, t: &Triple, mode: Mode) -> Result<bool, Infeasible> {
        use Status::{FixedIn, FixedOut};
        let mut changed = false;
        let (l, m) = (t.large, t.medium);
        if self.status[m] == FixedIn {
            changed |= self.fix(l, FixedIn)?;
        }
        if self.status[l] == FixedOut {
            changed |= self.fix(m, FixedOut)?;
        }
        if let Some(sm) = t.small {
            if self.status[sm] == FixedIn {
                changed |= self.fix(l, FixedIn)?;
                if mode == Mode::Strong {
                    changed |= self.fix(m, FixedIn)?;
                }
            }
            if self.status[l] == FixedOut {
                changed |= self.fix(sm, FixedOut)?;
            }
            if mode == Mode::Strong && self.status[m] == FixedOut {
                changed |= self.fix(sm, FixedOut)?;
            }
        }
        Ok(changed)
    }
}

/// Standalone form: returns the propagated state, or `None` when infeasible.
pub fn propagate(state: &SelectionState, hierarchy: &Hierarchy, mode: Mode, s: usize) -> Option<SelectionState> {
    let mut out = state.clone();
    out.propagate(hierarchy, mode, s).ok().map(|_| out)
}

/// Whether `support` satisfies the cardinality bound and the mode's constraints.
pub fn is_feasible(support: &[bool], hierarchy: &Hierarchy, mode: Mode, s: usize) -> bool {
    support.iter().filter(|&&b| b).count() <= s && hierarchy.admits(support, mode)
}
