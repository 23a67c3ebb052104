//! Synthetic scanner-panel data.
//!
//! Columns are laid out as demographics, then large, medium and small
//! category dummies. Medium category `i` belongs to large category
//! `i % large`; the first `chains` small categories each belong to medium
//! category `i % medium`, which yields one chain per such small category.
//! Medium categories without a chained small child contribute a bare
//! large/medium pair. Purchases are drawn independently per column and then
//! closed upward, so a purchased child always implies purchased ancestors.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, Group, Hierarchy, Mode, Triple, VariableMeta};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLayout {
    pub demographics: usize,
    pub large: usize,
    pub medium: usize,
    pub small: usize,
    /// Number of small categories (taken from the front) that get a parent chain.
    pub chains: usize,
}

impl CategoryLayout {
    pub fn p(&self) -> usize {
        self.demographics + self.large + self.medium + self.small
    }

    pub fn group_of(&self, j: usize) -> Group {
        if j < self.demographics {
            Group::C
        } else if j < self.demographics + self.large {
            Group::L
        } else if j < self.demographics + self.large + self.medium {
            Group::M
        } else {
            Group::S
        }
    }

    fn large_index(&self, i: usize) -> usize {
        self.demographics + i
    }

    fn medium_index(&self, i: usize) -> usize {
        self.demographics + self.large + i
    }

    fn small_index(&self, i: usize) -> usize {
        self.demographics + self.large + self.medium + i
    }

    fn validate(&self) -> Result<()> {
        if self.medium > 0 && self.large == 0 {
            return Err(Error::Config("medium categories need at least one large category".into()));
        }
        if self.chains > self.small {
            return Err(Error::Config(format!(
                "{} chains requested but only {} small categories",
                self.chains, self.small
            )));
        }
        if self.chains > 0 && self.medium == 0 {
            return Err(Error::Config("chains need at least one medium category".into()));
        }
        Ok(())
    }

    /// Column names: `demo_00`, `large_00`, `medium_00`, `small_00`, ...
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.p());
        out.extend((0..self.demographics).map(|i| format!("demo_{i:02}")));
        out.extend((0..self.large).map(|i| format!("large_{i:02}")));
        out.extend((0..self.medium).map(|i| format!("medium_{i:02}")));
        out.extend((0..self.small).map(|i| format!("small_{i:02}")));
        out
    }

    /// Chains implied by the layout, in column indices.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out = Vec::new();
        let mut medium_has_child = vec![false; self.medium];
        for s in 0..self.chains {
            let m = s % self.medium;
            medium_has_child[m] = true;
            out.push(Triple::new(
                self.large_index(m % self.large),
                self.medium_index(m),
                self.small_index(s),
            ));
        }
        for (m, has) in medium_has_child.iter().enumerate() {
            if !has {
                out.push(Triple::pair(self.large_index(m % self.large), self.medium_index(m)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub layout: CategoryLayout,
    /// True support, as column indices.
    pub support: Vec<usize>,
    /// True coefficients, aligned with `support`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Noise standard deviation before rounding `y` away from zero.
    pub sigma: f64,
    /// Hierarchy mode the true support must satisfy.
    pub mode: Mode,
    /// Probability that a demographic dummy is 1.
    pub demographic_prob: f64,
    /// Independent purchase probabilities before upward closure, per group.
    pub large_prob: f64,
    pub medium_prob: f64,
    pub small_prob: f64,
    /// Per-column overrides of the purchase probability.
    #[serde(default)]
    pub prob_overrides: BTreeMap<usize, f64>,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Config with default purchase probabilities and no planted signal.
    pub fn new(n: usize, layout: CategoryLayout, seed: u64) -> Self {
        Self {
            n,
            layout,
            support: Vec::new(),
            coefficients: Vec::new(),
            intercept: 1.0,
            sigma: 1.0,
            mode: Mode::Basic,
            demographic_prob: 0.5,
            large_prob: 0.3,
            medium_prob: 0.2,
            small_prob: 0.15,
            prob_overrides: BTreeMap::new(),
            seed,
        }
    }

    /// Draws a random support of exactly `size` columns that is feasible for
    /// `mode`, with integer coefficients in `{1, 2, 3}` (random sign unless
    /// `positive`). Uses its own stream derived from `seed`.
    pub fn plant(&mut self, mode: Mode, size: usize, positive: bool) -> Result<()> {
        self.layout.validate()?;
        let p = self.layout.p();
        if size > p {
            return Err(Error::Infeasible(format!("support size {size} exceeds p = {p}")));
        }
        let parents = parent_map(&self.layout.triples(), p);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut order: Vec<usize> = (0..p).collect();
        order.shuffle(&mut rng);
        let mut chosen = BTreeSet::new();
        for &j in &order {
            if chosen.len() == size {
                break;
            }
            let closure = required_closure(j, mode, &parents);
            let extra = closure.iter().filter(|c| !chosen.contains(*c)).count();
            if chosen.len() + extra <= size {
                chosen.extend(closure);
            }
        }
        if chosen.len() != size {
            return Err(Error::Infeasible(format!(
                "cannot plant a {mode}-feasible support of size {size} in this layout"
            )));
        }
        self.mode = mode;
        self.support = chosen.into_iter().collect();
        self.coefficients = self
            .support
            .iter()
            .map(|_| {
                let mag = rng.random_range(1..=3) as f64;
                if positive || rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        Ok(())
    }

    fn validate(&self, triples: &[Triple]) -> Result<()> {
        self.layout.validate()?;
        let p = self.layout.p();
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("noise sigma must be >= 0, got {}", self.sigma)));
        }
        if self.support.len() != self.coefficients.len() {
            return Err(Error::Config("support and coefficients differ in length".into()));
        }
        let probs = [self.demographic_prob, self.large_prob, self.medium_prob, self.small_prob];
        if probs.iter().chain(self.prob_overrides.values()).any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Config("probabilities must lie in [0, 1]".into()));
        }
        if let Some(&j) = self.prob_overrides.keys().find(|&&j| j >= p) {
            return Err(Error::Config(format!("probability override for column {j} but p = {p}")));
        }
        let mut z = vec![false; p];
        for &j in &self.support {
            if j >= p {
                return Err(Error::Config(format!("support index {j} out of range (p = {p})")));
            }
            if z[j] {
                return Err(Error::Config(format!("support lists column {j} twice")));
            }
            z[j] = true;
        }
        if !triples.iter().all(|t| t.admits(&z, self.mode)) {
            return Err(Error::Infeasible(format!(
                "true support violates the {} hierarchy constraints",
                self.mode
            )));
        }
        Ok(())
    }

    fn prob(&self, j: usize) -> f64 {
        if let Some(&q) = self.prob_overrides.get(&j) {
            return q;
        }
        match self.layout.group_of(j) {
            Group::C => self.demographic_prob,
            Group::L => self.large_prob,
            Group::M => self.medium_prob,
            Group::S => self.small_prob,
        }
    }
}

/// `parents[j]` lists the ancestors of column `j` as (large, Option<medium>).
fn parent_map(triples: &[Triple], p: usize) -> Vec<Option<(usize, Option<usize>)>> {
    let mut parents = vec![None; p];
    for t in triples {
        parents[t.medium] = Some((t.large, None));
        if let Some(s) = t.small {
            parents[s] = Some((t.large, Some(t.medium)));
        }
    }
    parents
}

fn required_closure(j: usize, mode: Mode, parents: &[Option<(usize, Option<usize>)>]) -> Vec<usize> {
    let mut out = vec![j];
    if let Some((large, medium)) = parents[j] {
        match mode {
            Mode::Basic => {}
            Mode::Weak => out.push(large),
            Mode::Strong => {
                out.push(large);
                out.extend(medium);
            }
        }
    }
    out
}

/// Ground-truth record written next to generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub intercept: f64,
    pub coefficients: BTreeMap<String, f64>,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    pub hierarchy: Hierarchy,
    pub truth: GroundTruth,
    /// True support as a boolean mask over columns.
    pub support: Vec<bool>,
}

/// Draws a dataset from `config`. Deterministic in `config.seed`.
pub fn generate(config: &SyntheticConfig) -> Result<Generated> {
    let layout = config.layout;
    layout.validate()?;
    let triples = layout.triples();
    config.validate(&triples)?;
    let p = layout.p();
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut cols: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let q = config.prob(j);
            (0..n).map(|_| if rng.random_bool(q) { 1.0 } else { 0.0 }).collect()
        })
        .collect();

    // Upward closure: small -> medium and large, then medium -> large.
    for t in &triples {
        if let Some(s) = t.small {
            for i in 0..n {
                if cols[s][i] == 1.0 {
                    cols[t.medium][i] = 1.0;
                    cols[t.large][i] = 1.0;
                }
            }
        }
    }
    for t in &triples {
        for i in 0..n {
            if cols[t.medium][i] == 1.0 {
                cols[t.large][i] = 1.0;
            }
        }
    }

    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let noise: f64 = rng.sample(StandardNormal);
        let mut v = config.intercept + config.sigma * noise;
        for (&j, &a) in config.support.iter().zip(&config.coefficients) {
            v += a * cols[j][i];
        }
        y.push(round_away_from_zero(v));
    }

    let names = layout.names();
    let vars: Vec<VariableMeta> = names
        .iter()
        .enumerate()
        .map(|(j, name)| VariableMeta {
            index: j,
            name: name.clone(),
            group: layout.group_of(j),
        })
        .collect();
    let dataset = Dataset::new(Matrix::from_columns(n, &cols), y, vars)?;
    let hierarchy = Hierarchy::new(triples, &dataset)?;
    let mut support = vec![false; p];
    for &j in &config.support {
        support[j] = true;
    }
    let truth = GroundTruth {
        intercept: config.intercept,
        coefficients: config
            .support
            .iter()
            .zip(&config.coefficients)
            .map(|(&j, &a)| (names[j].clone(), a))
            .collect(),
        sigma: config.sigma,
        seed: config.seed,
    };
    Ok(Generated {
        dataset,
        hierarchy,
        truth,
        support,
    })
}

/// Rounds away from zero to a nonzero integer; exactly 0 maps to 1.
fn round_away_from_zero(v: f64) -> f64 {
    if v > 0.0 {
        v.ceil()
    } else if v < 0.0 {
        v.floor()
    } else {
        1.0
    }
}
