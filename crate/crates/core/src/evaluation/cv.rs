use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_method, Method};
use crate::datakit::{drop_constant, Dataset, Hierarchy};
use crate::error::{Error, Result};
use crate::linalg::{r_squared, rmse, FitResult};

/// Random partition of `0..n` into `k` folds whose sizes differ by at most
/// one. Each fold is sorted ascending.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Config(format!("need 2 <= k <= n for k-fold splitting (k = {k}, n = {n})")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    /// Per fold, exact methods only.
    pub time_limit: Option<Duration>,
    /// Worker threads for folds; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl CvConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            time_limit: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the held-out `y` is constant.
    pub r2: Option<f64>,
    pub rmse: f64,
    /// Selection plus refit, in seconds.
    pub time_s: f64,
    pub train_rss: f64,
    pub selected: Vec<String>,
    pub proven_optimal: Option<bool>,
    pub warning: Option<String>,
    #[serde(skip)]
    pub test_rows: Vec<usize>,
}

impl FoldResult {
    pub fn excluded(&self) -> bool {
        self.r2.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: Method,
    pub s: usize,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Means over the folds with a defined R². `None` if there are none.
    pub mean_r2: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub mean_time: Option<f64>,
    pub excluded_folds: Vec<usize>,
    pub note: Option<String>,
}

impl CvReport {
    fn assemble(method: Method, s: usize, cfg: &CvConfig, folds: Vec<FoldResult>) -> Self {
        let kept: Vec<&FoldResult> = folds.iter().filter(|f| !f.excluded()).collect();
        let avg = |g: fn(&FoldResult) -> f64| {
            (!kept.is_empty()).then(|| kept.iter().map(|f| g(f)).sum::<f64>() / kept.len() as f64)
        };
        let mean_r2 = avg(|f| f.r2.unwrap_or(f64::NAN));
        let mean_rmse = avg(|f| f.rmse);
        let mean_time = avg(|f| f.time_s);
        let excluded_folds: Vec<usize> = folds.iter().filter(|f| f.excluded()).map(|f| f.fold).collect();
        let note = (!excluded_folds.is_empty()).then(|| {
            format!(
                "folds {excluded_folds:?} have constant held-out y (undefined R^2) and are excluded from the averages"
            )
        });
        Self {
            method,
            s,
            k: cfg.k,
            seed: cfg.seed,
            folds,
            mean_r2,
            mean_rmse,
            mean_time,
            excluded_folds,
            note,
        }
    }
}

/// Trains on every fold's complement and scores on the fold.
///
/// Columns constant in a training portion are dropped for that fold, and
/// hierarchy chains are remapped to the surviving columns.
pub fn cross_validate(
    ds: &Dataset,
    hierarchy: &Hierarchy,
    method: Method,
    s: usize,
    cfg: &CvConfig,
) -> Result<CvReport> {
    let folds = kfold_split(ds.n(), cfg.k, cfg.seed)?;
    let job = |(i, test): (usize, &Vec<usize>)| evaluate_fold(ds, hierarchy, method, s, cfg, i, test);
    let results: Vec<FoldResult> = if cfg.threads == Some(1) {
        folds.iter().enumerate().map(job).collect::<Result<_>>()?
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cfg.threads {
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| folds.par_iter().enumerate().map(job).collect::<Result<_>>())?
    };
    Ok(CvReport::assemble(method, s, cfg, results))
}

fn evaluate_fold(
    ds: &Dataset,
    hierarchy: &Hierarchy,
    method: Method,
    s: usize,
    cfg: &CvConfig,
    fold: usize,
    test_rows: &[usize],
) -> Result<FoldResult> {
    let mut in_test = vec![false; ds.n()];
    for &i in test_rows {
        in_test[i] = true;
    }
    let train_rows: Vec<usize> = (0..ds.n()).filter(|&i| !in_test[i]).collect();
    let train = ds.select_rows(&train_rows);
    let test = ds.select_rows(test_rows);

    let reduced = drop_constant(&train);
    let h = hierarchy.remap(&reduced.kept, false)?;
    let run = run_method(&reduced.dataset, &h, method, s, cfg.time_limit)?;
    let fit = expand(&run.fit, &reduced.kept, ds.p());

    let r2 = match r_squared(&fit, &test) {
        Ok(v) => Some(v),
        Err(Error::UndefinedRSquared) => None,
        Err(e) => return Err(e),
    };
    Ok(FoldResult {
        fold,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        r2,
        rmse: rmse(&fit, &test)?,
        time_s: run.wall_time,
        train_rss: fit.rss,
        selected: fit.selected().into_iter().map(|j| ds.name(j).to_string()).collect(),
        proven_optimal: run.proven_optimal,
        warning: run.warning,
        test_rows: test_rows.to_vec(),
    })
}

/// Lifts a fit on the kept columns back to all `p` columns.
fn expand(fit: &FitResult, kept: &[usize], p: usize) -> FitResult {
    let mut coefficients = vec![0.0; p];
    let mut support = vec![false; p];
    for (new, &old) in kept.iter().enumerate() {
        coefficients[old] = fit.coefficients[new];
        support[old] = fit.support[new];
    }
    FitResult {
        intercept: fit.intercept,
        coefficients,
        support,
        rss: fit.rss,
        residuals: fit.residuals.clone(),
    }
}
