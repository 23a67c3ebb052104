use serde::{Deserialize, Serialize};

use crate::datakit::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{mean, ols_fit, FitResult};

/// Coordinate descent stops when no coefficient moves by this much in a sweep.
pub const CD_TOL: f64 = 1e-7;
/// Coefficients at or below this magnitude are outside the support.
pub const SUPPORT_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 10_000;

/// Columns centered and scaled to unit (population) standard deviation, in
/// the covariance form used by coordinate descent: `gram = Z'Z / n` and
/// `xty = Z'(y - ybar) / n`.
#[derive(Debug, Clone)]
pub struct Standardized {
    p: usize,
    means: Vec<f64>,
    /// Zero for constant columns, which never enter the model.
    scales: Vec<f64>,
    gram: Vec<f64>,
    xty: Vec<f64>,
    y_mean: f64,
}

impl Standardized {
    pub fn new(ds: &Dataset) -> Self {
        let n = ds.n();
        let p = ds.p();
        let nf = n as f64;
        let y_mean = mean(ds.y());
        let yc: Vec<f64> = ds.y().iter().map(|v| v - y_mean).collect();
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(p);
        for j in 0..p {
            let c = ds.column(j);
            let m = mean(c);
            let centered: Vec<f64> = c.iter().map(|v| v - m).collect();
            let sd = (centered.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
            let constant = !(sd > 1e-12 * (1.0 + m.abs()));
            means.push(m);
            if constant {
                scales.push(0.0);
                z.push(vec![0.0; n]);
            } else {
                scales.push(sd);
                z.push(centered.iter().map(|v| v / sd).collect());
            }
        }
        let mut gram = vec![0.0; p * p];
        for j in 0..p {
            for k in 0..=j {
                let g = z[j].iter().zip(&z[k]).map(|(a, b)| a * b).sum::<f64>() / nf;
                gram[j * p + k] = g;
                gram[k * p + j] = g;
            }
        }
        let xty = z
            .iter()
            .map(|c| c.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>() / nf)
            .collect();
        Self {
            p,
            means,
            scales,
            gram,
            xty,
            y_mean,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.scales[j] > 0.0
    }

    /// Smallest penalty at which the all-zero vector is optimal.
    pub fn lambda_max(&self) -> f64 {
        self.xty.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Z'(y - ybar - Z b) / n`: minus the gradient of the smooth part.
    pub fn correlation(&self, b: &[f64]) -> Vec<f64> {
        let p = self.p;
        (0..p)
            .map(|j| {
                let row = &self.gram[j * p..(j + 1) * p];
                self.xty[j] - row.iter().zip(b).map(|(g, v)| g * v).sum::<f64>()
            })
            .collect()
    }

    /// Largest violation of the lasso optimality conditions at `lambda` over
    /// the non-constant columns.
    pub fn kkt_residual(&self, b: &[f64], lambda: f64) -> f64 {
        let r = self.correlation(b);
        (0..self.p)
            .filter(|&j| self.is_active(j))
            .map(|j| {
                if b[j] != 0.0 {
                    (r[j] - lambda * b[j].signum()).abs()
                } else {
                    (r[j].abs() - lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Cyclic coordinate descent in ascending index order, warm-started from
    /// `b`. Returns the number of sweeps and whether it converged.
    fn descend(&self, b: &mut [f64], lambda: f64) -> (usize, bool) {
        let p = self.p;
        let mut r = self.correlation(b);
        for sweep in 1..=MAX_SWEEPS {
            let mut max_change = 0.0f64;
            for j in 0..p {
                if !self.is_active(j) {
                    continue;
                }
                let gjj = self.gram[j * p + j];
                let z = r[j] + gjj * b[j];
                let new = soft_threshold(z, lambda) / gjj;
                let d = new - b[j];
                if d != 0.0 {
                    let col = &self.gram[j * p..(j + 1) * p];
                    for (rk, g) in r.iter_mut().zip(col) {
                        *rk -= d * g;
                    }
                    b[j] = new;
                    max_change = max_change.max(d.abs());
                }
            }
            if max_change < CD_TOL {
                return (sweep, true);
            }
        }
        (MAX_SWEEPS, false)
    }

    fn back_transform(&self, b: &[f64]) -> (f64, Vec<f64>) {
        let coefficients: Vec<f64> = (0..self.p)
            .map(|j| if self.is_active(j) { b[j] / self.scales[j] } else { 0.0 })
            .collect();
        let intercept = self.y_mean - coefficients.iter().zip(&self.means).map(|(a, m)| a * m).sum::<f64>();
        (intercept, coefficients)
    }

    fn fit(&self, b: &mut [f64], lambda: f64) -> LassoFit {
        let (sweeps, converged) = self.descend(b, lambda);
        let (intercept, coefficients) = self.back_transform(b);
        LassoFit {
            lambda,
            intercept,
            coefficients,
            std_coefficients: b.to_vec(),
            sweeps,
            converged,
        }
    }
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub lambda: f64,
    pub intercept: f64,
    /// Original scale.
    pub coefficients: Vec<f64>,
    /// Standardized scale, as optimized.
    pub std_coefficients: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl LassoFit {
    pub fn support(&self) -> Vec<bool> {
        self.coefficients.iter().map(|a| a.abs() > SUPPORT_TOL).collect()
    }

    pub fn support_size(&self) -> usize {
        self.coefficients.iter().filter(|a| a.abs() > SUPPORT_TOL).count()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("lasso penalty must be finite and >= 0, got {lambda}")))
    }
}

/// Minimizes `(1/2n) ||y - a0 - X a||^2 + lambda ||a||_1` with the penalty on
/// the standardized scale, from a cold start.
pub fn lasso_cd(ds: &Dataset, lambda: f64) -> Result<LassoFit> {
    check_lambda(lambda)?;
    let st = Standardized::new(ds);
    let mut b = vec![0.0; ds.p()];
    Ok(st.fit(&mut b, lambda))
}

/// `{0, 0.0001, ..., 1}`.
pub fn paper_grid() -> Vec<f64> {
    (0..=10_000).map(|i| i as f64 / 10_000.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    /// Ascending.
    pub lambdas: Vec<f64>,
    pub fits: Vec<LassoFit>,
    pub support_sizes: Vec<usize>,
}

/// Solves the lasso at every grid point, descending from the largest
/// penalty with warm starts. Results are stored in ascending `lambda` order.
pub fn lasso_path(ds: &Dataset, grid: &[f64]) -> Result<LassoPath> {
    for &l in grid {
        check_lambda(l)?;
    }
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let st = Standardized::new(ds);
    let mut b = vec![0.0; ds.p()];
    let mut fits: Vec<LassoFit> = lambdas.iter().rev().map(|&l| st.fit(&mut b, l)).collect();
    fits.reverse();
    let support_sizes = fits.iter().map(LassoFit::support_size).collect();
    Ok(LassoPath {
        lambdas,
        fits,
        support_sizes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoSelection {
    /// OLS refit on the selected support.
    pub fit: FitResult,
    /// Lasso solution at the chosen penalty; `None` when nothing qualified.
    pub lasso: Option<LassoFit>,
    pub warning: Option<String>,
}

impl LassoSelection {
    pub fn lambda(&self) -> Option<f64> {
        self.lasso.as_ref().map(|l| l.lambda)
    }
}

/// [`lasso_select_with_grid`] on [`paper_grid`].
pub fn lasso_select(ds: &Dataset, s: usize) -> Result<LassoSelection> {
    lasso_select_with_grid(ds, s, &paper_grid())
}

/// Picks the grid penalty whose nonempty support has the most variables
/// without exceeding `s` (the larger penalty on ties) and refits OLS on it.
/// When no penalty qualifies, returns the intercept-only fit with a warning.
pub fn lasso_select_with_grid(ds: &Dataset, s: usize, grid: &[f64]) -> Result<LassoSelection> {
    let p = ds.p();
    if s > p {
        return Err(Error::Config(format!("s = {s} exceeds p = {p}")));
    }
    let path = lasso_path(ds, grid)?;
    let mut chosen: Option<usize> = None;
    for i in (0..path.lambdas.len()).rev() {
        let k = path.support_sizes[i];
        if k == 0 || k > s {
            continue;
        }
        if chosen.is_none_or(|c| k > path.support_sizes[c]) {
            chosen = Some(i);
        }
    }
    match chosen {
        Some(i) => {
            let lasso = path.fits.into_iter().nth(i).expect("index from path");
            let fit = ols_fit(ds, &lasso.support())?;
            Ok(LassoSelection {
                fit,
                lasso: Some(lasso),
                warning: None,
            })
        }
        None => Ok(LassoSelection {
            fit: ols_fit(ds, &vec![false; p])?,
            lasso: None,
            warning: Some(format!(
                "no grid penalty gives a nonempty support of at most {s} variables; using the intercept-only model"
            )),
        }),
    }
}
