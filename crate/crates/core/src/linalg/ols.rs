use serde::{Deserialize, Serialize};

use super::matrix::{axpy, dot, mean, Matrix};
use super::qr::{lstsq, triangular_factor, RANK_TOL};
use crate::datakit::Dataset;
use crate::error::{Error, Result};

/// Least-squares fit restricted to a support. The intercept is always
/// present and never counted in the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub intercept: f64,
    /// Zero outside the support.
    pub coefficients: Vec<f64>,
    pub support: Vec<bool>,
    pub rss: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|&&b| b).count()
    }

    pub fn selected(&self) -> Vec<usize> {
        indices(&self.support)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let mut out = vec![self.intercept; x.rows()];
        for (j, &a) in self.coefficients.iter().enumerate() {
            if a != 0.0 {
                axpy(a, x.col(j), &mut out);
            }
        }
        out
    }
}

pub fn indices(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(j, &b)| b.then_some(j)).collect()
}

/// Ordinary least squares of `y` on the intercept plus the supported columns.
///
/// Columns and `y` are centered, the centered system is solved by pivoted QR
/// (minimum-norm when rank deficient) and the intercept is recovered from
/// the means.
pub fn ols_fit(ds: &Dataset, support: &[bool]) -> Result<FitResult> {
    if support.len() != ds.p() {
        return Err(Error::Dimension(format!(
            "support has length {} but p = {}",
            support.len(),
            ds.p()
        )));
    }
    let idx = indices(support);
    let n = ds.n();
    if idx.len() + 1 > n {
        return Err(Error::Dimension(format!(
            "support of size {} needs at least {} samples, have {n}",
            idx.len(),
            idx.len() + 1
        )));
    }
    let y = ds.y();
    let ybar = mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let mut xc = ds.x().select_columns(&idx);
    let mut xbar = Vec::with_capacity(idx.len());
    for c in 0..idx.len() {
        let col = xc.col_mut(c);
        let m = mean(col);
        col.iter_mut().for_each(|v| *v -= m);
        xbar.push(m);
    }
    let sol = lstsq(&xc, &yc);
    let mut coefficients = vec![0.0; ds.p()];
    let mut intercept = ybar;
    for (c, &j) in idx.iter().enumerate() {
        coefficients[j] = sol.x[c];
        intercept -= sol.x[c] * xbar[c];
    }
    let mut residuals = y.to_vec();
    residuals.iter_mut().for_each(|r| *r -= intercept);
    for &j in &idx {
        if coefficients[j] != 0.0 {
            axpy(-coefficients[j], ds.column(j), &mut residuals);
        }
    }
    let rss = dot(&residuals, &residuals);
    Ok(FitResult {
        intercept,
        coefficients,
        support: support.to_vec(),
        rss,
        residuals,
    })
}

/// Total sum of squares of `y` about its mean.
pub fn tss(y: &[f64]) -> f64 {
    let m = mean(y);
    y.iter().map(|v| (v - m) * (v - m)).sum()
}

fn eval_rss(fit: &FitResult, eval: &Dataset) -> Result<f64> {
    if fit.coefficients.len() != eval.p() {
        return Err(Error::Dimension(format!(
            "fit has {} coefficients but evaluation data has p = {}",
            fit.coefficients.len(),
            eval.p()
        )));
    }
    let pred = fit.predict(eval.x());
    Ok(eval.y().iter().zip(&pred).map(|(y, f)| (y - f) * (y - f)).sum())
}

/// `1 - RSS/TSS` on `eval`, with TSS about the evaluation mean of `y`.
pub fn r_squared(fit: &FitResult, eval: &Dataset) -> Result<f64> {
    let rss = eval_rss(fit, eval)?;
    let t = tss(eval.y());
    if t == 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    Ok(1.0 - rss / t)
}

pub fn rmse(fit: &FitResult, eval: &Dataset) -> Result<f64> {
    let rss = eval_rss(fit, eval)?;
    if eval.n() == 0 {
        return Err(Error::Dimension("empty evaluation set".into()));
    }
    Ok((rss / eval.n() as f64).sqrt())
}

/// Orthogonally compressed least-squares problem.
///
/// With `[Xc | yc] = Q R` (centered columns, unpivoted Householder), every
/// subset regression `min ||yc - Xc_S a||` has the same residual norm as
/// `min ||r_y - R_S a||` on the at most `p + 1` rows of `R`. Subset fits
/// therefore cost `O(p k^2)` regardless of `n`.
#[derive(Debug, Clone)]
pub struct LsqProblem {
    r: Matrix,
    p: usize,
    n: usize,
    tss: f64,
    col_norms: Vec<f64>,
}

impl LsqProblem {
    pub fn new(ds: &Dataset) -> Self {
        let n = ds.n();
        let p = ds.p();
        let mut cols = Vec::with_capacity(p + 1);
        for j in 0..p {
            let c = ds.column(j);
            let m = mean(c);
            cols.push(c.iter().map(|v| v - m).collect::<Vec<_>>());
        }
        let ybar = mean(ds.y());
        cols.push(ds.y().iter().map(|v| v - ybar).collect());
        let a = Matrix::from_columns(n, &cols);
        let col_norms = cols.iter().take(p).map(|c| dot(c, c).sqrt()).collect();
        let r = triangular_factor(&a);
        let tss = tss(ds.y());
        Self {
            r,
            p,
            n,
            tss,
            col_norms,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Intercept-only RSS.
    pub fn tss(&self) -> f64 {
        self.tss
    }

    /// Euclidean norm of centered column `j`.
    pub fn column_norm(&self, j: usize) -> f64 {
        self.col_norms[j]
    }

    pub(crate) fn column(&self, j: usize) -> &[f64] {
        self.r.col(j)
    }

    pub(crate) fn target(&self) -> &[f64] {
        self.r.col(self.p)
    }

    /// RSS of the intercept plus the columns in `idx`.
    pub fn subset_rss(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return self.tss;
        }
        lstsq(&self.r.select_columns(idx), self.target()).rss
    }

    /// Centered-scale coefficients for the columns in `idx`, plus the RSS.
    pub fn subset_solve(&self, idx: &[usize]) -> (Vec<f64>, f64) {
        if idx.is_empty() {
            return (Vec::new(), self.tss);
        }
        let s = lstsq(&self.r.select_columns(idx), self.target());
        (s.x, s.rss)
    }
}

/// Least-squares fit that grows one column at a time.
///
/// Keeps an orthonormal basis of the selected compressed columns (classical
/// Gram-Schmidt with one re-orthogonalization pass) and the current residual,
/// so the RSS change from adding any column is one projection away.
#[derive(Debug, Clone)]
pub struct IncrementalFit<'a> {
    problem: &'a LsqProblem,
    basis: Vec<Vec<f64>>,
    support: Vec<usize>,
    residual: Vec<f64>,
    rss: f64,
}

impl<'a> IncrementalFit<'a> {
    pub fn new(problem: &'a LsqProblem) -> Self {
        let residual = problem.target().to_vec();
        Self {
            problem,
            basis: Vec::new(),
            support: Vec::new(),
            rss: problem.tss(),
            residual,
        }
    }

    pub fn with_support(problem: &'a LsqProblem, idx: &[usize]) -> Self {
        let mut f = Self::new(problem);
        for &j in idx {
            f.add(j);
        }
        f
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Component of column `j` orthogonal to the current basis, or `None`
    /// when it is numerically in the span.
    fn orthogonal_part(&self, j: usize) -> Option<Vec<f64>> {
        let col = self.problem.column(j);
        let scale = self.problem.column_norm(j);
        if scale == 0.0 {
            return None;
        }
        let mut v = col.to_vec();
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv <= RANK_TOL * scale {
            None
        } else {
            Some(v)
        }
    }

    /// RSS after adding column `j`, minus the current RSS (never positive).
    pub fn delta_add(&self, j: usize) -> f64 {
        match self.orthogonal_part(j) {
            None => 0.0,
            Some(v) => {
                let num = dot(&v, &self.residual);
                -(num * num) / dot(&v, &v)
            }
        }
    }

    /// Adds column `j` and returns the RSS change.
    pub fn add(&mut self, j: usize) -> f64 {
        let before = self.rss;
        self.support.push(j);
        if let Some(mut v) = self.orthogonal_part(j) {
            let nv = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            let c = dot(&v, &self.residual);
            axpy(-c, &v, &mut self.residual);
            self.basis.push(v);
            self.rss = dot(&self.residual, &self.residual);
        }
        self.rss - before
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
        Dataset::from_columns_unchecked(&cols, y)
    }

    #[test]
    fn constant_target() {
        let d = ds(vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]], vec![3.0; 4]);
        let f = ols_fit(&d, &[true, true]).unwrap();
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.coefficients.iter().all(|a| a.abs() < 1e-12));
        assert!(f.rss < 1e-24);
    }

    #[test]
    fn exact_fit_column() {
        let y = vec![1.0, -2.0, 3.0, 0.5, 2.0];
        let d = ds(vec![y.clone()], y);
        let f = ols_fit(&d, &[true]).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!(f.rss < 1e-24);
    }

    #[test]
    fn support_too_large() {
        let d = ds(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![1.0, 2.0]);
        assert!(matches!(ols_fit(&d, &[true, true]), Err(Error::Dimension(_))));
        assert!(ols_fit(&d, &[true, false]).is_ok());
    }

    #[test]
    fn unselected_coefficients_are_exactly_zero() {
        let d = ds(vec![vec![1.0, 2.0, 3.0, 5.0], vec![1.0, 0.0, 1.0, 0.0]], vec![1.0, 3.0, 2.0, 7.0]);
        let f = ols_fit(&d, &[false, true]).unwrap();
        assert_eq!(f.coefficients[0], 0.0);
        let direct: f64 = f.residuals.iter().map(|r| r * r).sum();
        assert!((direct - f.rss).abs() <= 1e-9 * f.rss.max(1e-300));
    }

    #[test]
    fn r2_and_rmse_definitions() {
        let y = vec![1.0, 2.0, 4.0, 7.0];
        let d = ds(vec![y.clone()], y.clone());
        let perfect = ols_fit(&d, &[true]).unwrap();
        assert!((r_squared(&perfect, &d).unwrap() - 1.0).abs() < 1e-12);
        assert!(rmse(&perfect, &d).unwrap() < 1e-12);
        let mean_only = FitResult {
            intercept: mean(&y),
            coefficients: vec![0.0],
            support: vec![false],
            rss: 0.0,
            residuals: vec![],
        };
        assert!(r_squared(&mean_only, &d).unwrap().abs() < 1e-15);
        let flat = ds(vec![vec![1.0, 2.0]], vec![5.0, 5.0]);
        assert!(matches!(r_squared(&mean_only, &flat), Err(Error::UndefinedRSquared)));
    }

    #[test]
    fn compressed_subset_rss_matches_direct() {
        let cols = vec![
            vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0],
            vec![0.5, 1.5, -2.0, 0.0, 3.0, 1.0, 2.0],
            vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0],
        ];
        let y = vec![2.0, -1.0, 3.0, 1.0, -2.0, 4.0, 1.0];
        let d = ds(cols, y);
        let prob = LsqProblem::new(&d);
        for mask in 0u32..8 {
            let support: Vec<bool> = (0..3).map(|j| mask >> j & 1 == 1).collect();
            let direct = ols_fit(&d, &support).unwrap().rss;
            let comp = prob.subset_rss(&indices(&support));
            assert!((direct - comp).abs() <= 1e-10 * direct.max(1.0), "{mask}: {direct} vs {comp}");
        }
    }

    #[test]
    fn delta_of_exact_fit_column_is_minus_tss() {
        let y = vec![1.0, 4.0, 2.0, 8.0, 3.0];
        let d = ds(vec![y.clone(), vec![1.0, 0.0, 1.0, 0.0, 1.0]], y.clone());
        let prob = LsqProblem::new(&d);
        let f = IncrementalFit::new(&prob);
        assert!((f.delta_add(0) + tss(&y)).abs() < 1e-10);
    }

    #[test]
    fn delta_of_duplicate_column_is_zero() {
        let a = vec![1.0, 0.0, 1.0, 1.0, 0.0];
        let d = ds(vec![a.clone(), a, vec![0.0, 1.0, 1.0, 0.0, 0.0]], vec![2.0, 1.0, 3.0, 2.0, -1.0]);
        let prob = LsqProblem::new(&d);
        let mut f = IncrementalFit::new(&prob);
        f.add(0);
        assert_eq!(f.delta_add(1), 0.0);
        assert!(f.delta_add(2) <= 0.0);
    }
}
