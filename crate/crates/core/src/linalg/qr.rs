//! Householder QR factorizations.
//!
//! [`PivotedQr`] is the workhorse for every least-squares solve in the crate.
//! Columns are pivoted by largest remaining norm and the factorization stops
//! once the largest remaining column norm falls below [`RANK_TOL`] times the
//! first pivot, which fixes the numerical rank. Rank-deficient systems are
//! solved in the minimum-norm sense through a second (row) QR of the leading
//! trapezoid, i.e. a complete orthogonal decomposition.

use super::matrix::{dot, Matrix};

/// A pivot is treated as zero when below this fraction of the largest pivot.
pub const RANK_TOL: f64 = 1e-10;

/// Generates a reflector `H = I - tau v v^T` with `v[0] = 1` that maps `x` onto
/// `beta e_1`. On return `x[0] = beta` and `x[1..]` holds `v[1..]`.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let tail = dot(&x[1..], &x[1..]);
    if tail == 0.0 {
        return 0.0;
    }
    let norm = (alpha * alpha + tail).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    tau
}

/// Applies the reflector stored in `v` (implicit leading one) to `c`.
#[inline]
fn apply_reflector(v: &[f64], tau: f64, c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = c[0] + dot(&v[1..], &c[1..]);
    let tw = tau * w;
    c[0] -= tw;
    for (ci, vi) in c[1..].iter_mut().zip(&v[1..]) {
        *ci -= tw * vi;
    }
}

/// Unpivoted Householder triangularization. Returns the `min(m, k) x k`
/// upper-trapezoidal factor `R` with `A^T A = R^T R`.
pub fn triangular_factor(a: &Matrix) -> Matrix {
    let (m, k) = (a.rows(), a.cols());
    let mut w = a.clone();
    let steps = m.min(k);
    for j in 0..steps {
        let (head, tail) = split_col(&mut w, j);
        let tau = make_reflector(&mut head[j..]);
        for c in tail {
            apply_reflector(&head[j..], tau, &mut c[j..]);
        }
    }
    let mut r = Matrix::zeros(steps, k);
    for j in 0..k {
        for i in 0..steps.min(j + 1) {
            r.set(i, j, w.get(i, j));
        }
    }
    r
}

/// Splits the working matrix into column `j` and an iterator over the
/// columns after it.
fn split_col(w: &mut Matrix, j: usize) -> (&mut [f64], impl Iterator<Item = &mut [f64]>) {
    let m = w.rows();
    let (left, right) = w.as_mut_slice().split_at_mut((j + 1) * m);
    (&mut left[j * m..], right.chunks_mut(m.max(1)))
}

/// Column-pivoted Householder QR, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    qr: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn factor(a: &Matrix) -> Self {
        let (m, k) = (a.rows(), a.cols());
        let mut w = a.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut tau = Vec::new();
        let steps = m.min(k);
        let mut first_pivot = 0.0f64;
        let mut rank = 0;
        for j in 0..steps {
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..k {
                let col = &w.col(c)[j..];
                let nrm = dot(col, col);
                if nrm > best_norm {
                    best_norm = nrm;
                    best = c;
                }
            }
            let best_norm = best_norm.sqrt();
            if j == 0 {
                first_pivot = best_norm;
            }
            if best_norm == 0.0 || best_norm <= RANK_TOL * first_pivot {
                break;
            }
            w.swap_cols(j, best);
            perm.swap(j, best);
            let (head, tail) = split_col(&mut w, j);
            let t = make_reflector(&mut head[j..]);
            for c in tail {
                apply_reflector(&head[j..], t, &mut c[j..]);
            }
            tau.push(t);
            rank += 1;
        }
        Self {
            qr: w,
            tau,
            perm,
            rank,
        }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.qr.cols()
    }

    /// Column permutation: position `i` of the factor holds original column `perm[i]`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `|R_ii|` for the leading `rank` pivots.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.rank).map(|i| self.qr.get(i, i).abs()).collect()
    }

    /// Overwrites `b` with `Q^T b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        for (j, &t) in self.tau.iter().enumerate() {
            apply_reflector(&self.qr.col(j)[j..], t, &mut b[j..]);
        }
    }

    /// Minimum-norm least-squares solution of `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.cols();
        let r = self.rank;
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let mut xp = vec![0.0; k];
        if r == 0 {
            return xp;
        }
        if r == k {
            for i in (0..r).rev() {
                let mut s = qtb[i];
                for j in i + 1..r {
                    s -= self.qr.get(i, j) * xp[j];
                }
                xp[i] = s / self.qr.get(i, i);
            }
        } else {
            // W = R[0..r, 0..k]; factor W^T = Z L and solve L^T u = c, x' = Z u.
            let mut wt = Matrix::zeros(k, r);
            for i in 0..r {
                for j in i..k {
                    wt.set(j, i, self.qr.get(i, j));
                }
            }
            let mut ztau = Vec::with_capacity(r);
            for j in 0..r {
                let (head, tail) = split_col(&mut wt, j);
                let t = make_reflector(&mut head[j..]);
                for c in tail {
                    apply_reflector(&head[j..], t, &mut c[j..]);
                }
                ztau.push(t);
            }
            // L is the upper triangle of wt; solve L^T u = c by forward substitution.
            let mut u = vec![0.0; k];
            for i in 0..r {
                let mut s = qtb[i];
                for j in 0..i {
                    s -= wt.get(j, i) * u[j];
                }
                u[i] = s / wt.get(i, i);
            }
            // x' = Z [u; 0] = H_0 H_1 ... H_{r-1} [u; 0]
            for j in (0..r).rev() {
                apply_reflector(&wt.col(j)[j..], ztau[j], &mut u[j..]);
            }
            xp = u;
        }
        let mut x = vec![0.0; k];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = xp[i];
        }
        x
    }

    /// Diagonal of `(A^T A)^{-1}` in original column order. Requires full column rank.
    pub fn inverse_gram_diagonal(&self) -> Option<Vec<f64>> {
        let k = self.cols();
        if self.rank < k {
            return None;
        }
        // diag((R^T R)^{-1}) = squared row norms of R^{-1}.
        let mut rinv = Matrix::zeros(k, k);
        for c in 0..k {
            // R x = e_c
            let mut x = vec![0.0; k];
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for j in i + 1..=c {
                    s -= self.qr.get(i, j) * x[j];
                }
                x[i] = s / self.qr.get(i, i);
            }
            rinv.col_mut(c).copy_from_slice(&x);
        }
        let mut diag = vec![0.0; k];
        for i in 0..k {
            let row_sq: f64 = (0..k).map(|j| rinv.get(i, j).powi(2)).sum();
            diag[self.perm[i]] = row_sq;
        }
        Some(diag)
    }
}

/// Result of a dense least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq {
    pub x: Vec<f64>,
    pub rank: usize,
    /// `||b - A x||^2`, computed directly from `A`.
    pub rss: f64,
}

/// Minimum-norm least squares `min ||A x - b||` via pivoted QR.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Lstsq {
    assert_eq!(a.rows(), b.len());
    let qr = PivotedQr::factor(a);
    let x = qr.solve(b);
    let mut r = b.to_vec();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            super::matrix::axpy(-xj, a.col(j), &mut r);
        }
    }
    Lstsq {
        rank: qr.rank(),
        rss: dot(&r, &r),
        x,
    }
}
