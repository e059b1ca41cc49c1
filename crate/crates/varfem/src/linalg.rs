//! Small dense/sparse linear algebra layer shared by the assembly and solver
//! paths.
//!
//! Matrices coming out of Galerkin assembly are symmetric and, under a
//! Lorentzian metric signature, possibly indefinite, so the solve entry point
//! picks between a dense LU factorization (small systems) and MINRES (large
//! ones) rather than assuming positive definiteness.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Systems at or below this size are solved by dense LU; larger ones fall
/// back to MINRES on the sparse operator.
pub const DENSE_SOLVE_LIMIT: usize = 2600;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular matrix encountered during factorization")]
    Singular,
    #[error("iterative solver stalled: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has length {len}")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
}

/// Compressed sparse row matrix built from accumulated triplets.
///
/// Construction sorts and merges duplicate entries, so assembly order does not
/// affect the stored representation and matrix products are deterministic.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Triplet accumulator for building a [`CsrMatrix`].
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries
            .sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            if let (Some(&last_c), Some(last_v)) = (col_idx.last(), values.last_mut()) {
                if row_ptr[r + 1] > 0 && last_c == c && col_idx.len() > row_ptr[r] {
                    // merge duplicate within the current row
                    *last_v += v;
                    continue;
                }
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] = col_idx.len();
        }
        // rows without entries inherit the previous offset
        for r in 1..=self.rows {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = self.row_ptr[r];
        let end = self.row_ptr[r + 1];
        self.col_idx[start..end]
            .iter()
            .copied()
            .zip(self.values[start..end].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// y = Aᵀ x.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Aᵀ M A for a diagonal weight `diag`; used for stiffness-type products.
    pub fn transpose_diag_product(&self, diag: &[f64]) -> CsrMatrix {
        assert_eq!(diag.len(), self.rows);
        let mut builder = TripletBuilder::new(self.cols, self.cols);
        for r in 0..self.rows {
            let w = diag[r];
            if w == 0.0 {
                continue;
            }
            let start = self.row_ptr[r];
            let end = self.row_ptr[r + 1];
            for i in start..end {
                for j in start..end {
                    builder.push(
                        self.col_idx[i],
                        self.col_idx[j],
                        w * self.values[i] * self.values[j],
                    );
                }
            }
        }
        builder.build()
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Coordinate-triplet text dump (row, col, value per line) for debugging.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out.push_str(&format!("{} {} {:.17e}\n", r, c, v));
            }
        }
        out
    }
}

/// Symmetric linear solve: dense LU below [`DENSE_SOLVE_LIMIT`], MINRES above.
pub fn solve_symmetric(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() || b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            rows: a.rows(),
            cols: a.cols(),
            len: b.len(),
        });
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    if a.rows() <= DENSE_SOLVE_LIMIT {
        solve_dense(&a.to_dense(), b)
    } else {
        let scale = norm_inf(b).max(1.0);
        minres(a, b, 1e-13 * scale, 40 * a.rows())
    }
}

/// Dense LU solve with partial pivoting.
pub fn solve_dense(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let lu = a.clone().lu();
    let rhs = DVector::from_column_slice(b);
    match lu.solve(&rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x.data.into()),
        _ => Err(LinalgError::Singular),
    }
}

/// MINRES for symmetric (possibly indefinite) systems.
///
/// Standard Lanczos-based recurrence; terminates when the residual estimate
/// drops below `tol` in absolute terms.
pub fn minres(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let r = b.to_vec();
    let mut beta = norm2(&r);
    if beta <= tol {
        return Ok(x);
    }
    let beta1 = beta;
    let mut v_prev = vec![0.0; n];
    let mut v = scale(&r, 1.0 / beta);
    let (mut c_prev, mut s_prev) = (1.0, 0.0);
    let (mut c, mut s) = (1.0, 0.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut eta = beta;

    for iter in 0..max_iter {
        let mut av = a.mul_vec(&v);
        let alpha = dot(&v, &av);
        for i in 0..n {
            av[i] -= alpha * v[i] + beta * v_prev[i];
        }
        let beta_next = norm2(&av);

        // apply the two previous Givens rotations
        let delta = c * alpha - c_prev * s * beta;
        let rho2 = s * alpha + c_prev * c * beta;
        let rho3 = s_prev * beta;
        let rho1 = (delta * delta + beta_next * beta_next).sqrt();
        if rho1 == 0.0 {
            return Err(LinalgError::Singular);
        }
        let c_next = delta / rho1;
        let s_next = beta_next / rho1;

        let mut w_next = vec![0.0; n];
        for i in 0..n {
            w_next[i] = (v[i] - rho2 * w[i] - rho3 * w_prev[i]) / rho1;
        }
        let step = c_next * eta;
        for i in 0..n {
            x[i] += step * w_next[i];
        }
        eta = -s_next * eta;

        (c_prev, s_prev) = (c, s);
        (c, s) = (c_next, s_next);
        w_prev = w;
        w = w_next;
        v_prev = v;
        if beta_next > 0.0 {
            v = scale(&av, 1.0 / beta_next);
        } else {
            v = av;
        }
        beta = beta_next;

        if eta.abs() <= tol || (iter + 1 == max_iter) {
            // check the true residual before declaring success
            let ax = a.mul_vec(&x);
            let res = b
                .iter()
                .zip(ax.iter())
                .map(|(bi, ai)| (bi - ai) * (bi - ai))
                .sum::<f64>()
                .sqrt();
            if res <= tol.max(1e-12 * beta1) {
                return Ok(x);
            }
            if iter + 1 == max_iter {
                return Err(LinalgError::NoConvergence {
                    residual: res,
                    iterations: iter + 1,
                });
            }
        }
    }
    unreachable!()
}

/// Conjugate gradients for symmetric positive definite systems.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol {
        return Ok(x);
    }
    for iter in 0..max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // not positive definite along this direction
            return minres(a, b, tol, max_iter);
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= tol {
            return Ok(x);
        }
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
        if iter + 1 == max_iter {
            return Err(LinalgError::NoConvergence {
                residual: rr.sqrt(),
                iterations: max_iter,
            });
        }
    }
    unreachable!()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Least-squares slope of log(y) against log(x); used for convergence rates.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn csr_merges_duplicates_and_multiplies() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 0, 2.0);
        b.push(1, 0, 4.0);
        b.push(0, 1, -1.0);
        let m = b.build();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 3.0);
        let y = m.mul_vec(&[1.0, 1.0]);
        assert_eq!(y, vec![2.0, 4.0]);
    }

    #[test]
    fn dense_and_minres_agree_on_spd_system() {
        let a = laplacian_1d(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let x_dense = solve_dense(&a.to_dense(), &b).unwrap();
        let x_minres = minres(&a, &b, 1e-12, 4000).unwrap();
        for i in 0..40 {
            assert!((x_dense[i] - x_minres[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn minres_handles_indefinite_system() {
        // diag(2, -3) block plus coupling: symmetric indefinite
        let mut bld = TripletBuilder::new(3, 3);
        bld.push(0, 0, 2.0);
        bld.push(1, 1, -3.0);
        bld.push(2, 2, 1.0);
        bld.push(0, 1, 0.5);
        bld.push(1, 0, 0.5);
        let a = bld.build();
        let b = vec![1.0, 2.0, 3.0];
        let x = minres(&a, &b, 1e-12, 200).unwrap();
        let r: Vec<f64> = a
            .mul_vec(&x)
            .iter()
            .zip(b.iter())
            .map(|(ax, bi)| ax - bi)
            .collect();
        assert!(norm2(&r) < 1e-10);
    }

    #[test]
    fn cg_solves_laplacian() {
        let a = laplacian_1d(60);
        let b = vec![1.0; 60];
        let x = conjugate_gradient(&a, &b, 1e-12, 10_000).unwrap();
        let ax = a.mul_vec(&x);
        for i in 0..60 {
            assert!((ax[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn log_log_slope_recovers_rate() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|h| 3.0 * h * h).collect();
        assert!((log_log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
