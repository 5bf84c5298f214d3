//! Minimal dense linear algebra shared by the other modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * x` for a column vector `x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Frobenius-orthogonality defect `max |QᵀQ - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.transpose().matmul(self);
        let mut worst: f64 = 0.0;
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram.get(i, j) - target).abs());
            }
        }
        worst
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators keep the FP pipeline busy.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

/// Kahan compensated accumulator, so reductions do not depend on chunking.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn compensated_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    let mut n = 0usize;
    for v in values {
        acc.add(v);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        acc.value() / n as f64
    }
}

/// Householder QR of a square matrix: returns `(q, r)` with `a = q * r`.
pub fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    assert_eq!(a.rows(), a.cols(), "QR restricted to square input here");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let mut alpha = 0.0;
        for i in k..n {
            let x = r.get(i, k);
            alpha += x * x;
        }
        let alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
        for i in k..n {
            v[i] = r.get(i, k);
        }
        v[k] = x0 + sign * alpha;
        let vtv = v[k..].iter().map(|x| x * x).sum::<f64>();
        if vtv == 0.0 {
            continue;
        }

        // R <- R - (2/vᵀv) v (vᵀR), in two row-major passes.
        w[k..n].fill(0.0);
        for i in k..n {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (acc, x) in w[k..n].iter_mut().zip(&r.row(i)[k..n]) {
                *acc += vi * x;
            }
        }
        for i in k..n {
            let f = 2.0 * v[i] / vtv;
            for (x, y) in r.row_mut(i)[k..n].iter_mut().zip(&w[k..n]) {
                *x -= f * y;
            }
        }
        // Q <- Q - (2/vᵀv) (Q v) vᵀ, also row-major.
        for i in 0..n {
            let f = 2.0 * dot(&q.row(i)[k..n], &v[k..n]) / vtv;
            for (x, y) in q.row_mut(i)[k..n].iter_mut().zip(&v[k..n]) {
                *x -= f * y;
            }
        }
    }
    (q, r)
}

/// Sign of `det(m)` via Gaussian elimination with partial pivoting.
pub fn determinant_sign(m: &Matrix) -> f64 {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    let mut a = m.clone();
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a.get(k, k).abs();
        for i in k + 1..n {
            let v = a.get(i, k).abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a.get(k, j);
                a.set(k, j, a.get(piv, j));
                a.set(piv, j, tmp);
            }
            sign = -sign;
        }
        if a.get(k, k) < 0.0 {
            sign = -sign;
        }
        let pivot = a.get(k, k);
        for i in k + 1..n {
            let f = a.get(i, k) / pivot;
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = a.data.split_at_mut(i * n);
            let pivot_row = &upper[k * n + k..k * n + n];
            let target = &mut lower[k..n];
            for (x, y) in target.iter_mut().zip(pivot_row) {
                *x -= f * y;
            }
        }
    }
    sign
}

/// Solves `a * x = b` for symmetric positive definite `a` via Cholesky.
pub fn cholesky_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows(), a.cols());
    assert_eq!(a.rows(), b.rows());
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::SingularSystem);
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }

    // Forward then backward substitution, one right-hand side at a time.
    let cols = b.cols();
    let mut x = Matrix::zeros(n, cols);
    let mut y = vec![0.0; n];
    for c in 0..cols {
        for i in 0..n {
            let mut s = b.get(i, c);
            for k in 0..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l.get(k, i) * x.get(k, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
    }
    Ok(x)
}
