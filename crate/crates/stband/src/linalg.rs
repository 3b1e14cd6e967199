//! Small dense-structure linear solvers: tridiagonal (Thomas), banded LU without
//! pivoting, and Jacobi-preconditioned conjugate gradients.

use crate::{Error, Result};

/// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`; `sub[0]` and
/// `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Linear("tridiagonal band lengths differ".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Linear("zero pivot".into()));
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Linear(format!("zero pivot at row {i}")));
        }
        c[i] = sup[i] / beta;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square matrix stored by diagonals with equal lower and upper half-bandwidth `k`.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    k: usize,
    // row-major, row i holds columns i-k ..= i+k
    a: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, k: usize) -> Self {
        Banded { n, k, a: vec![0.0; n * (2 * k + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.k >= i && j <= i + self.k);
        i * (2 * self.k + 1) + (j + self.k - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.idx(i, j);
        self.a[p] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.k < i || j > i + self.k {
            0.0
        } else {
            self.a[self.idx(i, j)]
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.k);
                let hi = (i + self.k).min(self.n - 1);
                (lo..=hi).map(|j| self.a[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination restricted to the band; intended for diagonally
    /// dominant systems where pivoting is unnecessary.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (n, k) = (self.n, self.k);
        let mut m = self.clone();
        let mut b = rhs.to_vec();
        for p in 0..n {
            let piv = m.a[m.idx(p, p)];
            if piv == 0.0 || !piv.is_finite() {
                return Err(Error::Linear(format!("zero pivot at row {p}")));
            }
            for i in p + 1..=(p + k).min(n - 1) {
                let l = m.a[m.idx(i, p)] / piv;
                if l == 0.0 {
                    continue;
                }
                for j in p..=(p + k).min(n - 1) {
                    let v = m.a[m.idx(p, j)];
                    let q = m.idx(i, j);
                    m.a[q] -= l * v;
                }
                b[i] -= l * b[p];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + k).min(n - 1) {
                s -= m.a[m.idx(i, j)] * x[j];
            }
            x[i] = s / m.a[m.idx(i, i)];
        }
        Ok(x)
    }
}

/// Sparse row-compressed matrix used by the iterative 3D path.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&p| self.cols[p] == i)
                    .map_or(0.0, |p| self.vals[p])
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite
/// system, stopping at `‖r‖ ≤ rel_tol ‖b‖`.
pub fn conjugate_gradient(a: &Csr, b: &[f64], x0: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    a.mul(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= rel_tol * bnorm {
        Ok(x)
    } else {
        Err(Error::Linear(format!(
            "conjugate gradients stalled at relative residual {:e}",
            dot(&r, &r).sqrt() / bnorm
        )))
    }
}
