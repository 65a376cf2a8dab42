//! Banded symmetric positive-definite linear algebra.
//!
//! The discrete Laplacians assembled in this crate are symmetric M-matrices
//! with small bandwidth (1 for one-dimensional and radial grids, the
//! transverse node count for tensor grids), so a banded Cholesky
//! factorization solves them directly in O(n * bw^2).

use crate::error::{Error, Result};

/// Symmetric banded matrix, lower triangle stored row by row.
///
/// `band(i, j)` addresses A[i, j] for `i - bw <= j <= i`; entries left of the
/// band are zero. The upper triangle is implied by symmetry.
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    /// Row-major lower band: entry (i, k) with k in 0..=bw holds A[i, i - bw + k].
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Read A[i, j] from either triangle (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Set A[i, j] (and by symmetry A[j, i]); j must lie within the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let s = self.slot(i, j);
        self.data[s] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let s = self.slot(i, j);
        self.data[s] += value;
    }

    /// y = A x, using both triangles.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut acc = 0.0;
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            acc += self.data[self.slot(i, i)] * x[i];
            y[i] += acc;
        }
        y
    }

    /// Check the M-matrix sign structure along with weak diagonal dominance:
    /// positive diagonal, nonpositive off-diagonal entries, and row sums >= 0
    /// (within a relative slack for rounding).
    pub fn is_m_matrix(&self) -> bool {
        for i in 0..self.n {
            let diag = self.data[self.slot(i, i)];
            if !(diag > 0.0) {
                return false;
            }
            let mut off_sum = 0.0;
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                if a > 0.0 {
                    return false;
                }
                off_sum += a.abs();
            }
            let hi = (i + self.bw + 1).min(self.n);
            for j in i + 1..hi {
                if j - i <= self.bw {
                    let a = self.get(i, j);
                    if a > 0.0 {
                        return false;
                    }
                    off_sum += a.abs();
                }
            }
            if off_sum > diag * (1.0 + 1e-12) {
                return false;
            }
        }
        true
    }

    /// Banded Cholesky factorization A = L L^T; returns L in banded storage.
    pub fn cholesky(&self) -> Result<SymBanded> {
        let mut l = self.clone();
        let bw = self.bw;
        for j in 0..self.n {
            let lo = j.saturating_sub(bw);
            let mut d = l.data[l.slot(j, j)];
            for k in lo..j {
                let v = l.data[l.slot(j, k)];
                d -= v * v;
            }
            if d <= 0.0 {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d });
            }
            let d = d.sqrt();
            let sjj = l.slot(j, j);
            l.data[sjj] = d;
            let hi = (j + bw + 1).min(self.n);
            for i in j + 1..hi {
                let mut v = l.data[l.slot(i, j)];
                let klo = i.saturating_sub(bw).max(lo);
                for k in klo..j {
                    v -= l.data[l.slot(i, k)] * l.data[l.slot(j, k)];
                }
                let s = l.slot(i, j);
                l.data[s] = v / d;
            }
        }
        Ok(l)
    }

    /// Solve A x = b given the Cholesky factor L (forward then back substitution).
    pub fn solve_with_factor(l: &SymBanded, b: &[f64]) -> Vec<f64> {
        let n = l.n;
        let bw = l.bw;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut v = x[i];
            for j in lo..i {
                v -= l.data[l.slot(i, j)] * x[j];
            }
            x[i] = v / l.data[l.slot(i, i)];
        }
        // L^T x = y
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let mut v = x[i];
            for j in i + 1..hi {
                v -= l.data[l.slot(j, i)] * x[j];
            }
            x[i] = v / l.data[l.slot(i, i)];
        }
        x
    }
}
