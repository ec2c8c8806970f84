//! Symmetric positive-definite banded matrices with a Cholesky factorization.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: entry (i, j) with `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (i - j)
    }

    /// Adds `v` at (i, j); entries above the diagonal are mirrored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw, "entry outside the band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place Cholesky; the band then holds L.
    pub fn factor(mut self) -> Result<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut s = self.data[j * w];
            for k in lo..j {
                let l = self.data[j * w + (j - k)];
                s -= l * l;
            }
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::NotPositiveDefinite(s));
            }
            let djj = s.sqrt();
            self.data[j * w] = djj;
            for i in j + 1..(j + w).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = self.data[i * w + (i - j)];
                for k in lo_i..j {
                    s -= self.data[i * w + (i - k)] * self.data[j * w + (j - k)];
                }
                self.data[i * w + (i - j)] = s / djj;
            }
        }
        Ok(BandedCholesky { l: self })
    }
}

/// Cholesky factor of a [`BandedSpd`].
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: BandedSpd,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        let w = bw + 1;
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= l.data[i * w + (i - k)] * y[k];
            }
            y[i] = s / l.data[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + w).min(n) {
                s -= l.data[k * w + (k - i)] * y[k];
            }
            y[i] = s / l.data[i * w];
        }
        y
    }
}
