//! Small dense complex linear algebra: products, Cholesky, singular values.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![Complex64::zero(); self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        out
    }

    /// Euclidean norm of each column.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (a, z) in acc.iter_mut().zip(self.row(r)) {
                *a += z.norm_sqr();
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    worst = worst.max(self[(r, c)].norm());
                }
            }
        }
        worst
    }

    /// Lower-triangular `L` with `self = L L^H`.
    pub fn cholesky(&self) -> Result<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[(j, j)] = Complex64::new(d, 0.0);
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    /// Solves `self · X = rhs` for lower-triangular `self`.
    pub fn solve_lower(&self, rhs: &Self) -> Self {
        assert!(self.is_square() && self.rows == rhs.rows);
        let n = self.rows;
        let mut x = rhs.clone();
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self[(i, i)];
            }
        }
        x
    }

    /// Singular values in nonincreasing order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<f64> {
        // work on the thinner orientation so columns outnumber nothing
        let a = if self.rows >= self.cols {
            self.clone()
        } else {
            self.adjoint()
        };
        let (m, n) = (a.rows, a.cols);
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| a.column(c)).collect();
        let eps = 1e-15;
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (alpha, beta, gamma) = {
                        let (cp, cq) = (&cols[p], &cols[q]);
                        let mut alpha = 0.0;
                        let mut beta = 0.0;
                        let mut gamma = Complex64::zero();
                        for i in 0..m {
                            alpha += cp[i].norm_sqr();
                            beta += cq[i].norm_sqr();
                            gamma += cp[i].conj() * cq[i];
                        }
                        (alpha, beta, gamma)
                    };
                    let g = gamma.norm();
                    if g <= eps * (alpha * beta).sqrt() || g == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (lo, hi) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for i in 0..m {
                        let x = cp[i];
                        let y = cq[i] * phase.conj();
                        cp[i] = x * c - y * s;
                        cq[i] = (x * s + y * c) * phase;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Largest singular value: Lanczos with full reorthogonalization on
    /// `A^H A`, then bisection on the tridiagonal projection.
    pub fn spectral_norm(&self) -> f64 {
        if self.data.iter().all(|z| z.is_zero()) {
            return 0.0;
        }
        let n = self.cols;
        // deterministic, generic start vector
        let mut q: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0, 0.0))
            .collect();
        let nq = norm(&q);
        q.iter_mut().for_each(|z| *z /= nq);
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut previous = 0.0;
        loop {
            let mut w = self.matvec_adjoint(&self.matvec(&q));
            let a = w.iter().zip(&q).map(|(x, y)| (y.conj() * x).re).sum::<f64>();
            basis.push(q);
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let proj: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= proj * bi;
                    }
                }
            }
            let k = alpha.len();
            let top = largest_tridiagonal_eigenvalue(&alpha, &beta);
            let next_beta = norm(&w);
            let converged = k >= 4 && (top - previous).abs() <= 1e-15 * top;
            if k == n || next_beta <= 1e-14 * top.max(f64::MIN_POSITIVE) || converged || k >= 400 {
                return top.max(0.0).sqrt();
            }
            previous = top;
            beta.push(next_beta);
            q = w.into_iter().map(|z| z / next_beta).collect();
        }
    }
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn largest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let radius = |i: usize| {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { beta[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    // number of eigenvalues below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let off = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { off / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        CMatrix::from_row_major(rows, cols, data).unwrap()
    }

    #[test]
    fn diagonal_singular_values_are_sorted_moduli() {
        let d = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -3.0),
            Complex64::new(1.0, 1.0),
        ];
        let sv = CMatrix::from_diagonal(&d).singular_values();
        assert_relative_eq!(sv[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(sv[1], 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(sv[2], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_svd_agrees_with_lanczos_and_frobenius() {
        for (r, c, seed) in [(12, 12, 1u64), (15, 9, 2), (7, 11, 3)] {
            let a = random_matrix(r, c, seed);
            let sv = a.singular_values();
            let frob: f64 = sv.iter().map(|s| s * s).sum();
            assert_relative_eq!(frob.sqrt(), a.frobenius_norm(), max_relative = 1e-12);
            assert_relative_eq!(sv[0], a.spectral_norm(), max_relative = 1e-12);
            assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn spectral_norm_resolves_clustered_top_values() {
        let d: Vec<Complex64> = (1..=200)
            .map(|k| Complex64::new(k as f64 / (1.0 + (k * k) as f64).sqrt(), 0.5))
            .collect();
        let expected = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_relative_eq!(CMatrix::from_diagonal(&d).spectral_norm(), expected, max_relative = 1e-13);
        let a = random_matrix(40, 40, 4);
        assert_relative_eq!(a.spectral_norm(), a.singular_values()[0], max_relative = 1e-12);
    }

    #[test]
    fn unitary_matrix_has_unit_singular_values() {
        // 2x2 rotation with phases
        let (c, s) = (0.6, 0.8);
        let u = CMatrix::from_row_major(
            2,
            2,
            alloc::vec![
                Complex64::new(c, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(c, 0.0),
            ],
        )
        .unwrap();
        for s in u.singular_values() {
            assert_relative_eq!(s, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cholesky_reconstructs_gram_matrix() {
        let a = random_matrix(10, 6, 9);
        let g = a.adjoint().matmul(&a);
        let l = g.cholesky().unwrap();
        let back = l.matmul(&l.adjoint());
        assert!(back.sub(&g).frobenius_norm() < 1e-12 * g.frobenius_norm());
        let x = l.solve_lower(&g);
        assert!(l.matmul(&x).sub(&g).frobenius_norm() < 1e-10);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = CMatrix::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert_eq!(m.cholesky(), Err(Error::NotPositiveDefinite));
    }
}
