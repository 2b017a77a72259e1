//! Small dense complex linear algebra and reproducible random sampling.
//!
//! Every matrix in the receiver chain is Hermitian positive (semi)definite by
//! construction and at most a few dozen rows, so the kernels here are written
//! for that regime: Cholesky factorization for inversion and solves, cyclic
//! Jacobi rotations for Hermitian eigenvalues. Sampling uses ChaCha8 with one
//! counter-addressed substream per Monte Carlo trial, which makes parallel
//! runs order-independent and bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex;
use rand_core::{RngCore, SeedableRng};

use crate::math;

pub type Complex64 = Complex<f64>;

/// Max elementwise asymmetry |A_ij - conj(A_ji)| accepted as Hermitian,
/// relative to the largest entry magnitude (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Inverse quality contract: ||A·A⁻¹ - I||_F / ||I||_F on accepted inputs.
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues of PSD inputs above this negative floor are clamped to zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 64;

/// Numerical failures on a single realization. Callers discard the trial,
/// count it, and draw a replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericsError {
    /// A Cholesky pivot was not strictly positive.
    NotPositiveDefinite,
    /// The Jacobi eigensolver did not reach its off-diagonal tolerance.
    ConvergenceFailure,
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericsError::NotPositiveDefinite => {
                write!(
                    f,
                    "matrix is not positive definite (factorization pivot failed)"
                )
            }
            NumericsError::ConvergenceFailure => {
                write!(f, "eigensolver failed to converge")
            }
        }
    }
}

impl core::error::Error for NumericsError {}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&rhs.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&rhs.data) {
            *v -= w;
        }
        out
    }

    /// Adds `c` to every diagonal entry in place.
    pub fn add_real_diag(&mut self, c: f64) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self[(i, i)] += c;
        }
    }

    /// A^H · A. Built entry-by-entry on the upper triangle and mirrored, so
    /// the result is exactly Hermitian with a real diagonal.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    out[(i, i)] = Complex64::new(acc.re, 0.0);
                } else {
                    out[(i, j)] = acc;
                    out[(j, i)] = acc.conj();
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest |A_ij - conj(A_ji)| over all entry pairs.
    pub fn hermitian_residual(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.hermitian_residual() <= tol * self.max_abs().max(1.0)
    }

    /// Lower Cholesky factor L with A = L·Lᴴ. Fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<ComplexMatrix, NumericsError> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !d.is_finite() || d <= 0.0 {
                return Err(NumericsError::NotPositiveDefinite);
            }
            let ljj = math::sqrt(d);
            l[(j, j)] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut acc = self[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = acc / ljj;
            }
        }
        Ok(l)
    }

    /// Solves L·X = B by forward substitution, L lower triangular.
    pub fn solve_lower(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(l.rows, l.cols);
        assert_eq!(l.rows, b.rows);
        let n = l.rows;
        let mut x = b.clone();
        for col in 0..b.cols {
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= l[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc / l[(i, i)].re;
            }
        }
        x
    }

    /// Solves Lᴴ·X = B by back substitution, L lower triangular.
    pub fn solve_upper_conj(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(l.rows, l.cols);
        assert_eq!(l.rows, b.rows);
        let n = l.rows;
        let mut x = b.clone();
        for col in 0..b.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in (i + 1)..n {
                    acc -= l[(k, i)].conj() * x[(k, col)];
                }
                x[(i, col)] = acc / l[(i, i)].re;
            }
        }
        x
    }

    /// Solves A·X = B through an existing Cholesky factor of A.
    pub fn cholesky_solve(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        Self::solve_upper_conj(l, &Self::solve_lower(l, b))
    }
}

impl core::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
///
/// The result is symmetrized so downstream Hermitian checks see an exactly
/// Hermitian matrix.
pub fn hermitian_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    assert!(
        a.is_hermitian(HERMITIAN_TOL),
        "hermitian_inverse requires a Hermitian input (residual {:.3e})",
        a.hermitian_residual()
    );
    let l = a.cholesky()?;
    let inv = ComplexMatrix::cholesky_solve(&l, &ComplexMatrix::identity(a.rows()));
    debug_assert!(inv.is_finite());
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex64::new(inv[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (inv[(i, j)] + inv[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, sorted non-increasing.
///
/// Cyclic Jacobi with complex rotations; converges quadratically for the
/// matrix sizes used here. Tiny negative values within [`EIGENVALUE_CLAMP`]
/// of zero are clamped so PSD inputs report nonnegative spectra.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    assert!(
        a.is_hermitian(HERMITIAN_TOL),
        "hermitian_eigenvalues requires a Hermitian input (residual {:.3e})",
        a.hermitian_residual()
    );
    let n = a.rows();
    let mut m = a.clone();
    // Work on an exactly Hermitian copy: real diagonal, mirrored triangle.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    let scale = m.frobenius_norm();
    let tol = scale * 1e-15;

    let mut converged = scale == 0.0 || n == 1;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m[(i, j)].norm_sqr();
            }
        }
        if math::sqrt(off) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, p, q);
            }
        }
    }
    if !converged {
        // One final check: the last sweep may have finished the job.
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m[(i, j)].norm_sqr();
            }
        }
        if math::sqrt(off) > tol {
            return Err(NumericsError::ConvergenceFailure);
        }
    }

    let mut eigs: Vec<f64> = (0..n)
        .map(|i| {
            let v = m[(i, i)].re;
            if (-EIGENVALUE_CLAMP..0.0).contains(&v) {
                0.0
            } else {
                v
            }
        })
        .collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(eigs)
}

/// One Jacobi rotation zeroing the (p, q) entry of a Hermitian matrix.
///
/// With a_pq = |β|·u, the unitary acts as columns (p, q) -> (c·p - s·ū·q,
/// s·u·p + c·q); tangent t solves t² + 2τt - 1 = 0 for τ = (a_qq - a_pp)/2|β|.
fn jacobi_rotate(m: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = m[(p, q)];
    let beta_abs = beta.norm();
    if beta_abs == 0.0 {
        return;
    }
    let u = beta / beta_abs;
    let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * beta_abs);
    let sign = if tau < 0.0 { -1.0 } else { 1.0 };
    let t = sign / (tau.abs() + math::sqrt(1.0 + tau * tau));
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;

    let n = m.rows();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    m[(p, p)] = Complex64::new(app - t * beta_abs, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * beta_abs, 0.0);
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        let new_kp = akp * c - akq * (u.conj() * s);
        let new_kq = akp * (u * s) + akq * c;
        m[(k, p)] = new_kp;
        m[(p, k)] = new_kp.conj();
        m[(k, q)] = new_kq;
        m[(q, k)] = new_kq.conj();
    }
}

/// Address of a reproducible random substream.
///
/// The same `(seed, stream)` pair yields the same sample sequence on every
/// platform, independent of what other streams were consumed and in which
/// order. Trials map to streams via [`crate::model::substream_id`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }
}

/// Draws i.i.d. CN(0, 1) values from one substream.
///
/// ChaCha8 keyed by a SplitMix64 expansion of the seed, with the substream id
/// as the cipher's stream parameter. The Gaussian transform is Marsaglia's
/// polar method through `libm`, keeping the output bit-stable across
/// platforms and build configurations.
pub struct Cn01Sampler {
    rng: rand_chacha::ChaCha8Rng,
}

impl Cn01Sampler {
    pub fn new(stream: RngStream) -> Self {
        let mut key = [0u8; 32];
        let mut state = stream.seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = rand_chacha::ChaCha8Rng::from_seed(key);
        rng.set_stream(stream.stream);
        Cn01Sampler { rng }
    }

    #[inline]
    fn uniform_signed(&mut self) -> f64 {
        // 53-bit uniform in [0, 1), mapped to [-1, 1).
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        2.0 * u - 1.0
    }

    /// One CN(0, 1) draw: real and imaginary parts each N(0, 1/2).
    pub fn next_entry(&mut self) -> Complex64 {
        loop {
            let a = self.uniform_signed();
            let b = self.uniform_signed();
            let s = a * a + b * b;
            if s < 1.0 && s > 0.0 {
                // Polar method scaled by 1/sqrt(2) for unit total variance.
                let f = math::sqrt(-math::ln(s) / s);
                return Complex64::new(a * f, b * f);
            }
        }
    }

    pub fn fill(&mut self, m: &mut ComplexMatrix) {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m[(i, j)] = self.next_entry();
            }
        }
    }
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Matrix of i.i.d. circularly symmetric complex Gaussian entries with unit
/// total variance per entry.
pub fn sample_cn01(stream: RngStream, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= 1 && cols >= 1);
    let mut m = ComplexMatrix::zeros(rows, cols);
    Cn01Sampler::new(stream).fill(&mut m);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> ComplexMatrix {
        sample_cn01(RngStream::new(seed, 0), rows, cols)
    }

    #[test]
    fn sample_is_deterministic() {
        let a = sample_cn01(RngStream::new(7, 0), 2, 2);
        let b = sample_cn01(RngStream::new(7, 0), 2, 2);
        assert_eq!(a, b);
        let c = sample_cn01(RngStream::new(7, 1), 2, 2);
        assert_ne!(a, c);
        let d = sample_cn01(RngStream::new(8, 0), 2, 2);
        assert_ne!(a, d);
    }

    #[test]
    fn inverse_identity() {
        let i3 = ComplexMatrix::identity(3);
        let inv = hermitian_inverse(&i3).unwrap();
        assert_eq!(inv, i3);
    }

    #[test]
    fn inverse_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[2.0, 4.0]);
        let inv = hermitian_inverse(&a).unwrap();
        assert!((inv[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)].re - 0.25).abs() < 1e-15);
        assert_eq!(inv[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inverse_residual_on_random_psd() {
        // A = B·Bᴴ + I is Hermitian PD; check the product residual contract.
        let b = random_matrix(11, 3, 3);
        let mut a = b.mul(&b.conj_transpose());
        a.add_real_diag(1.0);
        let inv = hermitian_inverse(&a).unwrap();
        let mut resid = a.mul(&inv);
        resid.add_real_diag(-1.0);
        let rel = resid.frobenius_norm() / math::sqrt(3.0);
        assert!(rel <= INVERSE_RESIDUAL_TOL, "residual {rel:.3e}");
    }

    #[test]
    fn inverse_rejects_indefinite() {
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert_eq!(
            hermitian_inverse(&a),
            Err(NumericsError::NotPositiveDefinite)
        );
    }

    #[test]
    fn eigenvalues_diagonal_ordering() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 3.0, 2.0]);
        let e = hermitian_eigenvalues(&a).unwrap();
        assert_eq!(e, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigenvalues_identity() {
        let e = hermitian_eigenvalues(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e, vec![1.0, 1.0]);
    }

    #[test]
    fn eigenvalues_match_trace() {
        let b = random_matrix(23, 4, 4);
        // (B + Bᴴ)/2 is Hermitian but generally indefinite.
        let bh = b.conj_transpose();
        let mut a = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] = (b[(i, j)] + bh[(i, j)]) * 0.5;
            }
        }
        let e = hermitian_eigenvalues(&a).unwrap();
        let sum: f64 = e.iter().sum();
        let tr = a.trace().re;
        assert!(
            (sum - tr).abs() <= 1e-8 * tr.abs().max(1.0),
            "sum {sum} vs trace {tr}"
        );
    }

    #[test]
    fn eigenvalues_2x2_closed_form() {
        let b = random_matrix(31, 3, 2);
        let a = b.gram();
        let e = hermitian_eigenvalues(&a).unwrap();
        let mean = 0.5 * (a[(0, 0)].re + a[(1, 1)].re);
        let det = a[(0, 0)].re * a[(1, 1)].re - a[(0, 1)].norm_sqr();
        let disc = math::sqrt((mean * mean - det).max(0.0));
        assert!((e[0] - (mean + disc)).abs() < 1e-12);
        assert!((e[1] - (mean - disc)).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_zero_matrix() {
        let e = hermitian_eigenvalues(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let b = random_matrix(41, 4, 4);
        let mut a = b.mul(&b.conj_transpose());
        a.add_real_diag(1.0);
        let rhs = random_matrix(42, 4, 2);
        let l = a.cholesky().unwrap();
        let x = ComplexMatrix::cholesky_solve(&l, &rhs);
        let resid = a.mul(&x).sub(&rhs);
        assert!(resid.frobenius_norm() < 1e-10 * rhs.frobenius_norm().max(1.0));
    }

    #[test]
    fn gram_is_hermitian_psd() {
        let x = random_matrix(51, 5, 3);
        let g = x.gram();
        assert_eq!(g.hermitian_residual(), 0.0);
        let e = hermitian_eigenvalues(&g).unwrap();
        assert!(e.iter().all(|&v| v >= 0.0));
    }
}
