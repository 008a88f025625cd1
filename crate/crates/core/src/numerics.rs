//! Small dense complex linear algebra and reproducible random streams.

use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Smallest eigenvalue accepted by [`ComplexMatrix::hermitian_inv_sqrt`].
pub const MIN_EIGENVALUE: f64 = 1e-12;

/// Tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "matrix entries",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
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

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation between `self` and its conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Hermitian inverse square root `A^{-1/2}` through the eigendecomposition
    /// `A = V diag(λ) V†`, giving `V diag(λ^{-1/2}) V†`.
    pub fn hermitian_inv_sqrt(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !self.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian(self.hermitian_defect()));
        }
        let n = self.rows;
        let m = DMatrix::from_fn(n, n, |i, j| self[(i, j)]);
        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= MIN_EIGENVALUE {
            return Err(Error::IllConditioned(min));
        }
        let v = &eig.eigenvectors;
        let inv_sqrt: Vec<f64> = eig.eigenvalues.iter().map(|l| l.sqrt().recip()).collect();
        let mut out = Self::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * inv_sqrt[k] * v[(j, k)].conj()).sum()
        });
        // Symmetrize away rounding so the result is Hermitian to machine precision.
        for i in 0..n {
            out[(i, i)].im = 0.0;
            for j in i + 1..n {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

/// Random generator handed out by [`RngStream`].
pub type StreamRng = ChaCha8Rng;

/// Identifies one independent random stream. Equal `(seed, stream)` pairs
/// always produce the same draws, whatever order streams are consumed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream id built from a trial index, a purpose tag and a sub-index
    /// (for example a subcarrier or codeword).
    pub fn for_trial(seed: u64, trial: u64, tag: u8, index: u32) -> Self {
        Self::new(seed, (trial << 40) | ((tag as u64) << 32) | index as u64)
    }

    pub fn generator(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws `n` circularly symmetric complex Gaussian samples with
/// `E|z|² = variance`.
pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> Result<Vec<Complex64>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let s = (variance / 2.0).sqrt();
    Ok((0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect())
}
