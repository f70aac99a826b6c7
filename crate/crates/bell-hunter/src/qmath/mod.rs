//! Minimal dense complex linear algebra for the 2x2 / 4x4 Hermitian matrices
//! this crate works with: products, Kronecker products, eigendecomposition,
//! partial trace and partial transpose. Nothing here is tuned for large n;
//! the sizes are fixed and tiny.

mod eigen;

pub use eigen::EigenDecomposition;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute tolerance for Hermiticity checks (at f64; rescaled per scalar
/// type). Inputs are built from products of unit-modulus quantities;
/// accumulated error sits far below this.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(
            rows,
            cols,
            vec![Complex::new(T::zero(), T::zero()); rows * cols],
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Outer product |u><v| of two column vectors.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in add"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in sub"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a_ik = self.get(i, k);
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a_ik * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matvec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Kronecker product; the first factor indexes the first (Alice) qubit in
    /// the row-major convention used throughout.
    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            let (i1, i2) = (i / other.rows, i % other.rows);
            let (j1, j2) = (j / other.cols, j % other.cols);
            self.get(i1, j1) * other.get(i2, j2)
        })
    }

    /// Trace over the designated qubit of a two-qubit (4x4) operator.
    pub fn partial_trace(&self, traced: Subsystem) -> Result<Self> {
        self.expect_4x4("partial_trace")?;
        let mut out = Self::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let mut sum = Complex::new(T::zero(), T::zero());
                for k in 0..2 {
                    sum += match traced {
                        Subsystem::First => self.get(2 * k + a, 2 * k + b),
                        Subsystem::Second => self.get(2 * a + k, 2 * b + k),
                    };
                }
                out.set(a, b, sum);
            }
        }
        Ok(out)
    }

    /// Transpose of the second-qubit indices of a 4x4 operator. Involutive,
    /// and preserves Hermiticity of Hermitian input.
    pub fn partial_transpose(&self) -> Result<Self> {
        self.expect_4x4("partial_transpose")?;
        Ok(Self::from_fn(4, 4, |r, c| {
            let (i, k) = (r / 2, r % 2);
            let (j, l) = (c / 2, c % 2);
            self.get(2 * i + l, 2 * j + k)
        }))
    }

    /// Eigendecomposition of a Hermitian 2x2, 3x3 or 4x4 matrix. Eigenvalues
    /// come back ascending; each eigenvector's first significant component is
    /// made real positive so outputs are deterministic.
    pub fn eigh(&self) -> Result<EigenDecomposition<T>> {
        eigen::eigh(self)
    }

    pub fn hermitian_deviation(&self) -> T {
        let mut max = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > max {
                    max = d;
                }
            }
        }
        max
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    fn expect_4x4(&self, op: &'static str) -> Result<()> {
        if self.rows != 4 || self.cols != 4 {
            return Err(Error::WrongSize {
                op,
                expected: 4,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

/// Which qubit of a two-qubit operator an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn pauli_x<T: Scalar>() -> ComplexMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    ComplexMatrix::new(
        2,
        2,
        vec![
            Complex::new(o, o),
            Complex::new(l, o),
            Complex::new(l, o),
            Complex::new(o, o),
        ],
    )
}

pub fn pauli_y<T: Scalar>() -> ComplexMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    ComplexMatrix::new(
        2,
        2,
        vec![
            Complex::new(o, o),
            Complex::new(o, -l),
            Complex::new(o, l),
            Complex::new(o, o),
        ],
    )
}

pub fn pauli_z<T: Scalar>() -> ComplexMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    ComplexMatrix::new(
        2,
        2,
        vec![
            Complex::new(l, o),
            Complex::new(o, o),
            Complex::new(o, o),
            Complex::new(-l, o),
        ],
    )
}

/// The three Paulis in the conventional order.
pub fn paulis<T: Scalar>() -> [ComplexMatrix<T>; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}
