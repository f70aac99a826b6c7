//! Hermitian eigendecomposition for 2x2, 3x3 and 4x4 matrices.
//!
//! 2x2 inputs are diagonalized by a single analytic rotation; larger sizes use
//! cyclic Jacobi sweeps with complex rotations. No external solver is pulled
//! in for matrices this small.

use num_complex::Complex;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Off-diagonal Frobenius norm below which the sweep stops.
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Sweep cap; cyclic Jacobi on a 4x4 converges in a handful of sweeps.
const MAX_SWEEPS: usize = 100;

/// Components smaller than this are skipped when picking the entry that fixes
/// an eigenvector's global phase.
const PHASE_PIVOT_TOL: f64 = 1e-7;

/// Result of [`ComplexMatrix::eigh`]: eigenvalues ascending, eigenvectors as
/// unit column vectors in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Scalar> {
    eigenvalues: Vec<T>,
    eigenvectors: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[Complex<T>] {
        &self.eigenvectors[i]
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Sum of `lambda_i v_i v_i^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            out = out.add(&ComplexMatrix::outer(v, v).scale_re(*lambda));
        }
        out
    }

    /// Largest entrywise deviation of the reconstruction from `m`.
    pub fn reconstruction_error(&self, m: &ComplexMatrix<T>) -> T {
        self.reconstruct().max_abs_diff(m)
    }

    /// Largest deviation of `<v_i|v_j>` from the identity.
    pub fn orthonormality_error(&self) -> T {
        let n = self.len();
        let mut max = T::zero();
        for i in 0..n {
            for j in 0..n {
                let dot: Complex<T> = self.eigenvectors[i]
                    .iter()
                    .zip(&self.eigenvectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { T::one() } else { T::zero() };
                let dev = (dot - Complex::new(target, T::zero())).norm();
                if dev > max {
                    max = dev;
                }
            }
        }
        max
    }
}

pub(super) fn eigh<T: Scalar>(m: &ComplexMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = m.rows();
    if !m.is_square() || !(2..=4).contains(&n) {
        return Err(Error::UnsupportedSize {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let finite = m
        .entries()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite());
    let deviation = m.hermitian_deviation();
    // The deviation comparison alone would let NaN entries slip past.
    if !finite || deviation > T::tol(super::HERMITICITY_TOL) {
        return Err(Error::NotHermitian {
            tol: T::tol_f64(super::HERMITICITY_TOL),
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
        });
    }

    // Work on the symmetrized copy so sub-tolerance asymmetry cannot leak in.
    let mut a = m.add(&m.adjoint()).scale_re(T::lit(0.5));
    let mut v = ComplexMatrix::identity(n);

    if n == 2 {
        rotate(&mut a, &mut v, 0, 1);
    } else {
        let tol = T::tol(OFF_DIAGONAL_TOL);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) < tol {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_norm(&a) >= tol {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off: off_diagonal_norm(&a).to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("eigenvalues are finite")
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &col in &order {
        eigenvalues.push(a.get(col, col).re);
        let mut vec: Vec<Complex<T>> = (0..n).map(|row| v.get(row, col)).collect();
        fix_phase(&mut vec);
        eigenvectors.push(vec);
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm<T: Scalar>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut sum = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation zeroing the (p, q) entry of the Hermitian
/// working matrix `a`, accumulated into `v`.
fn rotate<T: Scalar>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let g = a.get(p, q);
    let w = g.norm();
    if w == T::zero() {
        return;
    }
    // Unit phase of the pivot; dividing it out reduces the update to the real
    // symmetric rotation formulas.
    let phase = g / Complex::new(w, T::zero());
    let alpha = a.get(p, p).re;
    let beta = a.get(q, q).re;

    let two = T::lit(2.0);
    let tau = (alpha - beta) / (two * w);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    let cs = Complex::new(c, T::zero());
    let sp_conj = phase.conj() * s; // s * conj(phase)
    let sp = phase * s; // s * phase

    // A <- A U with U supported on the (p, q) plane.
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * cs + akq * sp_conj);
        a.set(
            k,
            q,
            akq * cs * phase.conj() - akp * Complex::new(s, T::zero()),
        );
    }
    // A <- U^dagger A.
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, apk * cs + aqk * sp);
        a.set(q, k, aqk * cs * phase - apk * Complex::new(s, T::zero()));
    }
    // V <- V U.
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * cs + vkq * sp_conj);
        v.set(
            k,
            q,
            vkq * cs * phase.conj() - vkp * Complex::new(s, T::zero()),
        );
    }

    // The rotation zeroes (p, q) analytically; pin it and keep the diagonal real.
    let zero = Complex::new(T::zero(), T::zero());
    a.set(p, q, zero);
    a.set(q, p, zero);
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    a.set(p, p, Complex::new(app.re, T::zero()));
    a.set(q, q, Complex::new(aqq.re, T::zero()));
}

/// Multiply by a global phase so the first component above the pivot
/// threshold is real positive.
fn fix_phase<T: Scalar>(v: &mut [Complex<T>]) {
    let pivot_tol = T::lit(PHASE_PIVOT_TOL);
    if let Some(pivot) = v.iter().find(|z| z.norm() > pivot_tol).copied() {
        let phase = pivot.conj() / Complex::new(pivot.norm(), T::zero());
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}
