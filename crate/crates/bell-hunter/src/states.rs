//! Two-qubit states: construction, random sampling and entanglement
//! characterization.
//!
//! Pure states are handled through their Schmidt form, mixed states through
//! the density matrix plus the Pauli correlation picture (local vectors `r`,
//! `s` and correlation matrix `T`). Random mixed states are drawn from the
//! Hilbert-Schmidt (Ginibre) measure; pure states and local bases are Haar
//! uniform.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::qmath::{self, ComplexMatrix, Subsystem};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Absolute tolerance on normalization / Hermiticity invariants.
const STATE_TOL: f64 = 1e-12;

/// Density-matrix eigenvalues above this (negative) floor count as valid;
/// anything in `[-1e-10, 0)` is treated as zero round-off.
const EIGENVALUE_FLOOR: f64 = -1e-10;

/// A normalized two-qubit state vector, amplitudes ordered |00>, |01>, |10>, |11>.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Scalar> {
    amplitudes: [Complex<T>; 4],
}

impl<T: Scalar> PureState<T> {
    pub fn new(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let norm_sq: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq.sqrt() - T::one()).abs() > T::tol(STATE_TOL) {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("state vector norm {} is not 1", norm_sq.sqrt()),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Normalize arbitrary amplitudes into a state.
    pub fn normalized(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::tol(STATE_TOL) {
            return Err(Error::ZeroNormBlock);
        }
        let scale = Complex::new(T::one() / norm, T::zero());
        Ok(Self {
            amplitudes: amplitudes.map(|a| a * scale),
        })
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The rank-one density matrix |psi><psi|.
    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::new(ComplexMatrix::outer(&self.amplitudes, &self.amplitudes))
            .expect("projector of a unit vector is a valid state")
    }

    /// Amplitudes as a JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.amplitudes
                .iter()
                .map(|a| {
                    json!([
                        a.re.to_f64().unwrap_or(f64::NAN),
                        a.im.to_f64().unwrap_or(f64::NAN)
                    ])
                })
                .collect(),
        )
    }
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity (up to round-off).
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("expected 4x4, got {}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let dev = matrix.hermitian_deviation();
        if dev > T::tol(STATE_TOL) {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("Hermiticity deviation {dev}"),
            });
        }
        let trace = matrix.trace();
        if (trace.re - T::one()).abs() > T::tol(STATE_TOL) || trace.im.abs() > T::tol(STATE_TOL) {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace {} + {}i is not 1", trace.re, trace.im),
            });
        }
        let eigs = matrix.eigh().map_err(|e| Error::InvalidDensityMatrix {
            reason: format!("eigendecomposition failed: {e}"),
        })?;
        let min = eigs.eigenvalues()[0];
        if min < T::tol(EIGENVALUE_FLOOR) {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("minimum eigenvalue {min} below floor"),
            });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn purity(&self) -> T {
        self.matrix
            .matmul(&self.matrix)
            .expect("4x4 product")
            .trace()
            .re
    }

    /// Matrix as nested JSON arrays of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..4)
                .map(|i| {
                    Value::Array(
                        (0..4)
                            .map(|j| {
                                let e = self.matrix.get(i, j);
                                json!([
                                    e.re.to_f64().unwrap_or(f64::NAN),
                                    e.im.to_f64().unwrap_or(f64::NAN)
                                ])
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Reads either a 4x4 nested array (density matrix) or a flat array of 4
    /// pairs (pure state, converted to its projector).
    pub fn from_json(value: &Value) -> Result<Self> {
        let rows = value
            .as_array()
            .ok_or_else(|| Error::Format("expected a JSON array".into()))?;
        if rows.len() != 4 {
            return Err(Error::Format(format!(
                "expected 4 rows or 4 amplitudes, got {}",
                rows.len()
            )));
        }
        let looks_pure = rows[0]
            .as_array()
            .map(|r| r.len() == 2 && r[0].is_number())
            .unwrap_or(false);
        if looks_pure {
            let mut amps = [Complex::new(T::zero(), T::zero()); 4];
            for (i, item) in rows.iter().enumerate() {
                amps[i] = parse_pair(item)?;
            }
            return Ok(PureState::new(amps)
                .map_err(|e| Error::Format(format!("invalid pure state: {e}")))?
                .density());
        }
        let mut m = ComplexMatrix::zeros(4, 4);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Format("expected nested arrays".into()))?;
            if row.len() != 4 {
                return Err(Error::Format(format!("row {i} has {} entries", row.len())));
            }
            for (j, item) in row.iter().enumerate() {
                m.set(i, j, parse_pair(item)?);
            }
        }
        Self::new(m).map_err(|e| Error::Format(format!("not a density matrix: {e}")))
    }
}

fn parse_pair<T: Scalar>(v: &Value) -> Result<Complex<T>> {
    let pair = v
        .as_array()
        .filter(|p| p.len() == 2)
        .ok_or_else(|| Error::Format("matrix entries must be [re, im] pairs".into()))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| Error::Format("non-numeric entry".into()))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| Error::Format("non-numeric entry".into()))?;
    Ok(Complex::new(T::lit(re), T::lit(im)))
}

/// Schmidt normal form of a pure state: coefficient plus the two local bases
/// (unitary columns).
#[derive(Debug, Clone)]
pub struct SchmidtForm<T: Scalar> {
    pub lambda: T,
    pub basis1: ComplexMatrix<T>,
    pub basis2: ComplexMatrix<T>,
}

impl<T: Scalar> SchmidtForm<T> {
    pub fn new(lambda: T, basis1: ComplexMatrix<T>, basis2: ComplexMatrix<T>) -> Result<Self> {
        if lambda < T::zero() || lambda > T::lit(0.5) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value: lambda.to_f64().unwrap_or(f64::NAN),
                lo: 0.0,
                hi: 0.5,
            });
        }
        for (name, b) in [("basis1", &basis1), ("basis2", &basis2)] {
            let gram = b.adjoint().matmul(b).expect("2x2 product");
            if gram.max_abs_diff(&ComplexMatrix::identity(2)) > T::tol(STATE_TOL) {
                return Err(Error::InvalidConfig(format!("{name} is not unitary")));
            }
        }
        Ok(Self {
            lambda,
            basis1,
            basis2,
        })
    }

    /// Identity local bases.
    pub fn computational(lambda: T) -> Result<Self> {
        Self::new(
            lambda,
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2),
        )
    }

    /// Fixed coefficient, Haar-random local bases.
    pub fn random(lambda: T, rng: &mut RandomStream) -> Result<Self> {
        Self::new(lambda, haar_unitary_2x2(rng), haar_unitary_2x2(rng))
    }
}

/// sqrt(lambda) |e0 f0> + sqrt(1 - lambda) |e1 f1> with e, f the basis columns.
pub fn from_schmidt<T: Scalar>(form: &SchmidtForm<T>) -> PureState<T> {
    let sl = form.lambda.sqrt();
    let sl1 = (T::one() - form.lambda).sqrt();
    let mut amps = [Complex::new(T::zero(), T::zero()); 4];
    for a in 0..2 {
        for b in 0..2 {
            amps[2 * a + b] = form.basis1.get(a, 0) * form.basis2.get(b, 0) * sl
                + form.basis1.get(a, 1) * form.basis2.get(b, 1) * sl1;
        }
    }
    PureState::new(amps).expect("Schmidt combination of orthonormal columns is normalized")
}

/// The singlet (|01> - |10>)/sqrt(2).
pub fn singlet<T: Scalar>() -> PureState<T> {
    let s = T::one() / T::lit(2.0).sqrt();
    PureState::new([
        Complex::new(T::zero(), T::zero()),
        Complex::new(s, T::zero()),
        Complex::new(-s, T::zero()),
        Complex::new(T::zero(), T::zero()),
    ])
    .expect("singlet is normalized")
}

/// Werner mixture of the singlet with white noise.
pub fn werner<T: Scalar>(lambda: T) -> Result<DensityMatrix<T>> {
    if lambda < T::zero() || lambda > T::one() {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 1.0,
        });
    }
    let proj = singlet::<T>().density();
    let noise = ComplexMatrix::identity(4).scale_re((T::one() - lambda) / T::lit(4.0));
    DensityMatrix::new(proj.matrix().scale_re(lambda).add(&noise))
}

/// Haar-uniform pure state: four independent standard complex Gaussians,
/// normalized.
pub fn haar_pure<T: Scalar>(rng: &mut RandomStream) -> PureState<T> {
    loop {
        let amps =
            std::array::from_fn(|_| Complex::new(T::standard_normal(rng), T::standard_normal(rng)));
        if let Ok(state) = PureState::normalized(amps) {
            return state;
        }
    }
}

/// Hilbert-Schmidt random density matrix: G G^dagger / Tr(G G^dagger) with G
/// a 4x4 standard complex Gaussian (Ginibre) matrix.
pub fn random_mixed<T: Scalar>(rng: &mut RandomStream) -> DensityMatrix<T> {
    loop {
        let g = ComplexMatrix::from_fn(4, 4, |_, _| {
            Complex::new(T::standard_normal(rng), T::standard_normal(rng))
        });
        let gg = g.matmul(&g.adjoint()).expect("4x4 product");
        let trace = gg.trace().re;
        if trace <= T::lit(1e-6) {
            continue;
        }
        if let Ok(rho) = DensityMatrix::new(gg.scale_re(T::one() / trace)) {
            return rho;
        }
    }
}

/// Haar-random U(2): Gram-Schmidt orthonormalization of a complex Gaussian
/// 2x2 matrix, with the triangular factor's diagonal kept real positive.
pub fn haar_unitary_2x2<T: Scalar>(rng: &mut RandomStream) -> ComplexMatrix<T> {
    loop {
        let g = ComplexMatrix::from_fn(2, 2, |_, _| {
            Complex::new(T::standard_normal(rng), T::standard_normal(rng))
        });
        let col0 = [g.get(0, 0), g.get(1, 0)];
        let n0: T = col0.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n0 < T::lit(1e-8) {
            continue;
        }
        let q0 = [col0[0] / n0, col0[1] / n0];
        let col1 = [g.get(0, 1), g.get(1, 1)];
        let overlap = q0[0].conj() * col1[0] + q0[1].conj() * col1[1];
        let v1 = [col1[0] - q0[0] * overlap, col1[1] - q0[1] * overlap];
        let n1: T = v1.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n1 < T::lit(1e-8) {
            continue;
        }
        let q1 = [v1[0] / n1, v1[1] / n1];
        return ComplexMatrix::new(2, 2, vec![q0[0], q1[0], q0[1], q1[1]]);
    }
}

/// Local Pauli expansion of a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition<T: Scalar> {
    /// First-qubit local vector, Tr(rho sigma_i x I).
    pub r: [T; 3],
    /// Second-qubit local vector, Tr(rho I x sigma_i).
    pub s: [T; 3],
    /// Correlation matrix, `t[n][m] = Tr(rho sigma_n x sigma_m)`.
    pub t: [[T; 3]; 3],
}

impl<T: Scalar> PauliDecomposition<T> {
    /// Rebuild the density matrix from the coefficients.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let i2 = ComplexMatrix::identity(2);
        let sigmas = qmath::paulis::<T>();
        let mut m = ComplexMatrix::identity(4);
        for (i, sigma) in sigmas.iter().enumerate() {
            m = m.add(&sigma.tensor(&i2).scale_re(self.r[i]));
            m = m.add(&i2.tensor(sigma).scale_re(self.s[i]));
        }
        for (n, sn) in sigmas.iter().enumerate() {
            for (m_idx, sm) in sigmas.iter().enumerate() {
                m = m.add(&sn.tensor(sm).scale_re(self.t[n][m_idx]));
            }
        }
        m.scale_re(T::lit(0.25))
    }
}

/// Coefficients of the local Pauli expansion.
pub fn pauli_decompose<T: Scalar>(rho: &DensityMatrix<T>) -> PauliDecomposition<T> {
    let i2 = ComplexMatrix::identity(2);
    let sigmas = qmath::paulis::<T>();
    let expect = |op: &ComplexMatrix<T>| -> T {
        // Tr(rho op) without forming the full product.
        let mut sum = Complex::new(T::zero(), T::zero());
        for i in 0..4 {
            for j in 0..4 {
                sum += rho.matrix().get(i, j) * op.get(j, i);
            }
        }
        sum.re
    };
    let mut out = PauliDecomposition {
        r: [T::zero(); 3],
        s: [T::zero(); 3],
        t: [[T::zero(); 3]; 3],
    };
    for i in 0..3 {
        out.r[i] = expect(&sigmas[i].tensor(&i2));
        out.s[i] = expect(&i2.tensor(&sigmas[i]));
        for j in 0..3 {
            out.t[i][j] = expect(&sigmas[i].tensor(&sigmas[j]));
        }
    }
    out
}

/// Concurrence of the Schmidt-form pure state, 2 sqrt(lambda (1 - lambda)).
pub fn concurrence_pure<T: Scalar>(lambda: T) -> Result<T> {
    if lambda < T::zero() || lambda > T::lit(0.5) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 0.5,
        });
    }
    Ok(T::lit(2.0) * (lambda * (T::one() - lambda)).sqrt())
}

/// Total magnitude of the negative part of the partial transpose's spectrum.
pub fn negativity<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    let pt = rho
        .matrix()
        .partial_transpose()
        .expect("density matrix is 4x4");
    let eigs = pt.eigh().expect("partial transpose stays Hermitian");
    eigs.eigenvalues()
        .iter()
        .map(|&ev| if ev < T::zero() { -ev } else { T::zero() })
        .sum()
}

/// The two leading eigenvalues of T^t T and their sum; a state can violate
/// the CHSH inequality iff the sum exceeds 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MQuantityResult<T: Scalar> {
    pub m: T,
    pub u: T,
    pub u_tilde: T,
}

impl<T: Scalar> MQuantityResult<T> {
    pub fn violates_chsh(&self) -> bool {
        self.m > T::one()
    }
}

pub fn m_quantity<T: Scalar>(rho: &DensityMatrix<T>) -> MQuantityResult<T> {
    let t = pauli_decompose(rho).t;
    // U = T^t T as a complex-typed 3x3 so the shared eigensolver applies.
    let u_mat = ComplexMatrix::from_fn(3, 3, |i, j| {
        let sum = t.iter().map(|row| row[i] * row[j]).sum();
        Complex::new(sum, T::zero())
    });
    let eigs = u_mat.eigh().expect("T^t T is symmetric");
    let u_tilde = eigs.eigenvalues()[1].max(T::zero());
    let u = eigs.eigenvalues()[2].max(u_tilde);
    MQuantityResult {
        m: u + u_tilde,
        u,
        u_tilde,
    }
}

/// Schmidt coefficient of a pure state: the smaller eigenvalue of either
/// reduced single-qubit state, clamped into [0, 1/2].
pub fn schmidt_coefficient<T: Scalar>(psi: &PureState<T>) -> T {
    let reduced = psi
        .density()
        .matrix()
        .partial_trace(Subsystem::Second)
        .expect("4x4 projector");
    let eigs = reduced.eigh().expect("reduced state is Hermitian");
    eigs.eigenvalues()[0].max(T::zero()).min(T::lit(0.5))
}
