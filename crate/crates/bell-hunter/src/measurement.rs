//! Dichotomic local measurements and the CHSH functional.
//!
//! A setting block is a pair of complex numbers; its ray fixes a projective
//! qubit measurement (the block is normalized internally, so overall scale
//! never matters). Exact statistics come from the Born rule; finite-ensemble
//! estimates draw multinomial counts per correlator.

use num_complex::Complex;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::qmath::ComplexMatrix;
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::states::DensityMatrix;

/// Blocks with norm at or below this are rejected.
pub const BLOCK_NORM_TOL: f64 = 1e-12;

/// Born-rule values in [-1e-12, 0) are clipped to zero before sampling.
const PROBABILITY_CLIP: f64 = -1e-12;

/// One measurement setting: two complex amplitudes defining a qubit ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block<T: Scalar>(pub [Complex<T>; 2]);

impl<T: Scalar> Block<T> {
    pub fn new(z1: Complex<T>, z2: Complex<T>) -> Self {
        Block([z1, z2])
    }

    pub fn norm(&self) -> T {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::tol(BLOCK_NORM_TOL) {
            return Err(Error::ZeroNormBlock);
        }
        Ok(Block([self.0[0] / n, self.0[1] / n]))
    }

    /// The orthogonal ray (-conj(z2), conj(z1)).
    pub fn orthogonal(&self) -> Self {
        Block([-self.0[1].conj(), self.0[0].conj()])
    }

    /// Haar-uniform random block (already unit norm).
    pub fn random(rng: &mut RandomStream) -> Self {
        loop {
            let raw = Block([
                Complex::new(T::standard_normal(rng), T::standard_normal(rng)),
                Complex::new(T::standard_normal(rng), T::standard_normal(rng)),
            ]);
            if let Ok(b) = raw.normalized() {
                return b;
            }
        }
    }
}

/// The four local measurement settings (a, a', b, b').
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingVector<T: Scalar> {
    pub a: Block<T>,
    pub a_prime: Block<T>,
    pub b: Block<T>,
    pub b_prime: Block<T>,
}

impl<T: Scalar> SettingVector<T> {
    pub fn new(a: Block<T>, a_prime: Block<T>, b: Block<T>, b_prime: Block<T>) -> Self {
        Self {
            a,
            a_prime,
            b,
            b_prime,
        }
    }

    /// Four independent Haar-random blocks.
    pub fn random(rng: &mut RandomStream) -> Self {
        Self {
            a: Block::random(rng),
            a_prime: Block::random(rng),
            b: Block::random(rng),
            b_prime: Block::random(rng),
        }
    }

    /// Flat view in the order (a, a', b, b').
    pub fn components(&self) -> [Complex<T>; 8] {
        let mut out = [Complex::new(T::zero(), T::zero()); 8];
        for (i, block) in [self.a, self.a_prime, self.b, self.b_prime]
            .iter()
            .enumerate()
        {
            out[2 * i] = block.0[0];
            out[2 * i + 1] = block.0[1];
        }
        out
    }

    pub fn from_components(c: [Complex<T>; 8]) -> Self {
        Self {
            a: Block([c[0], c[1]]),
            a_prime: Block([c[2], c[3]]),
            b: Block([c[4], c[5]]),
            b_prime: Block([c[6], c[7]]),
        }
    }

    /// Each block scaled to unit norm.
    pub fn normalized_blocks(&self) -> Result<Self> {
        Ok(Self {
            a: self.a.normalized()?,
            a_prime: self.a_prime.normalized()?,
            b: self.b.normalized()?,
            b_prime: self.b_prime.normalized()?,
        })
    }
}

/// A +-1-valued qubit observable given by its two rank-one projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Scalar> {
    pub plus_projector: ComplexMatrix<T>,
    pub minus_projector: ComplexMatrix<T>,
}

impl<T: Scalar> Observable<T> {
    /// The Hermitian operator `plus - minus`.
    pub fn operator(&self) -> ComplexMatrix<T> {
        self.plus_projector.sub(&self.minus_projector)
    }
}

/// Builds the observable whose +1 outcome projects onto the block's ray and
/// whose -1 outcome projects onto the orthogonal ray.
pub fn observable_from_block<T: Scalar>(z: &Block<T>) -> Result<Observable<T>> {
    let psi = z.normalized()?;
    let perp = psi.orthogonal();
    Ok(Observable {
        plus_projector: ComplexMatrix::outer(&psi.0, &psi.0),
        minus_projector: ComplexMatrix::outer(&perp.0, &perp.0),
    })
}

/// Probabilities of the four outcome pairs (+,+), (+,-), (-,+), (-,-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcomeDistribution<T: Scalar> {
    pub p_pp: T,
    pub p_pm: T,
    pub p_mp: T,
    pub p_mm: T,
}

impl<T: Scalar> JointOutcomeDistribution<T> {
    /// Clips round-off negatives and renormalizes.
    fn from_raw(raw: [T; 4]) -> Self {
        let clip = T::tol(PROBABILITY_CLIP);
        let cleaned = raw.map(|p| {
            debug_assert!(p >= clip, "Born-rule value {p} below clip threshold");
            if p < T::zero() {
                T::zero()
            } else {
                p
            }
        });
        let total: T = cleaned.iter().copied().sum();
        let normed = cleaned.map(|p| p / total);
        Self {
            p_pp: normed[0],
            p_pm: normed[1],
            p_mp: normed[2],
            p_mm: normed[3],
        }
    }

    pub fn probabilities(&self) -> [T; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }

    /// Expectation of the product of the two +-1 outcomes.
    pub fn correlator(&self) -> T {
        self.p_pp + self.p_mm - self.p_pm - self.p_mp
    }
}

/// Observed outcome counts for one correlator's ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRecord {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    pub n_total: u64,
}

impl CountRecord {
    /// Empirical correlator (n_pp + n_mm - n_pm - n_mp) / n_total.
    pub fn correlator<T: Scalar>(&self) -> T {
        let signed = self.n_pp as i64 + self.n_mm as i64 - self.n_pm as i64 - self.n_mp as i64;
        T::from_i64(signed).expect("count fits scalar") / T::from_u64(self.n_total).unwrap()
    }
}

/// Tr(rho op) as a real number, without forming the product matrix.
fn expectation<T: Scalar>(rho: &DensityMatrix<T>, op: &ComplexMatrix<T>) -> T {
    let mut sum = Complex::new(T::zero(), T::zero());
    for i in 0..4 {
        for j in 0..4 {
            sum += rho.matrix().get(i, j) * op.get(j, i);
        }
    }
    sum.re
}

/// Born-rule outcome distribution for one pair of local settings.
pub fn joint_distribution<T: Scalar>(
    rho: &DensityMatrix<T>,
    za: &Block<T>,
    zb: &Block<T>,
) -> Result<JointOutcomeDistribution<T>> {
    let oa = observable_from_block(za)?;
    let ob = observable_from_block(zb)?;
    let p = |pa: &ComplexMatrix<T>, pb: &ComplexMatrix<T>| expectation(rho, &pa.tensor(pb));
    Ok(JointOutcomeDistribution::from_raw([
        p(&oa.plus_projector, &ob.plus_projector),
        p(&oa.plus_projector, &ob.minus_projector),
        p(&oa.minus_projector, &ob.plus_projector),
        p(&oa.minus_projector, &ob.minus_projector),
    ]))
}

/// Exact correlator for one pair of settings.
pub fn correlator_exact<T: Scalar>(
    rho: &DensityMatrix<T>,
    za: &Block<T>,
    zb: &Block<T>,
) -> Result<T> {
    Ok(joint_distribution(rho, za, zb)?.correlator())
}

/// Multinomial draw of `n` outcomes from the four joint probabilities,
/// realized as a chain of conditional binomials.
pub fn sample_counts<T: Scalar>(
    dist: &JointOutcomeDistribution<T>,
    n: u64,
    rng: &mut RandomStream,
) -> CountRecord {
    assert!(n >= 1, "ensemble size must be positive");
    let probs: [f64; 4] = dist
        .probabilities()
        .map(|p| p.to_f64().expect("probability converts to f64"));
    let mut counts = [0u64; 4];
    let mut remaining = n;
    let mut rest = 1.0f64;
    for i in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = if rest > 0.0 {
            (probs[i] / rest).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let draw = if p >= 1.0 {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, p)
                .expect("clamped probability is valid")
                .sample(rng)
        };
        counts[i] = draw;
        remaining -= draw;
        rest -= probs[i];
    }
    counts[3] = remaining;
    CountRecord {
        n_pp: counts[0],
        n_pm: counts[1],
        n_mp: counts[2],
        n_mm: counts[3],
        n_total: n,
    }
}

/// Exact CHSH value E(a,b) + E(a,b') + E(a',b) - E(a',b').
pub fn chsh_exact<T: Scalar>(rho: &DensityMatrix<T>, z: &SettingVector<T>) -> Result<T> {
    Ok(correlator_exact(rho, &z.a, &z.b)?
        + correlator_exact(rho, &z.a, &z.b_prime)?
        + correlator_exact(rho, &z.a_prime, &z.b)?
        - correlator_exact(rho, &z.a_prime, &z.b_prime)?)
}

/// Finite-ensemble CHSH estimate: each of the four correlators is estimated
/// from an independent multinomial draw of `n_per_correlator` pairs.
pub fn chsh_estimate<T: Scalar>(
    rho: &DensityMatrix<T>,
    z: &SettingVector<T>,
    n_per_correlator: u64,
    rng: &mut RandomStream,
) -> Result<T> {
    let mut estimate = |za: &Block<T>, zb: &Block<T>, sign: T| -> Result<T> {
        let dist = joint_distribution(rho, za, zb)?;
        Ok(sample_counts(&dist, n_per_correlator, rng).correlator::<T>() * sign)
    };
    Ok(estimate(&z.a, &z.b, T::one())?
        + estimate(&z.a, &z.b_prime, T::one())?
        + estimate(&z.a_prime, &z.b, T::one())?
        + estimate(&z.a_prime, &z.b_prime, -T::one())?)
}
