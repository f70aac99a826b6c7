//! Ground-truth maximal CHSH values.
//!
//! Closed forms cover Schmidt-form pure states and Werner states; the
//! Horodecki criterion gives the bound 2 sqrt(M) for arbitrary known states;
//! and an alternating see-saw maximizer provides an independent route that
//! also returns the optimal measurement settings.
//!
//! Each see-saw half-step is solved in closed form: with one party fixed,
//! the objective is linear in the other party's two observables, and the
//! best dichotomic qubit observable for a Hermitian effective operator is
//! the difference of its top and bottom eigenprojectors, worth
//! `lambda_max - lambda_min`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::measurement::{Block, SettingVector};
use crate::qmath::{ComplexMatrix, Subsystem};
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::states::{m_quantity, DensityMatrix};

/// Default convergence threshold on the gain of one full see-saw round.
pub const DEFAULT_SEESAW_TOL: f64 = 1e-10;

/// Default cap on half-steps per restart.
pub const DEFAULT_MAX_HALF_STEPS: u32 = 1000;

/// Default number of random restarts.
pub const DEFAULT_RESTARTS: u32 = 10;

/// Maximal CHSH value of a Schmidt-form pure state: 2 sqrt(1 + 4 l (1 - l)).
pub fn max_chsh_pure<T: Scalar>(lambda: T) -> Result<T> {
    if lambda < T::zero() || lambda > T::lit(0.5) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 0.5,
        });
    }
    Ok(T::lit(2.0) * (T::one() + T::lit(4.0) * lambda * (T::one() - lambda)).sqrt())
}

/// Maximal CHSH value of a Werner state: 2 sqrt(2) lambda.
pub fn max_chsh_werner<T: Scalar>(lambda: T) -> Result<T> {
    if lambda < T::zero() || lambda > T::one() {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(T::lit(2.0) * T::SQRT_2() * lambda)
}

/// The criterion bound 2 sqrt(M) from the two leading eigenvalues of T^t T.
pub fn horodecki_bound<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    T::lit(2.0) * m_quantity(rho).m.sqrt()
}

/// Outcome of the see-saw maximization.
#[derive(Debug, Clone)]
pub struct SeesawResult<T: Scalar> {
    pub s_max: T,
    pub optimal_settings: SettingVector<T>,
    /// Half-steps consumed across all restarts.
    pub half_steps: u32,
    /// True when at least one restart met the convergence threshold.
    pub converged: bool,
}

/// A +-1 observable tracked together with the ray of its +1 outcome.
#[derive(Debug, Clone)]
struct Dichotomic<T: Scalar> {
    op: ComplexMatrix<T>,
    plus_block: Block<T>,
}

impl<T: Scalar> Dichotomic<T> {
    fn from_block(block: &Block<T>) -> Result<Self> {
        let obs = crate::measurement::observable_from_block(block)?;
        Ok(Self {
            op: obs.operator(),
            plus_block: block.normalized()?,
        })
    }
}

/// Best dichotomic observable for a Hermitian effective operator `m`:
/// top eigenprojector minus bottom eigenprojector, value
/// `lambda_max - lambda_min`.
fn dichotomic_max<T: Scalar>(m: &ComplexMatrix<T>) -> (Dichotomic<T>, T) {
    let eig = m.eigh().expect("effective operator is Hermitian 2x2");
    let v_min = eig.eigenvector(0);
    let v_max = eig.eigenvector(1);
    let op = ComplexMatrix::outer(v_max, v_max).sub(&ComplexMatrix::outer(v_min, v_min));
    let value = eig.eigenvalues()[1] - eig.eigenvalues()[0];
    (
        Dichotomic {
            op,
            plus_block: Block::new(v_max[0], v_max[1]),
        },
        value,
    )
}

/// Effective single-qubit operators seen by the free party when the other
/// party's observables are fixed.
fn effective_pair<T: Scalar>(
    rho: &ComplexMatrix<T>,
    fixed: (&ComplexMatrix<T>, &ComplexMatrix<T>),
    fixed_side: Subsystem,
) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let i2 = ComplexMatrix::identity(2);
    let sum = fixed.0.add(fixed.1);
    let diff = fixed.0.sub(fixed.1);
    let lift = |h: &ComplexMatrix<T>| match fixed_side {
        Subsystem::First => h.tensor(&i2),
        Subsystem::Second => i2.tensor(h),
    };
    let reduce = |h: &ComplexMatrix<T>| {
        lift(h)
            .matmul(rho)
            .expect("4x4 product")
            .partial_trace(fixed_side)
            .expect("4x4 partial trace")
    };
    (reduce(&sum), reduce(&diff))
}

/// Alternating maximization of the CHSH value for a known state. Each
/// half-step fixes one party and solves the other exactly; iteration stops
/// once a full round gains less than `tol` or `max_half_steps` is reached,
/// and the best value over `restarts` random initializations is returned.
pub fn seesaw_max<T: Scalar>(
    rho: &DensityMatrix<T>,
    restarts: u32,
    tol: T,
    max_half_steps: u32,
    rng: &mut RandomStream,
) -> Result<SeesawResult<T>> {
    if restarts < 1 {
        return Err(Error::InvalidConfig(
            "seesaw needs at least one restart".into(),
        ));
    }
    if max_half_steps < 2 {
        return Err(Error::InvalidConfig(
            "seesaw needs at least one full round of half-steps".into(),
        ));
    }
    if tol <= T::zero() {
        return Err(Error::InvalidConfig(
            "seesaw tolerance must be positive".into(),
        ));
    }

    let mut best: Option<(T, SettingVector<T>)> = None;
    let mut total_half_steps = 0u32;
    let mut any_converged = false;

    for _ in 0..restarts {
        // Independent substream per restart; best-of reduction below does not
        // depend on restart order (strict improvement keeps the earliest).
        let mut restart_rng = RandomStream::seeded(rng.next_u64());
        let (value, settings, converged, used) =
            seesaw_single(rho, tol, max_half_steps, &mut restart_rng)?;
        total_half_steps += used;
        any_converged = any_converged || converged;
        let better = match &best {
            None => true,
            Some((b, _)) => value > *b,
        };
        if better {
            best = Some((value, settings));
        }
    }

    let (s_max, optimal_settings) = best.expect("at least one restart ran");
    Ok(SeesawResult {
        s_max,
        optimal_settings,
        half_steps: total_half_steps,
        converged: any_converged,
    })
}

/// See-saw with the crate defaults (10 restarts, 1e-10 round gain, 1000
/// half-steps).
pub fn seesaw_max_default<T: Scalar>(
    rho: &DensityMatrix<T>,
    rng: &mut RandomStream,
) -> Result<SeesawResult<T>> {
    seesaw_max(
        rho,
        DEFAULT_RESTARTS,
        T::lit(DEFAULT_SEESAW_TOL),
        DEFAULT_MAX_HALF_STEPS,
        rng,
    )
}

fn seesaw_single<T: Scalar>(
    rho: &DensityMatrix<T>,
    tol: T,
    max_half_steps: u32,
    rng: &mut RandomStream,
) -> Result<(T, SettingVector<T>, bool, u32)> {
    let m = rho.matrix();
    let mut alice = Dichotomic::from_block(&Block::random(rng))?;
    let mut alice_p = Dichotomic::from_block(&Block::random(rng))?;
    // Placeholders; the first Bob half-step overwrites them.
    let mut bob = alice.clone();
    let mut bob_p = alice_p.clone();

    let mut half_steps = 0u32;
    let mut last_round = T::neg_infinity();
    let mut last_value = T::neg_infinity();
    let mut converged = false;
    let ascent_slack = T::tol(1e-9);

    while half_steps < max_half_steps {
        let (eff_b, eff_bp) = effective_pair(m, (&alice.op, &alice_p.op), Subsystem::First);
        let (new_b, v_b) = dichotomic_max(&eff_b);
        let (new_bp, v_bp) = dichotomic_max(&eff_bp);
        bob = new_b;
        bob_p = new_bp;
        let s_after_bob = v_b + v_bp;
        debug_assert!(
            s_after_bob >= last_value - ascent_slack,
            "half-step decreased the objective"
        );
        last_value = s_after_bob;
        half_steps += 1;
        if half_steps >= max_half_steps {
            break;
        }

        let (eff_a, eff_ap) = effective_pair(m, (&bob.op, &bob_p.op), Subsystem::Second);
        let (new_a, v_a) = dichotomic_max(&eff_a);
        let (new_ap, v_ap) = dichotomic_max(&eff_ap);
        alice = new_a;
        alice_p = new_ap;
        let s_after_alice = v_a + v_ap;
        debug_assert!(
            s_after_alice >= last_value - ascent_slack,
            "half-step decreased the objective"
        );
        last_value = s_after_alice;
        half_steps += 1;

        if s_after_alice - last_round < tol {
            converged = true;
            break;
        }
        last_round = s_after_alice;
    }

    let settings = SettingVector::new(
        alice.plus_block,
        alice_p.plus_block,
        bob.plus_block,
        bob_p.plus_block,
    );
    Ok((last_value, settings, converged, half_steps))
}
