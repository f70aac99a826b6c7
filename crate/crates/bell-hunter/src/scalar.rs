//! Floating-point scalar abstraction.
//!
//! All core math is generic over [`Scalar`] so the same code runs in `f32`
//! and `f64`; concrete aliases live at the crate root. The trait gathers the
//! `num-traits` bounds the numerics need plus the two RNG hooks that cannot
//! be expressed as supertraits (distribution impls live on the concrete
//! float types).

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

pub trait Scalar:
    Float
    + FloatConst
    + NumAssignOps
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Validation tolerances are specified against f64 round-off; this factor
    /// rescales them so checks stay meaningful at the type's precision.
    const TOL_FACTOR: f64;

    /// Lift an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// An f64-referenced tolerance, rescaled for this type.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::lit(Self::tol_f64(base))
    }

    #[inline]
    fn tol_f64(base: f64) -> f64 {
        base * Self::TOL_FACTOR
    }

    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on [0, 1).
    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty, $tol_factor:expr) => {
        impl Scalar for $t {
            const TOL_FACTOR: f64 = $tol_factor;

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }

            #[inline]
            fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random()
            }
        }
    };
}

impl_scalar!(f32, 1e6);
impl_scalar!(f64, 1.0);
