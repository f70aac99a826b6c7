//! Simultaneous perturbation stochastic approximation over complex settings.
//!
//! The optimizer climbs a noisy real objective defined on the eight complex
//! setting components. Each iteration draws one random perturbation with
//! entries in {+1, -1, +i, -i}, probes the objective at the two symmetrically
//! displaced points, forms a stochastic estimate of the conjugate Wirtinger
//! gradient from the difference, takes a gain-scheduled ascent step, and
//! renormalizes each 2-component block (only block rays are physical).
//!
//! Evaluation is abstracted behind [`ObjectiveEvaluator`] so a simulator and
//! a lab-driven backend are interchangeable: the contract is "given settings
//! and a random stream, return one noisy objective value", plus a declared
//! cost in state copies per call.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measurement::{chsh_estimate, chsh_exact, SettingVector};
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::states::DensityMatrix;

/// Gain schedule controlling step and perturbation sizes:
/// `a_k = a / (k + 1 + A)^s` and `c_k = b / (k + 1)^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule<T: Scalar> {
    pub a: T,
    pub a_stability: T,
    pub s: T,
    pub b: T,
    pub r: T,
}

impl<T: Scalar> Default for GainSchedule<T> {
    /// The standard configuration: a = 1.0, A = 0, s = 1.0, b = 0.25, r = 1/6.
    fn default() -> Self {
        Self {
            a: T::one(),
            a_stability: T::zero(),
            s: T::one(),
            b: T::lit(0.25),
            r: T::one() / T::lit(6.0),
        }
    }
}

/// The two gains at iteration `k` (the literal `k` entering the formulas).
pub fn gains_at<T: Scalar>(schedule: &GainSchedule<T>, k: u32) -> (T, T) {
    let kf = T::from_u32(k).expect("iteration index fits scalar");
    let a_k = schedule.a / (kf + T::one() + schedule.a_stability).powf(schedule.s);
    let c_k = schedule.b / (kf + T::one()).powf(schedule.r);
    (a_k, c_k)
}

/// One perturbation direction: eight i.i.d. symbols from {+1, -1, +i, -i}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationVector<T: Scalar> {
    components: [Complex<T>; 8],
}

impl<T: Scalar> PerturbationVector<T> {
    pub fn components(&self) -> &[Complex<T>; 8] {
        &self.components
    }
}

pub fn sample_perturbation<T: Scalar>(rng: &mut RandomStream) -> PerturbationVector<T> {
    let (zero, one) = (T::zero(), T::one());
    let symbols = [
        Complex::new(one, zero),
        Complex::new(-one, zero),
        Complex::new(zero, one),
        Complex::new(zero, -one),
    ];
    PerturbationVector {
        components: std::array::from_fn(|_| symbols[rng.random_range(0..4usize)]),
    }
}

/// Two-point gradient estimate: component i is
/// `(s_plus - s_minus) / (2 c_k conj(delta_i))`, which for unit-modulus
/// symbols equals `(s_plus - s_minus) delta_i / (2 c_k)`.
pub fn gradient_estimate<T: Scalar>(
    s_plus: T,
    s_minus: T,
    c_k: T,
    delta: &PerturbationVector<T>,
) -> [Complex<T>; 8] {
    let scale = (s_plus - s_minus) / (T::lit(2.0) * c_k);
    delta.components.map(|d| d * scale)
}

/// A noisy objective with a declared per-call cost in state copies.
///
/// Simulator-backed implementations must be deterministic given the stream
/// state; a lab-backed implementation is free to ignore the stream and be
/// non-deterministic.
pub trait ObjectiveEvaluator<T: Scalar> {
    fn evaluate(&self, settings: &SettingVector<T>, rng: &mut RandomStream) -> Result<T>;

    /// State copies consumed by one `evaluate` call.
    fn copies_per_call(&self) -> u64;
}

/// Finite-ensemble CHSH estimator: four fresh multinomial draws per call,
/// `shots_per_correlator` pairs each.
#[derive(Debug, Clone)]
pub struct ShotNoiseObjective<'a, T: Scalar> {
    rho: &'a DensityMatrix<T>,
    shots_per_correlator: u64,
}

impl<'a, T: Scalar> ShotNoiseObjective<'a, T> {
    pub fn new(rho: &'a DensityMatrix<T>, shots_per_correlator: u64) -> Self {
        assert!(shots_per_correlator >= 1);
        Self {
            rho,
            shots_per_correlator,
        }
    }
}

impl<T: Scalar> ObjectiveEvaluator<T> for ShotNoiseObjective<'_, T> {
    fn evaluate(&self, settings: &SettingVector<T>, rng: &mut RandomStream) -> Result<T> {
        chsh_estimate(self.rho, settings, self.shots_per_correlator, rng)
    }

    fn copies_per_call(&self) -> u64 {
        4 * self.shots_per_correlator
    }
}

/// Noise-free objective returning the exact CHSH value; zero copy cost.
#[derive(Debug, Clone)]
pub struct ExactObjective<'a, T: Scalar> {
    rho: &'a DensityMatrix<T>,
}

impl<'a, T: Scalar> ExactObjective<'a, T> {
    pub fn new(rho: &'a DensityMatrix<T>) -> Self {
        Self { rho }
    }
}

impl<T: Scalar> ObjectiveEvaluator<T> for ExactObjective<'_, T> {
    fn evaluate(&self, settings: &SettingVector<T>, _rng: &mut RandomStream) -> Result<T> {
        chsh_exact(self.rho, settings)
    }

    fn copies_per_call(&self) -> u64 {
        0
    }
}

/// Exact-value diagnostic evaluated at each new iterate during a trajectory.
pub type Diagnostic<'a, T> = &'a (dyn Fn(&SettingVector<T>) -> T + Sync);

/// Everything recorded about one iteration: the updated settings, the two
/// noisy objective values that fed the gradient, the optional exact-value
/// diagnostic at the new iterate, and the copies consumed.
#[derive(Debug, Clone)]
pub struct IterationEntry<T: Scalar> {
    pub k: u32,
    pub settings: SettingVector<T>,
    pub s_plus: T,
    pub s_minus: T,
    pub s_exact_diag: Option<T>,
    pub copies_used: u64,
}

/// Per-iteration history of one optimizer run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T: Scalar> {
    pub iterations: Vec<IterationEntry<T>>,
    pub total_copies: u64,
}

impl<T: Scalar> TrajectoryRecord<T> {
    /// Exact-value diagnostic at iteration `k` (1-based).
    pub fn exact_at(&self, k: u32) -> Option<T> {
        self.iterations
            .get(k.checked_sub(1)? as usize)
            .and_then(|e| e.s_exact_diag)
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }
}

/// One optimizer update from `z_k` using the gains at the literal index `k`.
///
/// The displaced probe points are used unnormalized (the objective normalizes
/// block rays internally); only the accepted iterate is renormalized.
pub fn cspsa_step<T: Scalar>(
    z_k: &SettingVector<T>,
    k: u32,
    schedule: &GainSchedule<T>,
    objective: &dyn ObjectiveEvaluator<T>,
    rng: &mut RandomStream,
) -> Result<(SettingVector<T>, IterationEntry<T>)> {
    let (a_k, c_k) = gains_at(schedule, k);
    let delta = sample_perturbation::<T>(rng);

    let base = z_k.components();
    let mut plus = base;
    let mut minus = base;
    for i in 0..8 {
        let step = delta.components[i] * c_k;
        plus[i] = base[i] + step;
        minus[i] = base[i] - step;
    }
    let s_plus = objective.evaluate(&SettingVector::from_components(plus), rng)?;
    let s_minus = objective.evaluate(&SettingVector::from_components(minus), rng)?;

    let gradient = gradient_estimate(s_plus, s_minus, c_k, &delta);
    let mut next = base;
    for i in 0..8 {
        next[i] = base[i] + gradient[i] * a_k;
    }
    let z_next = SettingVector::from_components(next)
        .normalized_blocks()
        .map_err(|_| Error::ZeroNormBlock)?;

    let entry = IterationEntry {
        k,
        settings: z_next,
        s_plus,
        s_minus,
        s_exact_diag: None,
        copies_used: 2 * objective.copies_per_call(),
    };
    Ok((z_next, entry))
}

/// Runs `k_max` iterations from `z0` and records the full history. When a
/// diagnostic callback is given, the exact value at each new iterate is
/// stored alongside (simulation-only; costs no copies).
pub fn run_trajectory<T: Scalar>(
    objective: &dyn ObjectiveEvaluator<T>,
    z0: &SettingVector<T>,
    k_max: u32,
    schedule: &GainSchedule<T>,
    rng: &mut RandomStream,
    diagnostic: Option<Diagnostic<'_, T>>,
) -> Result<TrajectoryRecord<T>> {
    assert!(k_max >= 1, "at least one iteration required");
    let mut z = *z0;
    let mut iterations = Vec::with_capacity(k_max as usize);
    let mut total_copies = 0u64;
    for k in 1..=k_max {
        let (z_next, mut entry) = cspsa_step(&z, k, schedule, objective, rng)?;
        if let Some(diag) = diagnostic {
            entry.s_exact_diag = Some(diag(&z_next));
        }
        total_copies += entry.copies_used;
        iterations.push(entry);
        z = z_next;
    }
    Ok(TrajectoryRecord {
        iterations,
        total_copies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Block;
    use crate::rng::{purpose, RandomStream};
    use crate::states::{self, SchmidtForm};
    use num_complex::Complex64;

    fn defaults() -> GainSchedule<f64> {
        GainSchedule::default()
    }

    /// Objective that replays a queue of values; lets tests steer the update.
    struct QueuedObjective {
        values: std::cell::RefCell<std::vec::IntoIter<f64>>,
    }

    impl QueuedObjective {
        fn new(values: Vec<f64>) -> Self {
            Self {
                values: std::cell::RefCell::new(values.into_iter()),
            }
        }
    }

    impl ObjectiveEvaluator<f64> for QueuedObjective {
        fn evaluate(&self, _: &SettingVector<f64>, _: &mut RandomStream) -> Result<f64> {
            Ok(self.values.borrow_mut().next().expect("queued value"))
        }

        fn copies_per_call(&self) -> u64 {
            0
        }
    }

    struct FailingObjective;

    impl ObjectiveEvaluator<f64> for FailingObjective {
        fn evaluate(&self, _: &SettingVector<f64>, _: &mut RandomStream) -> Result<f64> {
            Err(Error::Objective("backend offline".into()))
        }

        fn copies_per_call(&self) -> u64 {
            4
        }
    }

    #[test]
    fn gains_at_golden_values() {
        let (a0, c0) = gains_at(&defaults(), 0);
        assert!((a0 - 1.0).abs() < 1e-15);
        assert!((c0 - 0.25).abs() < 1e-15);

        let (a1, c1) = gains_at(&defaults(), 1);
        assert!((a1 - 0.5).abs() < 1e-15);
        assert!((c1 - 0.25 / 2.0_f64.powf(1.0 / 6.0)).abs() < 1e-15);
        assert!((c1 - 0.22272467953508).abs() < 1e-12);
    }

    #[test]
    fn gains_frozen_schedule() {
        let mut sched = defaults();
        sched.a = 0.0;
        for k in 0..50 {
            let (a_k, _) = gains_at(&sched, k);
            assert_eq!(a_k, 0.0);
        }
    }

    #[test]
    fn perturbation_symbols_and_determinism() {
        let mut rng = RandomStream::seeded(40);
        let p = sample_perturbation::<f64>(&mut rng);
        for d in p.components() {
            assert!((d.norm() - 1.0).abs() < 1e-15);
            let in_set = (d.re.abs() == 1.0 && d.im == 0.0) || (d.im.abs() == 1.0 && d.re == 0.0);
            assert!(in_set, "symbol {d} not in {{1,-1,i,-i}}");
        }
        let p2 = sample_perturbation::<f64>(&mut RandomStream::seeded(40));
        assert_eq!(p.components(), p2.components());
    }

    #[test]
    fn perturbation_uniformity() {
        let mut rng = RandomStream::seeded(41);
        let mut counts = [0u64; 4];
        let draws = 100_000 / 8;
        for _ in 0..draws {
            for d in sample_perturbation::<f64>(&mut rng).components() {
                let idx = match (d.re as i32, d.im as i32) {
                    (1, 0) => 0,
                    (-1, 0) => 1,
                    (0, 1) => 2,
                    (0, -1) => 3,
                    _ => unreachable!(),
                };
                counts[idx] += 1;
            }
        }
        let total = (draws * 8) as f64;
        for k in counts {
            let freq = k as f64 / total;
            assert!((freq - 0.25).abs() < 0.01, "symbol frequency {freq}");
        }
    }

    #[test]
    fn gradient_estimate_arithmetic() {
        let delta = PerturbationVector {
            components: [Complex64::new(1.0, 0.0); 8],
        };
        let g = gradient_estimate(1.0, 1.0, 0.25, &delta);
        assert!(g.iter().all(|z| z.norm() == 0.0));

        let g = gradient_estimate(0.3, 0.2, 0.25, &delta);
        for z in g {
            assert!((z - Complex64::new(0.2, 0.0)).norm() < 1e-15);
        }

        let delta_i = PerturbationVector {
            components: [Complex64::new(0.0, 1.0); 8],
        };
        let g = gradient_estimate(0.3, 0.2, 0.25, &delta_i);
        for z in g {
            assert!((z - Complex64::new(0.0, 0.2)).norm() < 1e-15);
        }
    }

    #[test]
    fn step_with_zero_gain_keeps_iterate() {
        let rho = states::singlet::<f64>().density();
        let objective = ShotNoiseObjective::new(&rho, 10);
        let mut sched = defaults();
        sched.a = 0.0;
        let mut rng = RandomStream::seeded(42);
        let z = SettingVector::random(&mut rng);
        let (z_next, entry) = cspsa_step(&z, 1, &sched, &objective, &mut rng).unwrap();
        // Blocks of a random setting vector are already unit, so the frozen
        // schedule reproduces them exactly up to renormalization noise.
        for (a, b) in z.components().iter().zip(z_next.components()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(entry.copies_used, 2 * 4 * 10);
    }

    #[test]
    fn step_is_bit_reproducible() {
        let rho = states::singlet::<f64>().density();
        let objective = ShotNoiseObjective::new(&rho, 100);
        let run = || {
            let mut rng = RandomStream::seeded(43);
            let z = SettingVector::random(&mut rng);
            cspsa_step(&z, 3, &defaults(), &objective, &mut rng)
                .unwrap()
                .0
        };
        let (a, b) = (run(), run());
        assert_eq!(a.components(), b.components());
    }

    #[test]
    fn blocks_stay_normalized_along_trajectory() {
        let rho = states::singlet::<f64>().density();
        let objective = ShotNoiseObjective::new(&rho, 50);
        let mut rng = RandomStream::seeded(44);
        let z0 = SettingVector::random(&mut rng);
        let record = run_trajectory(&objective, &z0, 60, &defaults(), &mut rng, None).unwrap();
        for entry in &record.iterations {
            for block in [
                entry.settings.a,
                entry.settings.a_prime,
                entry.settings.b,
                entry.settings.b_prime,
            ] {
                assert!((block.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_copy_accounting() {
        let rho = states::singlet::<f64>().density();
        let objective = ShotNoiseObjective::new(&rho, 100);
        let mut rng = RandomStream::seeded(45);
        let z0 = SettingVector::random(&mut rng);
        let record = run_trajectory(&objective, &z0, 100, &defaults(), &mut rng, None).unwrap();
        assert_eq!(record.total_copies, 80_000);
        for entry in &record.iterations {
            assert_eq!(entry.copies_used, 800);
        }

        let single = run_trajectory(&objective, &z0, 1, &defaults(), &mut rng, None).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn exact_objective_costs_nothing() {
        let rho = states::singlet::<f64>().density();
        let objective = ExactObjective::new(&rho);
        let mut rng = RandomStream::seeded(46);
        let z0 = SettingVector::random(&mut rng);
        let record = run_trajectory(&objective, &z0, 5, &defaults(), &mut rng, None).unwrap();
        assert_eq!(record.total_copies, 0);
    }

    #[test]
    fn objective_evaluator_is_deterministic_for_fixed_stream() {
        let rho = states::singlet::<f64>().density();
        let objective = ShotNoiseObjective::new(&rho, 100);
        let z = SettingVector::new(
            Block::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Block::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            Block::new(Complex64::new(1.0, 0.0), Complex64::new(0.4, 0.0)),
            Block::new(Complex64::new(1.0, 0.0), Complex64::new(-0.4, 0.0)),
        );
        let a = objective
            .evaluate(&z, &mut RandomStream::seeded(47))
            .unwrap();
        let b = objective
            .evaluate(&z, &mut RandomStream::seeded(47))
            .unwrap();
        assert_eq!(a, b);
    }

    /// Central-difference conjugate Wirtinger gradient of the exact CHSH
    /// value, used as the independent oracle for the estimator's mean.
    fn wirtinger_oracle(
        rho: &states::DensityMatrix<f64>,
        z: &SettingVector<f64>,
    ) -> [Complex64; 8] {
        let h = 1e-5;
        let f = |comps: [Complex64; 8]| {
            chsh_exact(rho, &SettingVector::from_components(comps)).unwrap()
        };
        let base = z.components();
        std::array::from_fn(|i| {
            let mut xp = base;
            let mut xm = base;
            xp[i] += Complex64::new(h, 0.0);
            xm[i] -= Complex64::new(h, 0.0);
            let df_dx = (f(xp) - f(xm)) / (2.0 * h);
            let mut yp = base;
            let mut ym = base;
            yp[i] += Complex64::new(0.0, h);
            ym[i] -= Complex64::new(0.0, h);
            let df_dy = (f(yp) - f(ym)) / (2.0 * h);
            Complex64::new(df_dx / 2.0, df_dy / 2.0)
        })
    }

    #[test]
    fn gradient_estimator_mean_matches_wirtinger_oracle() {
        let rho = states::from_schmidt(&SchmidtForm::computational(0.5).unwrap()).density();
        let mut rng = RandomStream::substream(48, &[purpose::TEST]);
        let z = SettingVector::random(&mut rng);
        let oracle = wirtinger_oracle(&rho, &z);

        let c = 0.05;
        let samples = 10_000;
        let mut mean = [Complex64::new(0.0, 0.0); 8];
        let base = z.components();
        for _ in 0..samples {
            let delta = sample_perturbation::<f64>(&mut rng);
            let mut plus = base;
            let mut minus = base;
            for i in 0..8 {
                let step = delta.components[i] * c;
                plus[i] = base[i] + step;
                minus[i] = base[i] - step;
            }
            let s_plus = chsh_exact(&rho, &SettingVector::from_components(plus)).unwrap();
            let s_minus = chsh_exact(&rho, &SettingVector::from_components(minus)).unwrap();
            let g = gradient_estimate(s_plus, s_minus, c, &delta);
            for i in 0..8 {
                mean[i] += g[i];
            }
        }
        for m in &mut mean {
            *m /= samples as f64;
        }

        // Relative error over the significant components (|oracle| > 0.05).
        let mut err_sq = 0.0;
        let mut ref_sq = 0.0;
        for i in 0..8 {
            if oracle[i].norm() > 0.05 {
                err_sq += (mean[i] - oracle[i]).norm_sqr();
                ref_sq += oracle[i].norm_sqr();
            }
        }
        assert!(ref_sq > 0.0, "oracle gradient unexpectedly flat");
        let rel = (err_sq / ref_sq).sqrt();
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn step_rejects_degenerate_block() {
        // Pre-read the perturbation the step will draw from this seed, then
        // queue objective values whose gradient drives the first block to
        // exactly zero.
        let seed = 77;
        let mut probe = RandomStream::seeded(seed);
        let delta = sample_perturbation::<f64>(&mut probe);
        let d = delta.components();

        let w = 1.0 / 2.0_f64.sqrt();
        let mut comps = [Complex64::new(0.0, 0.0); 8];
        comps[0] = d[0] * w;
        comps[1] = d[1] * w;
        for block in 1..4 {
            comps[2 * block] = Complex64::new(1.0, 0.0);
        }
        let z = SettingVector::from_components(comps);

        let sched = defaults();
        let (a_1, c_1) = gains_at(&sched, 1);
        // scale = a_1 (s_plus - s_minus) / (2 c_1) must cancel the block norm.
        let diff = -w * 2.0 * c_1 / a_1;
        let objective = QueuedObjective::new(vec![diff, 0.0]);
        let mut rng = RandomStream::seeded(seed);
        let err = cspsa_step(&z, 1, &sched, &objective, &mut rng).unwrap_err();
        assert!(matches!(err, Error::ZeroNormBlock));
    }

    #[test]
    fn trajectory_propagates_evaluator_failure() {
        let mut rng = RandomStream::seeded(78);
        let z0 = SettingVector::random(&mut rng);
        let err =
            run_trajectory(&FailingObjective, &z0, 5, &defaults(), &mut rng, None).unwrap_err();
        assert!(matches!(err, Error::Objective(_)));
    }

    #[test]
    fn mean_exact_value_improves_over_iterations() {
        // Noiseless objective, default gains: the trajectory mean at k = 50
        // clearly exceeds the mean at k = 5 for Haar-random pure targets.
        let trajectories = 1000;
        let mut sum_k5 = 0.0;
        let mut sum_k50 = 0.0;
        for t in 0..trajectories {
            let mut rng = RandomStream::substream(49, &[purpose::TEST, t]);
            let rho = states::haar_pure::<f64>(&mut rng).density();
            let objective = ExactObjective::new(&rho);
            let z0 = SettingVector::random(&mut rng);
            let diag = |z: &SettingVector<f64>| chsh_exact(&rho, z).unwrap();
            let record =
                run_trajectory(&objective, &z0, 50, &defaults(), &mut rng, Some(&diag)).unwrap();
            sum_k5 += record.exact_at(5).unwrap();
            sum_k50 += record.exact_at(50).unwrap();
        }
        let mean5 = sum_k5 / trajectories as f64;
        let mean50 = sum_k50 / trajectories as f64;
        assert!(
            mean50 > mean5,
            "no improvement: k=5 mean {mean5}, k=50 mean {mean50}"
        );
    }
}
