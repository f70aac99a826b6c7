//! Monte Carlo experiment orchestration.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]
//! (including the seed): states are sampled per grid point, each state is
//! optimized over `trajectories` independent runs, and per-iteration
//! statistics are aggregated two ways. Rows with `state_id >= 0` summarize
//! one state's trajectories; rows with `state_id = -1` aggregate the
//! per-state trajectory means across the point's state set. Results land in
//! a CSV (fixed schema, 9 significant digits) plus a `manifest.json` with
//! the run metadata.
//!
//! Trajectories fan out over a worker pool; every task derives its own
//! random substream from (seed, point, state, trajectory) indices and the
//! final fold is keyed by those indices, so parallel and serial runs emit
//! identical bytes.

pub mod config;
pub mod stats;

pub use config::{parse_config_file, parse_gains, parse_grid, ExperimentConfig, ExperimentKind};
pub use stats::{
    k_violation, k_violation_first_crossing, mean_over_trajectories, set_statistics,
    squared_error_stats, SetStats, SummaryStatistics, ViolationMode,
};

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cspsa::{run_trajectory, ShotNoiseObjective, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::measurement::{chsh_exact, Block, SettingVector};
use crate::oracle;
use crate::rng::{purpose, RandomStream};
use crate::scalar::Scalar;
use crate::states::{
    from_schmidt, haar_pure, m_quantity, negativity, random_mixed, schmidt_coefficient, werner,
    DensityMatrix, SchmidtForm,
};

/// Exact column layout of the emitted CSV.
pub const CSV_HEADER: &str =
    "experiment,point,state_id,k,N,K,mean_s,median_s,q1,q3,mse_mean,mse_median,theory_s";

/// `state_id` marker for rows aggregating over a point's state set.
pub const AGGREGATE_STATE_ID: i64 = -1;

/// Candidate budget when filtering random mixed states for violations.
const MIXED_SET_CANDIDATE_CAP: u64 = 10_000_000;

/// One emitted CSV row.
#[derive(Debug, Clone)]
pub struct CsvRow<T: Scalar> {
    pub point_index: usize,
    pub point: T,
    pub state_id: i64,
    pub stats: SummaryStatistics<T>,
}

/// Run metadata written next to the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub n_shots: u64,
    pub k_max: u32,
    pub trajectories: u32,
    pub states_per_point: u32,
    pub grid: Vec<f64>,
    /// Gain coefficients in the order a, A, s, b, r.
    pub gains: [f64; 5],
    pub quartile_method: String,
    pub mixed_state_measure: String,
    pub shot_allocation: String,
    pub rows_written: usize,
    pub output_csv: String,
    pub elapsed_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_set_candidates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_set_kept: Option<u32>,
}

/// Everything a run produced, also available programmatically for tests and
/// downstream tooling.
#[derive(Debug, Clone)]
pub struct RunOutput<T: Scalar> {
    pub rows: Vec<CsvRow<T>>,
    pub manifest: Manifest,
    /// Present only for the see-saw report experiment.
    pub seesaw_report: Option<Value>,
}

impl<T: Scalar> RunOutput<T> {
    /// Aggregate (`state_id = -1`) statistics of one grid point, ordered by k.
    pub fn aggregate_stats(&self, point_index: usize) -> Vec<SummaryStatistics<T>> {
        self.rows
            .iter()
            .filter(|r| r.point_index == point_index && r.state_id == AGGREGATE_STATE_ID)
            .map(|r| r.stats)
            .collect()
    }

    /// Statistics of one state at one grid point, ordered by k.
    pub fn state_stats(&self, point_index: usize, state_id: i64) -> Vec<SummaryStatistics<T>> {
        self.rows
            .iter()
            .filter(|r| r.point_index == point_index && r.state_id == state_id)
            .map(|r| r.stats)
            .collect()
    }
}

struct StateEntry<T: Scalar> {
    rho: DensityMatrix<T>,
    theory: T,
}

/// Runs the configured experiment, writes CSV + manifest (or the JSON report
/// for the see-saw oracle), and returns the rows.
pub fn run_experiment<T: Scalar>(config: &ExperimentConfig<T>) -> Result<RunOutput<T>> {
    config.validate()?;
    let start = Instant::now();
    match config.experiment {
        ExperimentKind::SeesawOracle => run_seesaw_oracle(config, start),
        _ => run_sweep(config, start),
    }
}

fn run_sweep<T: Scalar>(config: &ExperimentConfig<T>, start: Instant) -> Result<RunOutput<T>> {
    let points: Vec<T> = if config.experiment.uses_grid() {
        config.grid.clone()
    } else {
        vec![T::zero()]
    };

    let mut rows: Vec<CsvRow<T>> = Vec::new();
    let mut candidates_total = 0u64;
    let mut kept_total = 0u32;

    for (point_index, &point) in points.iter().enumerate() {
        let (entries, candidates) = build_states(config, point_index, point)?;
        candidates_total += candidates;
        kept_total += entries.len() as u32;

        let k_count = config.k_max as usize;
        let mut per_state_mean = Vec::with_capacity(entries.len());
        let mut per_state_mse_mean = Vec::with_capacity(entries.len());
        let mut per_state_mse_median = Vec::with_capacity(entries.len());
        let mut theories = Vec::with_capacity(entries.len());

        for (state_idx, entry) in entries.iter().enumerate() {
            let records = run_state_trajectories(config, point_index, state_idx, &entry.rho)?;
            let mut means = Vec::with_capacity(k_count);
            let mut mse_means = Vec::with_capacity(k_count);
            let mut mse_medians = Vec::with_capacity(k_count);
            for k in 1..=config.k_max {
                let values: Vec<T> = records
                    .iter()
                    .map(|r| r.exact_at(k).expect("diagnostic recorded"))
                    .collect();
                let s = set_statistics(&values)?;
                let (mse_mean, mse_median) = squared_error_stats(&records, k, entry.theory)?;
                rows.push(CsvRow {
                    point_index,
                    point,
                    state_id: state_idx as i64,
                    stats: SummaryStatistics {
                        k,
                        mean_s: s.mean,
                        median_s: s.median,
                        q1: s.q1,
                        q3: s.q3,
                        mse_mean,
                        mse_median,
                        theory_s: entry.theory,
                    },
                });
                means.push(s.mean);
                mse_means.push(mse_mean);
                mse_medians.push(mse_median);
            }
            per_state_mean.push(means);
            per_state_mse_mean.push(mse_means);
            per_state_mse_median.push(mse_medians);
            theories.push(entry.theory);
        }

        // Aggregate across the point's state set: set statistics of the
        // per-state trajectory means; error metrics averaged over states
        // (mean of means, median of medians).
        let theory_mean =
            theories.iter().copied().sum::<T>() / T::from_usize(theories.len()).unwrap();
        for k in 1..=config.k_max {
            let idx = (k - 1) as usize;
            let means_at_k: Vec<T> = per_state_mean.iter().map(|v| v[idx]).collect();
            let s = set_statistics(&means_at_k)?;
            let mse_means_at_k: Vec<T> = per_state_mse_mean.iter().map(|v| v[idx]).collect();
            let mse_medians_at_k: Vec<T> = per_state_mse_median.iter().map(|v| v[idx]).collect();
            let mse_mean = mse_means_at_k.iter().copied().sum::<T>()
                / T::from_usize(mse_means_at_k.len()).unwrap();
            let mse_median = set_statistics(&mse_medians_at_k)?.median;
            rows.push(CsvRow {
                point_index,
                point,
                state_id: AGGREGATE_STATE_ID,
                stats: SummaryStatistics {
                    k,
                    mean_s: s.mean,
                    median_s: s.median,
                    q1: s.q1,
                    q3: s.q3,
                    mse_mean,
                    mse_median,
                    theory_s: theory_mean,
                },
            });
        }
    }

    write_csv(&config.output_path, config, &rows)?;
    let mut manifest = manifest_for(config, rows.len(), start);
    if config.experiment == ExperimentKind::MixedSet {
        manifest.mixed_set_candidates = Some(candidates_total);
        manifest.mixed_set_kept = Some(kept_total);
    }
    write_manifest(&config.output_path, &manifest)?;

    Ok(RunOutput {
        rows,
        manifest,
        seesaw_report: None,
    })
}

fn run_state_trajectories<T: Scalar>(
    config: &ExperimentConfig<T>,
    point_index: usize,
    state_idx: usize,
    rho: &DensityMatrix<T>,
) -> Result<Vec<TrajectoryRecord<T>>> {
    let objective = ShotNoiseObjective::new(rho, config.n_shots);
    let diagnostic = |z: &SettingVector<T>| chsh_exact(rho, z).expect("exact value of unit blocks");
    (0..config.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = RandomStream::substream(
                config.seed,
                &[
                    purpose::TRAJECTORY,
                    point_index as u64,
                    state_idx as u64,
                    t as u64,
                ],
            );
            let z0 = SettingVector::random(&mut rng);
            run_trajectory(
                &objective,
                &z0,
                config.k_max,
                &config.gains,
                &mut rng,
                Some(&diagnostic),
            )
        })
        .collect()
}

fn build_states<T: Scalar>(
    config: &ExperimentConfig<T>,
    point_index: usize,
    point: T,
) -> Result<(Vec<StateEntry<T>>, u64)> {
    let m = config.states_per_point as usize;
    let state_rng = |state_idx: u64| {
        RandomStream::substream(
            config.seed,
            &[purpose::STATE, point_index as u64, state_idx],
        )
    };
    match config.experiment {
        ExperimentKind::SchmidtSweep => {
            let psi = from_schmidt(&SchmidtForm::computational(point)?);
            Ok((
                vec![StateEntry {
                    rho: psi.density(),
                    theory: oracle::max_chsh_pure(point)?,
                }],
                1,
            ))
        }
        ExperimentKind::WernerSweep => Ok((
            vec![StateEntry {
                rho: werner(point)?,
                theory: oracle::max_chsh_werner(point)?,
            }],
            1,
        )),
        ExperimentKind::ConcurrenceSweep => {
            // Invert C = 2 sqrt(l (1 - l)) into the smaller root.
            let lambda =
                (T::one() - (T::one() - point * point).max(T::zero()).sqrt()) / T::lit(2.0);
            let theory = oracle::max_chsh_pure(lambda)?;
            let mut out = Vec::with_capacity(m);
            for s in 0..m {
                let mut rng = state_rng(s as u64);
                let psi = from_schmidt(&SchmidtForm::random(lambda, &mut rng)?);
                out.push(StateEntry {
                    rho: psi.density(),
                    theory,
                });
            }
            Ok((out, m as u64))
        }
        ExperimentKind::HaarAverage | ExperimentKind::MseCurve => {
            let mut out = Vec::with_capacity(m);
            for s in 0..m {
                let mut rng = state_rng(s as u64);
                let psi = haar_pure::<T>(&mut rng);
                let theory = oracle::max_chsh_pure(schmidt_coefficient(&psi))?;
                out.push(StateEntry {
                    rho: psi.density(),
                    theory,
                });
            }
            Ok((out, m as u64))
        }
        ExperimentKind::MixedSet => {
            let mut out = Vec::with_capacity(m);
            let mut candidates = 0u64;
            while out.len() < m && candidates < MIXED_SET_CANDIDATE_CAP {
                let mut rng = state_rng(candidates);
                let rho = random_mixed::<T>(&mut rng);
                candidates += 1;
                if !m_quantity(&rho).violates_chsh() {
                    continue;
                }
                let mut seesaw_rng = RandomStream::substream(
                    config.seed,
                    &[purpose::SEESAW, point_index as u64, out.len() as u64],
                );
                let oracle_run = oracle::seesaw_max(
                    &rho,
                    config.restarts,
                    T::lit(oracle::DEFAULT_SEESAW_TOL),
                    oracle::DEFAULT_MAX_HALF_STEPS,
                    &mut seesaw_rng,
                )?;
                out.push(StateEntry {
                    rho,
                    theory: oracle_run.s_max,
                });
            }
            if out.is_empty() {
                return Err(Error::InvalidConfig(
                    "no CHSH-violating states found within the candidate budget".into(),
                ));
            }
            Ok((out, candidates))
        }
        ExperimentKind::SeesawOracle => unreachable!("dispatched before sweep"),
    }
}

fn run_seesaw_oracle<T: Scalar>(
    config: &ExperimentConfig<T>,
    start: Instant,
) -> Result<RunOutput<T>> {
    let input = config
        .input_path
        .as_ref()
        .expect("validated: input path present");
    let text = std::fs::read_to_string(input)?;
    let value: Value = serde_json::from_str(&text)?;
    let rho = DensityMatrix::<T>::from_json(&value)?;

    let mut rng = RandomStream::substream(config.seed, &[purpose::SEESAW]);
    let result = oracle::seesaw_max(
        &rho,
        config.restarts,
        T::lit(oracle::DEFAULT_SEESAW_TOL),
        oracle::DEFAULT_MAX_HALF_STEPS,
        &mut rng,
    )?;
    let m = m_quantity(&rho);

    let report = json!({
        "s_max": to_f64(result.s_max),
        "m_quantity": to_f64(m.m),
        "negativity": to_f64(negativity(&rho)),
        "horodecki_bound": to_f64(oracle::horodecki_bound(&rho)),
        "converged": result.converged,
        "half_steps": result.half_steps,
        "optimal_settings": settings_json(&result.optimal_settings),
    });

    std::fs::write(
        &config.output_path,
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    let manifest = manifest_for(config, 0, start);
    write_manifest(&config.output_path, &manifest)?;

    Ok(RunOutput {
        rows: Vec::new(),
        manifest,
        seesaw_report: Some(report),
    })
}

fn settings_json<T: Scalar>(z: &SettingVector<T>) -> Value {
    let block = |b: &Block<T>| {
        json!([
            [to_f64(b.0[0].re), to_f64(b.0[0].im)],
            [to_f64(b.0[1].re), to_f64(b.0[1].im)],
        ])
    };
    json!({
        "a": block(&z.a),
        "a_prime": block(&z.a_prime),
        "b": block(&z.b),
        "b_prime": block(&z.b_prime),
    })
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn manifest_for<T: Scalar>(config: &ExperimentConfig<T>, rows: usize, start: Instant) -> Manifest {
    Manifest {
        experiment: config.experiment.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        n_shots: config.n_shots,
        k_max: config.k_max,
        trajectories: config.trajectories,
        states_per_point: config.states_per_point,
        grid: config.grid.iter().map(|&g| to_f64(g)).collect(),
        gains: [
            to_f64(config.gains.a),
            to_f64(config.gains.a_stability),
            to_f64(config.gains.s),
            to_f64(config.gains.b),
            to_f64(config.gains.r),
        ],
        quartile_method: "linear interpolation between order statistics (type 7)".to_string(),
        mixed_state_measure: "Hilbert-Schmidt (normalized Ginibre G G^dagger)".to_string(),
        shot_allocation:
            "N pairs per correlator, 4 correlators per evaluation, 2 evaluations per iteration"
                .to_string(),
        rows_written: rows,
        output_csv: config.output_path.display().to_string(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        mixed_set_candidates: None,
        mixed_set_kept: None,
    }
}

fn write_csv<T: Scalar>(
    path: &Path,
    config: &ExperimentConfig<T>,
    rows: &[CsvRow<T>],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    let name = config.experiment.name();
    for row in rows {
        let s = &row.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            name,
            fmt(row.point),
            row.state_id,
            s.k,
            config.n_shots,
            config.trajectories,
            fmt(s.mean_s),
            fmt(s.median_s),
            fmt(s.q1),
            fmt(s.q3),
            fmt(s.mse_mean),
            fmt(s.mse_median),
            fmt(s.theory_s),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Nine significant digits, scientific notation.
fn fmt<T: Scalar>(x: T) -> String {
    format!("{:.8e}", to_f64(x))
}

fn manifest_path(output: &Path) -> PathBuf {
    match output.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent.join("manifest.json"),
        _ => PathBuf::from("manifest.json"),
    }
}

fn write_manifest(output: &Path, manifest: &Manifest) -> Result<()> {
    let path = manifest_path(output);
    std::fs::write(
        path,
        serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_path(name: &str) -> PathBuf {
        // One subdirectory per output so parallel tests never share a
        // manifest.json.
        let dir = std::env::temp_dir()
            .join(format!("bell-hunter-test-{}", std::process::id()))
            .join(name.replace(".csv", ""));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn tiny_werner_config(out: &str) -> ExperimentConfig<f64> {
        let mut cfg = ExperimentConfig::new(ExperimentKind::WernerSweep);
        cfg.grid = vec![0.3, 0.9];
        cfg.n_shots = 20;
        cfg.k_max = 8;
        cfg.trajectories = 6;
        cfg.states_per_point = 1;
        cfg.seed = 77;
        cfg.output_path = tmp_path(out);
        cfg
    }

    #[test]
    fn werner_run_emits_consistent_rows() {
        let cfg = tiny_werner_config("werner-consistency.csv");
        let run = run_experiment(&cfg).unwrap();
        // 2 points x (1 state + aggregate) x 8 iterations.
        assert_eq!(run.rows.len(), 2 * 2 * 8);
        let tsirelson = 2.0 * 2.0_f64.sqrt();
        for row in &run.rows {
            assert!(row.stats.q1 <= row.stats.median_s + 1e-12);
            assert!(row.stats.median_s <= row.stats.q3 + 1e-12);
            assert!(row.stats.mean_s <= tsirelson + 1e-9);
            assert!(row.stats.mse_mean >= 0.0 && row.stats.mse_median >= 0.0);
        }
        // Single-state points: aggregate mean matches the state mean.
        let state = run.state_stats(0, 0);
        let agg = run.aggregate_stats(0);
        assert_eq!(state.len(), 8);
        for (s, a) in state.iter().zip(&agg) {
            assert!((s.mean_s - a.mean_s).abs() < 1e-15);
        }
    }

    #[test]
    fn same_config_same_bytes() {
        let cfg1 = tiny_werner_config("determinism-a.csv");
        run_experiment(&cfg1).unwrap();
        let mut cfg2 = tiny_werner_config("determinism-b.csv");
        cfg2.output_path = tmp_path("determinism-b.csv");
        run_experiment(&cfg2).unwrap();
        let a = std::fs::read(tmp_path("determinism-a.csv")).unwrap();
        let b = std::fs::read(tmp_path("determinism-b.csv")).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let mut cfg = tiny_werner_config("serial.csv");
        cfg.output_path = tmp_path("parallel.csv");
        let parallel = run_experiment(&cfg).unwrap();

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        cfg.output_path = tmp_path("serial.csv");
        let serial = pool.install(|| run_experiment(&cfg)).unwrap();

        assert_eq!(parallel.rows.len(), serial.rows.len());
        for (p, s) in parallel.rows.iter().zip(&serial.rows) {
            assert_eq!(p.stats.mean_s.to_bits(), s.stats.mean_s.to_bits());
            assert_eq!(p.stats.q1.to_bits(), s.stats.q1.to_bits());
        }
    }

    #[test]
    fn csv_header_and_shape() {
        let cfg = tiny_werner_config("header.csv");
        run_experiment(&cfg).unwrap();
        let text = std::fs::read_to_string(tmp_path("header.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert!(first.starts_with("werner_sweep,3.00000000e-1,0,1,20,6,"));
        assert_eq!(first.split(',').count(), 13);
    }

    #[test]
    fn haar_average_row_structure() {
        let mut cfg = ExperimentConfig::<f64>::new(ExperimentKind::HaarAverage);
        cfg.grid = Vec::new();
        cfg.n_shots = 10;
        cfg.k_max = 5;
        cfg.trajectories = 4;
        cfg.states_per_point = 3;
        cfg.seed = 5;
        cfg.output_path = tmp_path("haar-tiny.csv");
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.rows.len(), (3 + 1) * 5);
        assert_eq!(run.aggregate_stats(0).len(), 5);
        // Theory values sit in the quantum window.
        for row in &run.rows {
            assert!(row.stats.theory_s >= 2.0 - 1e-9);
            assert!(row.stats.theory_s <= 2.0 * 2.0_f64.sqrt() + 1e-9);
        }
    }

    #[test]
    fn mixed_set_filters_and_records_counts() {
        let mut cfg = ExperimentConfig::<f64>::new(ExperimentKind::MixedSet);
        cfg.grid = Vec::new();
        cfg.n_shots = 10;
        cfg.k_max = 3;
        cfg.trajectories = 2;
        cfg.states_per_point = 2;
        cfg.restarts = 3;
        cfg.seed = 6;
        cfg.output_path = tmp_path("mixed-tiny.csv");
        let run = run_experiment(&cfg).unwrap();
        let candidates = run.manifest.mixed_set_candidates.unwrap();
        let kept = run.manifest.mixed_set_kept.unwrap();
        assert_eq!(kept, 2);
        assert!(candidates >= kept as u64);
        // Violating states have theory above the classical bound.
        for row in &run.rows {
            if row.state_id != AGGREGATE_STATE_ID {
                assert!(row.stats.theory_s > 2.0);
            }
        }
    }

    #[test]
    fn mse_curve_shares_haar_sampling() {
        let base = |kind: ExperimentKind, name: &str| {
            let mut cfg = ExperimentConfig::<f64>::new(kind);
            cfg.grid = Vec::new();
            cfg.n_shots = 10;
            cfg.k_max = 4;
            cfg.trajectories = 3;
            cfg.states_per_point = 2;
            cfg.seed = 12;
            cfg.output_path = tmp_path(name);
            cfg
        };
        let mse = run_experiment(&base(ExperimentKind::MseCurve, "mse-tiny.csv")).unwrap();
        let haar = run_experiment(&base(ExperimentKind::HaarAverage, "haar-twin.csv")).unwrap();
        assert_eq!(mse.rows.len(), haar.rows.len());
        for (a, b) in mse.rows.iter().zip(&haar.rows) {
            assert_eq!(a.state_id, b.state_id);
            assert_eq!(a.stats.mean_s.to_bits(), b.stats.mean_s.to_bits());
            assert_eq!(a.stats.mse_mean.to_bits(), b.stats.mse_mean.to_bits());
        }
        let text = std::fs::read_to_string(tmp_path("mse-tiny.csv")).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("mse_curve,"));
    }

    #[test]
    fn stronger_entanglement_violates_sooner() {
        // Qualitative pipeline check: the 75%-quantile crossing of the
        // classical bound arrives earlier for higher concurrence.
        let mut cfg = ExperimentConfig::<f64>::new(ExperimentKind::ConcurrenceSweep);
        cfg.grid = vec![0.3, 0.9];
        cfg.n_shots = 100;
        cfg.k_max = 60;
        cfg.trajectories = 60;
        cfg.states_per_point = 8;
        cfg.seed = 14;
        cfg.output_path = tmp_path("concurrence-ordering.csv");
        let run = run_experiment(&cfg).unwrap();
        let crossing = |p: usize| k_violation(&run.aggregate_stats(p), ViolationMode::Q1Above2);
        let weak = crossing(0);
        let strong = crossing(1).expect("C = 0.9 set must violate within 60 iterations");
        match weak {
            None => {}
            Some(k_weak) => assert!(
                strong < k_weak,
                "C = 0.9 crossed at {strong}, C = 0.3 at {k_weak}"
            ),
        }
    }

    #[test]
    fn concurrence_sweep_theory_column() {
        let mut cfg = ExperimentConfig::<f64>::new(ExperimentKind::ConcurrenceSweep);
        cfg.grid = vec![0.3, 0.8];
        cfg.n_shots = 10;
        cfg.k_max = 3;
        cfg.trajectories = 2;
        cfg.states_per_point = 3;
        cfg.seed = 13;
        cfg.output_path = tmp_path("concurrence-tiny.csv");
        let run = run_experiment(&cfg).unwrap();
        for (p_idx, &conc) in cfg.grid.iter().enumerate() {
            let want = 2.0 * (1.0 + conc * conc).sqrt();
            for row in run.rows.iter().filter(|r| r.point_index == p_idx) {
                assert!((row.stats.theory_s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let mut cfg = ExperimentConfig::<f64>::new(ExperimentKind::WernerSweep);
        cfg.grid = vec![0.5];
        cfg.n_shots = 5;
        cfg.k_max = 2;
        cfg.trajectories = 2;
        cfg.states_per_point = 1;
        cfg.output_path = PathBuf::from("/dev/null/nope/out.csv");
        assert!(matches!(run_experiment(&cfg), Err(Error::Io(_))));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = tiny_werner_config("invalid.csv");
        cfg.grid = vec![1.5];
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidConfig(_))));
    }
}
