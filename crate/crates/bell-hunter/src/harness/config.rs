//! Experiment configuration: the experiment kinds, their parameter envelope,
//! validation, and the `key = value` config-file format the CLI accepts.

use std::collections::HashMap;
use std::path::PathBuf;

use crate::cspsa::GainSchedule;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Fixed local Schmidt bases, one state per coefficient grid point.
    SchmidtSweep,
    /// Fixed concurrence per grid point, random local bases per state.
    ConcurrenceSweep,
    /// Haar-random pure states, no grid.
    HaarAverage,
    /// One Werner state per mixing-parameter grid point.
    WernerSweep,
    /// Random mixed states filtered to the CHSH-violating subset.
    MixedSet,
    /// Same sampling as `HaarAverage`; emitted under its own label for
    /// error-curve runs.
    MseCurve,
    /// Single-state see-saw report from a JSON density matrix.
    SeesawOracle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SchmidtSweep,
        ExperimentKind::ConcurrenceSweep,
        ExperimentKind::HaarAverage,
        ExperimentKind::WernerSweep,
        ExperimentKind::MixedSet,
        ExperimentKind::MseCurve,
        ExperimentKind::SeesawOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SchmidtSweep => "schmidt_sweep",
            ExperimentKind::ConcurrenceSweep => "concurrence_sweep",
            ExperimentKind::HaarAverage => "haar_average",
            ExperimentKind::WernerSweep => "werner_sweep",
            ExperimentKind::MixedSet => "mixed_set",
            ExperimentKind::MseCurve => "mse_curve",
            ExperimentKind::SeesawOracle => "seesaw_oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let normalized = name.replace('-', "_");
        Self::ALL.iter().copied().find(|k| k.name() == normalized)
    }

    pub fn uses_grid(&self) -> bool {
        matches!(
            self,
            ExperimentKind::SchmidtSweep
                | ExperimentKind::ConcurrenceSweep
                | ExperimentKind::WernerSweep
        )
    }

    /// Inclusive-exclusive domain of grid values, when a grid applies.
    pub fn grid_domain(&self) -> Option<(f64, f64, bool)> {
        // (lo, hi, lo_inclusive)
        match self {
            ExperimentKind::SchmidtSweep => Some((0.0, 0.5, true)),
            ExperimentKind::WernerSweep => Some((0.0, 1.0, true)),
            ExperimentKind::ConcurrenceSweep => Some((0.0, 1.0, false)),
            _ => None,
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            ExperimentKind::SchmidtSweep => linspace(0.05, 0.5, 10),
            ExperimentKind::ConcurrenceSweep => linspace(0.1, 1.0, 10),
            ExperimentKind::WernerSweep => linspace(0.0, 1.0, 11),
            _ => Vec::new(),
        }
    }
}

/// Full parameter set of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig<T: Scalar> {
    pub experiment: ExperimentKind,
    pub grid: Vec<T>,
    /// Ensemble size N per correlator.
    pub n_shots: u64,
    pub k_max: u32,
    /// Trajectories K per state.
    pub trajectories: u32,
    /// States M per grid point (for the set-based experiments, the size of
    /// the post-filter set).
    pub states_per_point: u32,
    pub seed: u64,
    pub gains: GainSchedule<T>,
    pub output_path: PathBuf,
    /// Input density matrix (JSON) for the see-saw report.
    pub input_path: Option<PathBuf>,
    /// See-saw restarts used for oracle values.
    pub restarts: u32,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            grid: experiment.default_grid().into_iter().map(T::lit).collect(),
            n_shots: 100,
            k_max: 100,
            trajectories: 100,
            states_per_point: 20,
            seed: 2024,
            gains: GainSchedule::default(),
            output_path: PathBuf::from(format!("{}.csv", experiment.name())),
            input_path: None,
            restarts: crate::oracle::DEFAULT_RESTARTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment == ExperimentKind::SeesawOracle {
            if self.input_path.is_none() {
                return Err(Error::InvalidConfig(
                    "seesaw_oracle needs an input density matrix (--input)".into(),
                ));
            }
            return Ok(());
        }
        if self.n_shots < 1 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.trajectories < 1 {
            return Err(Error::InvalidConfig(
                "trajectories must be at least 1".into(),
            ));
        }
        if self.states_per_point < 1 {
            return Err(Error::InvalidConfig("states must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.experiment.uses_grid() {
            if self.grid.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "{} needs a non-empty grid",
                    self.experiment.name()
                )));
            }
            let (lo, hi, lo_inclusive) = self.experiment.grid_domain().unwrap();
            for &g in &self.grid {
                let g = g.to_f64().unwrap_or(f64::NAN);
                let lo_ok = if lo_inclusive { g >= lo } else { g > lo };
                if !(lo_ok && g <= hi) {
                    return Err(Error::InvalidConfig(format!(
                        "grid value {g} outside {} domain ({lo}, {hi}]",
                        self.experiment.name()
                    )));
                }
            }
        } else if !self.grid.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{} does not take a grid",
                self.experiment.name()
            )));
        }
        Ok(())
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `1,2,3` and `lo:hi:n` (linearly spaced) grid syntax, mixable per item.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidConfig(format!(
                    "grid range `{item}` must be lo:hi:count"
                )));
            }
            let lo = parse_float(parts[0])?;
            let hi = parse_float(parts[1])?;
            let n: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad grid count in `{item}`")))?;
            if n == 0 {
                return Err(Error::InvalidConfig("grid count must be positive".into()));
            }
            out.extend(linspace(lo, hi, n));
        } else {
            out.push(parse_float(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty grid".into()));
    }
    Ok(out)
}

/// `a,A,s,b,r` gain coefficients.
pub fn parse_gains(text: &str) -> Result<GainSchedule<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(parse_float)
        .collect::<Result<Vec<_>>>()?;
    if parts.len() != 5 {
        return Err(Error::InvalidConfig(format!(
            "gains need exactly 5 comma-separated values a,A,s,b,r; got {}",
            parts.len()
        )));
    }
    Ok(GainSchedule {
        a: parts[0],
        a_stability: parts[1],
        s: parts[2],
        b: parts[3],
        r: parts[4],
    })
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("`{s}` is not a number")))
}

/// Plain `key = value` config file: one pair per line, `#` comments allowed.
/// Unknown keys are rejected so typos surface immediately.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>> {
    const KNOWN: [&str; 11] = [
        "experiment",
        "grid",
        "shots",
        "iters",
        "trajectories",
        "states",
        "seed",
        "gains",
        "out",
        "input",
        "restarts",
    ];
    let mut out = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}
