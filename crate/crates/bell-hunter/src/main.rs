//! CLI entry point: run one experiment, or the see-saw report, from flags
//! and/or a `key = value` config file. Flags override the file.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 1 runtime
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bell_hunter::error::Error;
use bell_hunter::harness::{
    self, parse_config_file, parse_gains, parse_grid, ExperimentConfig, ExperimentKind,
};

#[derive(Debug, Parser)]
#[command(
    name = "bell-hunter",
    version,
    about = "Adaptive CHSH-violation search for unknown two-qubit states",
    after_help = "EXPERIMENTS:\n  \
        schmidt-sweep      fixed Schmidt bases, one state per coefficient\n  \
        concurrence-sweep  fixed concurrence, random local bases\n  \
        haar-average       Haar-random pure states\n  \
        werner-sweep       Werner states over the mixing parameter\n  \
        mixed-set          random mixed states filtered to CHSH violators\n  \
        mse-curve          haar-average sampling, squared-error focus\n  \
        seesaw-oracle      see-saw report for one density matrix (JSON)\n\n\
        Config file: plain `key = value` lines (experiment, grid, shots, iters,\n\
        trajectories, states, seed, gains, out, input, restarts); flags win."
)]
struct Cli {
    /// Experiment to run (also accepts snake_case names).
    experiment: Option<String>,

    /// Grid values: comma list and/or lo:hi:count ranges.
    #[arg(long)]
    grid: Option<String>,

    /// Ensemble size N per correlator.
    #[arg(long)]
    shots: Option<u64>,

    /// Optimizer iterations per trajectory.
    #[arg(long)]
    iters: Option<u32>,

    /// Trajectories K per state.
    #[arg(long)]
    trajectories: Option<u32>,

    /// States M per grid point (post-filter size for mixed-set).
    #[arg(long)]
    states: Option<u32>,

    /// Master seed; the full output is a pure function of config + seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Gain coefficients a,A,s,b,r.
    #[arg(long)]
    gains: Option<String>,

    /// Output path (CSV, or JSON for seesaw-oracle).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Input density matrix JSON (seesaw-oracle).
    #[arg(long)]
    input: Option<PathBuf>,

    /// See-saw restarts for oracle values.
    #[arg(long)]
    restarts: Option<u32>,

    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InvalidConfig(_) | Error::OutOfRange { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
        None => Default::default(),
    };

    let experiment_name = cli
        .experiment
        .clone()
        .or_else(|| file.get("experiment").cloned())
        .ok_or_else(|| {
            Error::InvalidConfig("no experiment given (argument or config file)".into())
        })?;
    let kind = ExperimentKind::from_name(&experiment_name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment `{experiment_name}`")))?;

    let mut config = ExperimentConfig::<f64>::new(kind);

    if let Some(text) = cli.grid.as_deref().or(file.get("grid").map(|s| s.as_str())) {
        config.grid = parse_grid(text)?;
    }
    if let Some(shots) = cli.shots.or(parse_file_num(&file, "shots")?) {
        config.n_shots = shots;
    }
    if let Some(iters) = cli.iters.or(parse_file_num(&file, "iters")?) {
        config.k_max = iters;
    }
    if let Some(k) = cli.trajectories.or(parse_file_num(&file, "trajectories")?) {
        config.trajectories = k;
    }
    if let Some(m) = cli.states.or(parse_file_num(&file, "states")?) {
        config.states_per_point = m;
    }
    if let Some(seed) = cli.seed.or(parse_file_num(&file, "seed")?) {
        config.seed = seed;
    }
    if let Some(restarts) = cli.restarts.or(parse_file_num(&file, "restarts")?) {
        config.restarts = restarts;
    }
    if let Some(text) = cli
        .gains
        .as_deref()
        .or(file.get("gains").map(|s| s.as_str()))
    {
        config.gains = parse_gains(text)?;
    }
    if let Some(out) = cli.out.or(file.get("out").map(PathBuf::from)) {
        config.output_path = out;
    } else if kind == ExperimentKind::SeesawOracle {
        config.output_path = PathBuf::from("seesaw_oracle.json");
    }
    if let Some(input) = cli.input.or(file.get("input").map(PathBuf::from)) {
        config.input_path = Some(input);
    }

    let output = harness::run_experiment(&config)?;

    if let Some(report) = &output.seesaw_report {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        );
    } else {
        println!(
            "{}: wrote {} rows to {} ({:.2}s)",
            config.experiment.name(),
            output.rows.len(),
            config.output_path.display(),
            output.manifest.elapsed_seconds,
        );
    }
    Ok(())
}

fn parse_file_num<N: std::str::FromStr>(
    file: &std::collections::HashMap<String, String>,
    key: &str,
) -> Result<Option<N>, Error> {
    match file.get(key) {
        None => Ok(None),
        Some(text) => text.parse::<N>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("config key `{key}`: `{text}` is not valid"))
        }),
    }
}
