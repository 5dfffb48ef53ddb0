use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dlo_core::harness::{
    benchmark, energy_drift_report, export_report, export_trajectory, load_config, max_stable_tau,
    resolution_error_study, run_simulation, BenchmarkOptions, ErrorStudyOptions, HarnessError, Report,
    StabilityOptions,
};
use dlo_core::IntegratorKind;

#[derive(Parser)]
#[command(name = "dlo-sim", version, about = "Spline-based deformable linear object simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write the trajectory.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time integrators over a grid of simulated durations.
    Benchmark {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "symplectic4,rk4,zhai")]
        integrators: Vec<String>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1,5,10")]
        durations: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        warmup_steps: u64,
        /// Run cells concurrently (timings include contention).
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare coarser models against a high-resolution reference.
    ErrorStudy {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "5,9,13")]
        nu: Vec<usize>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "51,101,151")]
        ns: Vec<usize>,
        /// Reference n_u; defaults to the largest of --nu and the config.
        #[arg(long)]
        ref_nu: Option<usize>,
        #[arg(long)]
        ref_ns: Option<usize>,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisect for the largest step that completes a short probe run.
    MaxStableTau {
        config: PathBuf,
        #[arg(long, default_value = "symplectic4")]
        integrator: String,
        #[arg(long, default_value_t = 0.1)]
        probe_duration: f64,
        #[arg(long, default_value_t = 1e-7)]
        tau_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.01)]
        rel_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), HarnessError> {
    print!("{}", report.render());
    if let Some(path) = out {
        export_report(report, path)?;
    }
    Ok(())
}

fn parse_kinds(names: &[String]) -> Result<Vec<IntegratorKind>, HarnessError> {
    names
        .iter()
        .map(|n| n.parse::<IntegratorKind>().map_err(HarnessError::from))
        .collect()
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { config, out } => {
            let config = load_config(&config)?;
            let traj = run_simulation(&config)?;
            export_trajectory(&traj, &out)?;
            let mut r = Report::new("simulation");
            r.line(format!("wrote {}", out.display()));
            r.value("outcome", &traj.outcome);
            r.value("steps", traj.steps);
            r.value("records", traj.records.len());
            r.value("force_evals", traj.force_evals);
            r.value("wall_seconds", traj.wall_seconds);
            if let Ok(d) = energy_drift_report(&traj) {
                r.value("drift.max_relative", d.max_relative);
                r.value("drift.slope", d.slope);
                r.value("drift.verdict", d.verdict);
            }
            emit(&r, None)
        }
        Command::Benchmark {
            config,
            integrators,
            durations,
            warmup_steps,
            parallel,
            out,
        } => {
            let config = load_config(&config)?;
            let kinds = parse_kinds(&integrators)?;
            let opts = BenchmarkOptions { warmup_steps, parallel };
            let report = benchmark(&config, &kinds, &durations, &opts)?;
            emit(&report.to_report(), out.as_deref())
        }
        Command::ErrorStudy {
            config,
            nu,
            ns,
            ref_nu,
            ref_ns,
            parallel,
            out,
        } => {
            let mut config = load_config(&config)?;
            config.n_u = ref_nu.unwrap_or_else(|| nu.iter().copied().fold(config.n_u, usize::max));
            config.n_s = ref_ns.unwrap_or_else(|| ns.iter().copied().fold(config.n_s, usize::max));
            let report = resolution_error_study(&config, &nu, &ns, &ErrorStudyOptions { parallel })?;
            emit(&report.to_report(), out.as_deref())
        }
        Command::MaxStableTau {
            config,
            integrator,
            probe_duration,
            tau_min,
            tau_max,
            rel_tol,
            out,
        } => {
            let config = load_config(&config)?;
            let kind: IntegratorKind = integrator.parse()?;
            let opts = StabilityOptions {
                probe_duration,
                tau_min,
                tau_max,
                rel_tol,
                ..Default::default()
            };
            let report = max_stable_tau(&config, kind, &opts)?;
            emit(&report.to_report(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlo-sim: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
