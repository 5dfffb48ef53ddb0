use rayon::prelude::*;

use super::{run_system, HarnessError, Outcome, Report, RunOptions};
use crate::integrators::IntegratorKind;
use crate::model::DloSystem;
use crate::scenario::SimulationConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkOptions {
    /// Untimed steps run before the cells of each integrator.
    pub warmup_steps: u64,
    /// Run cells concurrently. Timings then include contention.
    pub parallel: bool,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            warmup_steps: 50,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCell {
    pub integrator: IntegratorKind,
    /// Simulated time requested, seconds.
    pub duration: f64,
    pub wall_seconds: f64,
    pub outcome: Outcome,
    pub steps: u64,
    pub force_evals: u64,
}

impl BenchmarkCell {
    pub fn force_evals_per_step(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.force_evals as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub tau: f64,
    pub cells: Vec<BenchmarkCell>,
    pub machine: String,
}

impl BenchmarkReport {
    pub fn cell(&self, kind: IntegratorKind, duration: f64) -> Option<&BenchmarkCell> {
        self.cells.iter().find(|c| c.integrator == kind && c.duration == duration)
    }

    /// `wall(symplectic4) / wall(rk4)` when both cells completed.
    pub fn wall_ratio(&self, duration: f64) -> Option<f64> {
        let s = self.cell(IntegratorKind::Symplectic4, duration)?;
        let r = self.cell(IntegratorKind::Rk4, duration)?;
        (s.outcome.is_completed() && r.outcome.is_completed()).then(|| s.wall_seconds / r.wall_seconds)
    }

    pub fn durations(&self) -> Vec<f64> {
        let mut d: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !d.contains(&c.duration) {
                d.push(c.duration);
            }
        }
        d
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("integrator benchmark");
        r.line(format!("machine: {}", self.machine));
        r.line(format!("tau: {} s", self.tau));
        r.line(format!(
            "{:<12} {:>10} {:>12} {:>10} {:>12}  outcome",
            "integrator", "duration", "wall [s]", "steps", "evals/step"
        ));
        for c in &self.cells {
            r.line(format!(
                "{:<12} {:>10} {:>12.6} {:>10} {:>12.3}  {}",
                c.integrator.name(),
                c.duration,
                c.wall_seconds,
                c.steps,
                c.force_evals_per_step(),
                c.outcome
            ));
        }
        r.value("machine", &self.machine);
        r.value("tau", self.tau);
        for c in &self.cells {
            let key = format!("{}.{}", c.integrator.name(), c.duration);
            r.value(format!("{key}.wall_seconds"), c.wall_seconds);
            r.value(format!("{key}.outcome"), &c.outcome);
            r.value(format!("{key}.force_evals"), c.force_evals);
        }
        for d in self.durations() {
            if let Some(ratio) = self.wall_ratio(d) {
                r.value(format!("ratio.symplectic4_rk4.{d}"), ratio);
            }
        }
        r
    }
}

/// OS, architecture, logical CPU count and CPU model when available.
pub fn machine_descriptor() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    let model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    format!("{} {} {cpus} threads, {model}", std::env::consts::OS, std::env::consts::ARCH)
}

/// Times every (integrator, duration) cell on the model of `base`. Model
/// assembly is done once per integrator and excluded from the timings.
pub fn benchmark(
    base: &SimulationConfig,
    integrators: &[IntegratorKind],
    durations: &[f64],
    options: &BenchmarkOptions,
) -> Result<BenchmarkReport, HarnessError> {
    base.validate()?;
    let (system, initial) = DloSystem::from_config(base)?;
    let quiet = RunOptions { record_energy: false };

    let configured = |kind: IntegratorKind, duration: f64| {
        let mut c = base.clone();
        c.step.kind = kind;
        c.duration = duration;
        let steps = c.step_count().max(1);
        c.record_stride = usize::try_from(steps).unwrap_or(usize::MAX);
        c
    };

    if !durations.is_empty() && options.warmup_steps > 0 {
        for &kind in integrators {
            let c = configured(kind, base.step.tau * options.warmup_steps as f64);
            run_system(&c, &system, initial.clone(), &quiet)?;
        }
    }

    let jobs: Vec<(IntegratorKind, f64)> = integrators
        .iter()
        .flat_map(|k| durations.iter().map(move |d| (*k, *d)))
        .collect();
    let run_cell = |&(kind, duration): &(IntegratorKind, f64)| -> Result<BenchmarkCell, HarnessError> {
        let c = configured(kind, duration);
        let t = run_system(&c, &system, initial.clone(), &quiet)?;
        Ok(BenchmarkCell {
            integrator: kind,
            duration,
            wall_seconds: t.wall_seconds,
            outcome: t.outcome,
            steps: t.steps,
            force_evals: t.force_evals,
        })
    };
    let cells = if options.parallel {
        jobs.par_iter().map(run_cell).collect::<Result<Vec<_>, _>>()?
    } else {
        jobs.iter().map(run_cell).collect::<Result<Vec<_>, _>>()?
    };
    Ok(BenchmarkReport {
        tau: base.step.tau,
        cells,
        machine: machine_descriptor(),
    })
}
