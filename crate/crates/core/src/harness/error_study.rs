use nalgebra::Vector3;
use rayon::prelude::*;

use super::{run_simulation, HarnessError, Outcome, Report, Trajectory};
use crate::model::ctrl_view;
use crate::scenario::SimulationConfig;
use crate::spline::build_basis;

/// Measurement stations at `u = kL/(STATION_COUNT - 1)`.
pub const STATION_COUNT: usize = 10;
pub const TIME_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorStudyOptions {
    /// Run variants concurrently. Per-variant wall times then include
    /// contention.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub n_u: usize,
    pub n_s: usize,
    pub outcome: Outcome,
    /// `grid[station][bin]`: bin-mean Euclidean position error, meters.
    /// Empty for runs that did not complete.
    pub grid: Vec<Vec<f64>>,
    pub mean_error: f64,
    pub max_error: f64,
    pub wall_seconds: f64,
}

impl VariantResult {
    pub fn is_usable(&self) -> bool {
        self.outcome.is_completed()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStudyReport {
    pub reference: (usize, usize),
    pub stations: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub variants: Vec<VariantResult>,
    /// Mean error per `n_u` over the non-reference completed variants.
    pub error_vs_nu: Vec<(usize, f64)>,
    pub error_vs_ns: Vec<(usize, f64)>,
    pub error_vs_t: Vec<f64>,
    pub error_vs_u: Vec<f64>,
}

impl ErrorStudyReport {
    pub fn variant(&self, n_u: usize, n_s: usize) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.n_u == n_u && v.n_s == n_s)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("resolution error study");
        r.line(format!("reference: n_u = {}, n_s = {}", self.reference.0, self.reference.1));
        r.line(format!(
            "{:>5} {:>5} {:>14} {:>14} {:>12}  outcome",
            "n_u", "n_s", "mean err [m]", "max err [m]", "wall [s]"
        ));
        for v in &self.variants {
            r.line(format!(
                "{:>5} {:>5} {:>14.6e} {:>14.6e} {:>12.4}  {}",
                v.n_u, v.n_s, v.mean_error, v.max_error, v.wall_seconds, v.outcome
            ));
        }
        r.value("reference.n_u", self.reference.0);
        r.value("reference.n_s", self.reference.1);
        for v in &self.variants {
            let key = format!("variant.{}x{}", v.n_u, v.n_s);
            r.value(format!("{key}.mean_error"), v.mean_error);
            r.value(format!("{key}.max_error"), v.max_error);
            r.value(format!("{key}.wall_seconds"), v.wall_seconds);
            r.value(format!("{key}.outcome"), &v.outcome);
        }
        for (n, e) in &self.error_vs_nu {
            r.value(format!("error_vs_nu.{n}"), e);
        }
        for (n, e) in &self.error_vs_ns {
            r.value(format!("error_vs_ns.{n}"), e);
        }
        for (k, e) in self.error_vs_t.iter().enumerate() {
            r.value(format!("error_vs_t.{k}"), e);
        }
        for (k, e) in self.error_vs_u.iter().enumerate() {
            r.value(format!("error_vs_u.{k}"), e);
        }
        r
    }
}

fn stations(length: f64) -> Vec<f64> {
    (0..STATION_COUNT)
        .map(|k| (k as f64 * length / (STATION_COUNT - 1) as f64).min(length))
        .collect()
}

/// Station positions for every record, `[record][station]`.
fn station_positions(traj: &Trajectory, stations: &[f64]) -> Result<Vec<Vec<Vector3<f64>>>, HarnessError> {
    let basis = build_basis(traj.config.n_u, traj.config.properties.length).map_err(crate::model::ModelError::from)?;
    traj.records
        .iter()
        .map(|rec| {
            stations
                .iter()
                .map(|&u| {
                    let p = basis
                        .eval_curve(ctrl_view(&rec.q), u, 0)
                        .map_err(crate::model::ModelError::from)?;
                    Ok(Vector3::new(p[0], p[1], p[2]))
                })
                .collect()
        })
        .collect()
}

fn bin_of(t: f64, duration: f64) -> usize {
    let b = (t / duration * TIME_BINS as f64).ceil() as usize;
    b.clamp(1, TIME_BINS) - 1
}

fn compare(
    variant: &Trajectory,
    reference: &[Vec<Vector3<f64>>],
    ref_times: &[f64],
    stations: &[f64],
    duration: f64,
) -> Result<(Vec<Vec<f64>>, f64, f64), HarnessError> {
    let pos = station_positions(variant, stations)?;
    if pos.len() != reference.len() {
        return Err(HarnessError::Incomplete(format!(
            "variant has {} records, reference {}",
            pos.len(),
            reference.len()
        )));
    }
    let mut sum = vec![vec![0.0; TIME_BINS]; STATION_COUNT];
    let mut count = [0usize; TIME_BINS];
    let mut max_error: f64 = 0.0;
    for (k, (vp, rp)) in pos.iter().zip(reference).enumerate().skip(1) {
        let b = bin_of(ref_times[k], duration);
        count[b] += 1;
        for s in 0..STATION_COUNT {
            let e = (vp[s] - rp[s]).norm();
            sum[s][b] += e;
            max_error = max_error.max(e);
        }
    }
    let grid: Vec<Vec<f64>> = sum
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(&count)
                .map(|(v, n)| if *n > 0 { v / *n as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let filled = count.iter().filter(|n| **n > 0).count().max(1);
    let mean = grid.iter().flatten().sum::<f64>() / (STATION_COUNT * filled) as f64;
    Ok((grid, mean, max_error))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Runs every `(n_u, n_s)` variant of `reference` with the same scenario,
/// step and duration, and measures the Euclidean distance of the curve from
/// the reference curve at fixed stations and record times.
pub fn resolution_error_study(
    reference: &SimulationConfig,
    n_u_list: &[usize],
    n_s_list: &[usize],
    options: &ErrorStudyOptions,
) -> Result<ErrorStudyReport, HarnessError> {
    let length = reference.properties.length;
    let stations = stations(length);
    let ref_traj = run_simulation(reference)?;
    if !ref_traj.outcome.is_completed() {
        return Err(HarnessError::Incomplete(format!("reference run {}", ref_traj.outcome)));
    }
    let ref_pos = station_positions(&ref_traj, &stations)?;
    let ref_times = ref_traj.times();
    let duration = ref_times.last().copied().unwrap_or(0.0);
    if !(duration > 0.0) {
        return Err(HarnessError::InsufficientData("reference run has no records after t = 0".into()));
    }

    let jobs: Vec<(usize, usize)> = n_u_list
        .iter()
        .flat_map(|nu| n_s_list.iter().map(move |ns| (*nu, *ns)))
        .collect();
    let run_variant = |&(n_u, n_s): &(usize, usize)| -> Result<VariantResult, HarnessError> {
        let mut c = reference.clone();
        c.n_u = n_u;
        c.n_s = n_s;
        let traj = run_simulation(&c)?;
        let (grid, mean_error, max_error) = if traj.outcome.is_completed() {
            compare(&traj, &ref_pos, &ref_times, &stations, duration)?
        } else {
            (Vec::new(), f64::NAN, f64::NAN)
        };
        Ok(VariantResult {
            n_u,
            n_s,
            outcome: traj.outcome,
            grid,
            mean_error,
            max_error,
            wall_seconds: traj.wall_seconds,
        })
    };
    let variants = if options.parallel {
        jobs.par_iter().map(run_variant).collect::<Result<Vec<_>, _>>()?
    } else {
        jobs.iter().map(run_variant).collect::<Result<Vec<_>, _>>()?
    };

    let is_ref = |v: &VariantResult| (v.n_u, v.n_s) == (reference.n_u, reference.n_s);
    let summary: Vec<&VariantResult> = variants.iter().filter(|v| v.is_usable() && !is_ref(v)).collect();
    let error_vs_nu = n_u_list
        .iter()
        .map(|&n| (n, mean(summary.iter().filter(|v| v.n_u == n).map(|v| v.mean_error))))
        .collect();
    let error_vs_ns = n_s_list
        .iter()
        .map(|&n| (n, mean(summary.iter().filter(|v| v.n_s == n).map(|v| v.mean_error))))
        .collect();
    let error_vs_t = (0..TIME_BINS)
        .map(|b| mean(summary.iter().flat_map(|v| v.grid.iter().map(move |row| row[b]))))
        .collect();
    let error_vs_u = (0..STATION_COUNT)
        .map(|s| mean(summary.iter().flat_map(|v| v.grid[s].iter().copied())))
        .collect();

    Ok(ErrorStudyReport {
        reference: (reference.n_u, reference.n_s),
        stations,
        bin_edges: (0..=TIME_BINS).map(|b| duration * b as f64 / TIME_BINS as f64).collect(),
        variants,
        error_vs_nu,
        error_vs_ns,
        error_vs_t,
        error_vs_u,
    })
}
