use std::fmt;

use super::{HarnessError, Trajectory};

/// Fewest records accepted by [`energy_drift_report`].
pub const MIN_RECORDS: usize = 10;

/// Trend sizes below this are treated as exact conservation.
const TREND_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftVerdict {
    Bounded,
    Secular,
}

impl fmt::Display for DriftVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriftVerdict::Bounded => "bounded",
            DriftVerdict::Secular => "secular",
        })
    }
}

/// Summary of `d(t) = |H(t) - H(0)| / (|H(0)| + scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub max_abs_delta: f64,
    pub max_relative: f64,
    /// Least-squares slope of `d` against `t`, 1/s.
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the linear fit.
    pub residual_sigma: f64,
    pub span: f64,
    pub verdict: DriftVerdict,
}

/// The linear trend counts as secular when the change it predicts over the
/// span exceeds twice the residual scatter and [`TREND_FLOOR`].
pub fn drift_from_series(times: &[f64], energies: &[f64], scale: f64) -> Result<DriftReport, HarnessError> {
    if times.len() != energies.len() {
        return Err(HarnessError::InsufficientData("time and energy series differ in length".into()));
    }
    if times.len() < MIN_RECORDS {
        return Err(HarnessError::InsufficientData(format!(
            "{} records, need at least {MIN_RECORDS}",
            times.len()
        )));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(HarnessError::InsufficientData("energy series is not finite".into()));
    }
    let h0 = energies[0];
    let norm = h0.abs() + scale;
    let abs: Vec<f64> = energies.iter().map(|h| (h - h0).abs()).collect();
    let d: Vec<f64> = abs.iter().map(|a| a / norm).collect();

    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let d_mean = d.iter().sum::<f64>() / n;
    let sxx: f64 = times.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = times.iter().zip(&d).map(|(t, v)| (t - t_mean) * (v - d_mean)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = d_mean - slope * t_mean;
    let rss: f64 = times
        .iter()
        .zip(&d)
        .map(|(t, v)| (v - intercept - slope * t).powi(2))
        .sum();
    let residual_sigma = (rss / n).sqrt();
    let span = times[times.len() - 1] - times[0];

    let trend = slope.abs() * span;
    let verdict = if trend > 2.0 * residual_sigma && trend > TREND_FLOOR {
        DriftVerdict::Secular
    } else {
        DriftVerdict::Bounded
    };
    Ok(DriftReport {
        max_abs_delta: abs.iter().cloned().fold(0.0, f64::max),
        max_relative: d.iter().cloned().fold(0.0, f64::max),
        slope,
        intercept,
        residual_sigma,
        span,
        verdict,
    })
}

/// Drift summary of a completed run.
pub fn energy_drift_report(trajectory: &Trajectory) -> Result<DriftReport, HarnessError> {
    if !trajectory.outcome.is_completed() {
        return Err(HarnessError::Incomplete(trajectory.outcome.to_string()));
    }
    drift_from_series(&trajectory.times(), &trajectory.energies(), trajectory.energy_scale)
}
