use super::{run_system, HarnessError, Report, RunOptions};
use crate::integrators::IntegratorKind;
use crate::model::DloSystem;
use crate::scenario::{ConfigError, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    /// Simulated time of each probe run, seconds.
    pub probe_duration: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Stop when `hi / lo < 1 + rel_tol`.
    pub rel_tol: f64,
    pub max_probes: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            probe_duration: 0.1,
            tau_min: 1e-7,
            tau_max: 1e-2,
            rel_tol: 0.01,
            max_probes: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityProbe {
    pub tau: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub integrator: IntegratorKind,
    /// Largest step that completed a probe run; `None` if even `tau_min`
    /// failed.
    pub max_stable_tau: Option<f64>,
    /// Smallest step seen to fail; `None` if `tau_max` completed.
    pub min_unstable_tau: Option<f64>,
    pub probes: Vec<StabilityProbe>,
    pub probe_duration: f64,
}

impl StabilityReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new(format!("max stable step: {}", self.integrator));
        r.line(format!("probe duration: {} s", self.probe_duration));
        for p in &self.probes {
            r.line(format!("tau = {:.6e} s  {}", p.tau, if p.stable { "stable" } else { "unstable" }));
        }
        r.value("integrator", self.integrator);
        r.value("max_stable_tau", self.max_stable_tau.map_or("none".into(), |t| t.to_string()));
        r.value(
            "min_unstable_tau",
            self.min_unstable_tau.map_or("none".into(), |t| t.to_string()),
        );
        r.value("probes", self.probes.len());
        r
    }
}

/// Geometric bisection on `τ` for the largest step at which a short run of
/// `config`'s model completes.
pub fn max_stable_tau(
    config: &SimulationConfig,
    kind: IntegratorKind,
    options: &StabilityOptions,
) -> Result<StabilityReport, HarnessError> {
    config.validate()?;
    let o = options;
    if !(o.tau_min > 0.0 && o.tau_min < o.tau_max && o.tau_max.is_finite())
        || !(o.probe_duration > 0.0)
        || !(o.rel_tol > 0.0)
    {
        return Err(ConfigError::Invalid(format!(
            "need 0 < tau_min < tau_max, probe_duration > 0 and rel_tol > 0, got {o:?}"
        ))
        .into());
    }
    let (system, initial) = DloSystem::from_config(config)?;
    let quiet = RunOptions { record_energy: false };
    let mut probes = Vec::new();
    let mut probe = |tau: f64| -> Result<bool, HarnessError> {
        let mut c = config.clone();
        c.step.kind = kind;
        c.step.tau = tau;
        c.duration = options.probe_duration.max(tau);
        c.record_stride = usize::try_from(c.step_count().max(1)).unwrap_or(usize::MAX);
        let stable = run_system(&c, &system, initial.clone(), &quiet)?.outcome.is_completed();
        probes.push(StabilityProbe { tau, stable });
        Ok(stable)
    };

    let (mut lo, mut hi) = (options.tau_min, options.tau_max);
    let (max_stable, min_unstable) = if probe(hi)? {
        (Some(hi), None)
    } else if !probe(lo)? {
        (None, Some(lo))
    } else {
        let mut n = 2;
        while hi / lo > 1.0 + options.rel_tol && n < options.max_probes {
            let mid = (lo * hi).sqrt();
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
            n += 1;
        }
        (Some(lo), Some(hi))
    };
    Ok(StabilityReport {
        integrator: kind,
        max_stable_tau: max_stable,
        min_unstable_tau: min_unstable,
        probes,
        probe_duration: options.probe_duration,
    })
}
