use std::fmt;
use std::time::Instant;

use nalgebra::DVector;

use super::HarnessError;
use crate::integrators::{make_stepper, StepError};
use crate::model::{DloState, DloSystem};
use crate::scenario::SimulationConfig;

/// A run is flagged unstable once `‖q‖∞` exceeds this multiple of the rod
/// length.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub q: DVector<f64>,
    /// Hamiltonian, joules.
    pub energy: f64,
    /// Cumulative gradient evaluations up to this record.
    pub force_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    Unstable { step: u64, time: f64, reason: String },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Completed => f.write_str("completed"),
            Outcome::Unstable { step, time, .. } => write!(f, "unstable step={step} t={time}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimulationConfig,
    pub records: Vec<Record>,
    pub outcome: Outcome,
    /// Energy normalization for drift measures: `m|g|L + |A|L`, joules.
    pub energy_scale: f64,
    pub steps: u64,
    pub force_evals: u64,
    /// Stepping wall time, excluding assembly.
    pub wall_seconds: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Evaluate the Hamiltonian at record steps. Off, records carry NaN.
    pub record_energy: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { record_energy: true }
    }
}

fn energy_scale(config: &SimulationConfig) -> f64 {
    let p = &config.properties;
    let mass = p.linear_density() * p.length;
    let force = config.scenario.external_force.as_ref().map_or(0.0, |f| f.amplitude.abs());
    mass * config.scenario.gravity.norm() * p.length + force * p.length + f64::MIN_POSITIVE
}

/// Assembles the model for `config` and integrates it.
pub fn run_simulation(config: &SimulationConfig) -> Result<Trajectory, HarnessError> {
    config.validate()?;
    let (system, state) = DloSystem::from_config(config)?;
    run_system(config, &system, state, &RunOptions::default())
}

/// Integrates a prebuilt system from `state`. Instability ends the run early
/// and is reported in the outcome.
pub fn run_system(
    config: &SimulationConfig,
    system: &DloSystem,
    mut state: DloState,
    options: &RunOptions,
) -> Result<Trajectory, HarnessError> {
    config.validate()?;
    let mut stepper = make_stepper(&config.step, system)?;
    let tau = config.step.tau;
    let stride = config.record_stride as u64;
    let limit = BLOWUP_FACTOR * config.properties.length;
    let energy_of = |s: &DloState| -> Result<f64, HarnessError> {
        if options.record_energy {
            Ok(system.energy(s)?)
        } else {
            Ok(f64::NAN)
        }
    };

    let t0 = state.time;
    let mut records = vec![Record {
        t: t0,
        q: state.q.clone(),
        energy: energy_of(&state)?,
        force_evals: 0,
    }];
    let mut outcome = Outcome::Completed;
    let mut evals = 0u64;
    let mut steps = 0u64;
    let total = config.step_count();
    let start = Instant::now();

    for k in 1..=total {
        let (mut next, diag) = match stepper.step(&state) {
            Ok(v) => v,
            Err(StepError::Unstable { step, reason }) => {
                outcome = Outcome::Unstable {
                    step,
                    time: t0 + step as f64 * tau,
                    reason,
                };
                break;
            }
            Err(StepError::Model(e)) => return Err(e.into()),
            Err(e) => {
                return Err(HarnessError::Incomplete(e.to_string()));
            }
        };
        evals += diag.force_evals as u64;
        steps = k;
        next.time = t0 + k as f64 * tau;
        if next.q.amax() > limit {
            outcome = Outcome::Unstable {
                step: k,
                time: next.time,
                reason: format!("|q| exceeded {limit} m"),
            };
            break;
        }
        state = next;
        if k % stride == 0 {
            let energy = match energy_of(&state) {
                Ok(e) => e,
                Err(HarnessError::Model(e)) => {
                    outcome = Outcome::Unstable {
                        step: k,
                        time: state.time,
                        reason: e.to_string(),
                    };
                    break;
                }
                Err(e) => return Err(e),
            };
            records.push(Record {
                t: state.time,
                q: state.q.clone(),
                energy,
                force_evals: evals,
            });
        }
    }

    Ok(Trajectory {
        config: config.clone(),
        records,
        outcome,
        energy_scale: energy_scale(config),
        steps,
        force_evals: evals,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::IntegratorKind;
    use crate::scenario::ScenarioKind;

    fn short(kind: IntegratorKind, tau: f64, steps: u64) -> SimulationConfig {
        let mut c = SimulationConfig::reference(ScenarioKind::GravityOnly);
        c.step.kind = kind;
        c.step.tau = tau;
        c.duration = tau * steps as f64;
        c
    }

    #[test]
    fn records_every_stride() {
        let mut c = short(IntegratorKind::Symplectic4, 1e-5, 20);
        c.record_stride = 5;
        let traj = run_simulation(&c).unwrap();
        assert!(traj.outcome.is_completed());
        assert_eq!(traj.steps, 20);
        let t = traj.times();
        assert_eq!(t.len(), 5);
        for (k, tk) in t.iter().enumerate() {
            assert_eq!(*tk, k as f64 * 5.0 * 1e-5);
        }
        assert_eq!(traj.force_evals, 60);
        assert_eq!(traj.records[4].force_evals, 60);
    }

    #[test]
    fn duration_shorter_than_step() {
        let mut c = short(IntegratorKind::Rk4, 1e-3, 1);
        c.duration = 5e-4;
        let traj = run_simulation(&c).unwrap();
        assert_eq!(traj.records.len(), 1);
        assert!(traj.outcome.is_completed());
    }

    #[test]
    fn unstable_step_is_reported() {
        let mut c = short(IntegratorKind::Symplectic4, 2e-3, 500);
        c.record_stride = 10;
        let traj = run_simulation(&c).unwrap();
        match &traj.outcome {
            Outcome::Unstable { step, time, .. } => {
                assert!(*step >= 1 && *step <= 500);
                assert!((time - *step as f64 * 2e-3).abs() < 1e-12);
                assert!(traj.records.iter().all(|r| r.t < *time));
            }
            Outcome::Completed => panic!("2 ms is beyond the axial stability limit"),
        }
    }

    #[test]
    fn deterministic() {
        let c = short(IntegratorKind::Zhai, 5e-6, 200);
        let a = run_simulation(&c).unwrap();
        let b = run_simulation(&c).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn energy_scale_of_reference_rod() {
        let traj = run_simulation(&short(IntegratorKind::Rk4, 1e-5, 1)).unwrap();
        let mu = 2700.0 * std::f64::consts::PI * 1e-6;
        assert!((traj.energy_scale - mu * 2.0 * 9.81 * 2.0).abs() < 1e-12);
    }
}
