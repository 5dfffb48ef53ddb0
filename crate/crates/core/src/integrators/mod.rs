//! Explicit time steppers for separable Hamiltonian systems
//! `H(q, p) = K(p) + U(q, t)`.
//!
//! Three schemes share the [`Stepper`] contract:
//!
//! * `symplectic4`: four-stage drift/kick composition with the Forest–Ruth
//!   coefficients; three gradient evaluations per step because the last kick
//!   weight is zero.
//! * `rk4`: classical Runge–Kutta on the first-order system `(q̇, ṗ)`; four
//!   gradient evaluations per step.
//! * `zhai`: two-parameter explicit predictor in displacement/velocity form
//!   reusing the previous acceleration; one gradient evaluation per step after
//!   a symplectic bootstrap step.

mod coefficients;
mod rk4;
mod symplectic;
mod zhai;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use thiserror::Error;

use crate::model::{DloState, ModelError};
use crate::scenario::ConfigError;

pub use coefficients::{fr_coefficients, SymplecticCoefficients};
pub use rk4::rk4_step;
pub use symplectic::symplectic4_step;
pub use zhai::{zhai_step, ZhaiHistory};

/// Separable Hamiltonian dynamics seen by the steppers.
pub trait SeparableSystem {
    /// Number of generalized coordinates.
    fn dof(&self) -> usize;

    /// `∂K/∂p`.
    fn velocity(&self, p: &DVector<f64>) -> DVector<f64>;

    /// Inverse of [`velocity`](Self::velocity).
    fn momentum(&self, v: &DVector<f64>) -> DVector<f64>;

    /// `∂U/∂q - F(t)`, the negative momentum rate.
    fn potential_gradient(&self, q: &DVector<f64>, t: f64) -> Result<DVector<f64>, ModelError>;

    fn hamiltonian(&self, q: &DVector<f64>, p: &DVector<f64>, t: f64) -> Result<f64, ModelError>;

    /// Re-imposes pinned coordinates after a step.
    fn constrain(&self, _q: &mut DVector<f64>, _p: &mut DVector<f64>) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegratorKind {
    Symplectic4,
    Rk4,
    Zhai,
}

impl IntegratorKind {
    pub const ALL: [IntegratorKind; 3] = [IntegratorKind::Symplectic4, IntegratorKind::Rk4, IntegratorKind::Zhai];

    pub fn name(self) -> &'static str {
        match self {
            IntegratorKind::Symplectic4 => "symplectic4",
            IntegratorKind::Rk4 => "rk4",
            IntegratorKind::Zhai => "zhai",
        }
    }

    /// Gradient evaluations per steady-state step.
    pub fn force_evals_per_step(self) -> u32 {
        match self {
            IntegratorKind::Symplectic4 => 3,
            IntegratorKind::Rk4 => 4,
            IntegratorKind::Zhai => 1,
        }
    }
}

impl FromStr for IntegratorKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symplectic4" | "symplectic" => Ok(IntegratorKind::Symplectic4),
            "rk4" | "runge-kutta" => Ok(IntegratorKind::Rk4),
            "zhai" => Ok(IntegratorKind::Zhai),
            _ => Err(ConfigError::UnknownIntegrator(s.to_string())),
        }
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_TAU: f64 = 2e-3;
pub const DEFAULT_ZHAI_PSI: f64 = 0.5;
pub const DEFAULT_ZHAI_PHI: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub tau: f64,
    pub kind: IntegratorKind,
    pub zhai_psi: f64,
    pub zhai_phi: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            kind: IntegratorKind::Symplectic4,
            zhai_psi: DEFAULT_ZHAI_PSI,
            zhai_phi: DEFAULT_ZHAI_PHI,
        }
    }
}

impl StepConfig {
    pub fn new(kind: IntegratorKind, tau: f64) -> Self {
        Self {
            tau,
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(ConfigError::Invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !self.zhai_psi.is_finite() || !self.zhai_phi.is_finite() {
            return Err(ConfigError::Invalid("zhai parameters must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub force_evals: u32,
    /// Hamiltonian after the step, when energy tracking is on.
    pub energy: Option<f64>,
    pub wall_nanos: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("non-finite state")]
    NonFinite,
    /// `step` counts from 1: the state at `step · τ` was rejected.
    #[error("unstable at step {step}: {reason}")]
    Unstable { step: u64, reason: String },
    #[error("zhai step needs the previous acceleration; bootstrap first")]
    BootstrapRequired,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Gradient evaluation with a call counter.
pub(crate) fn counted_gradient<S: SeparableSystem + ?Sized>(
    system: &S,
    q: &DVector<f64>,
    t: f64,
    evals: &mut u32,
) -> Result<DVector<f64>, StepError> {
    *evals += 1;
    Ok(system.potential_gradient(q, t)?)
}

pub(crate) fn ensure_finite(state: &DloState) -> Result<(), StepError> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(StepError::NonFinite)
    }
}

/// Uniform stepping interface over the three schemes.
pub struct Stepper<'a, S: SeparableSystem + ?Sized> {
    config: StepConfig,
    coefficients: SymplecticCoefficients,
    system: &'a S,
    history: Option<ZhaiHistory>,
    steps_taken: u64,
    track_energy: bool,
}

impl<'a, S: SeparableSystem + ?Sized> Stepper<'a, S> {
    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn track_energy(&mut self, on: bool) {
        self.track_energy = on;
    }

    /// Forgets the Zhai acceleration history; the next step bootstraps again.
    pub fn reset(&mut self) {
        self.history = None;
        self.steps_taken = 0;
    }

    pub fn step(&mut self, state: &DloState) -> Result<(DloState, StepDiagnostics), StepError> {
        let start = Instant::now();
        let mut evals = 0u32;
        let result = match self.config.kind {
            IntegratorKind::Symplectic4 => {
                symplectic4_step(state, &self.config, &self.coefficients, self.system, &mut evals)
            }
            IntegratorKind::Rk4 => rk4_step(state, &self.config, self.system, &mut evals),
            IntegratorKind::Zhai => {
                if self.history.is_none() {
                    let accel = zhai::acceleration(self.system, &state.q, state.time, &mut evals)?;
                    let next = symplectic4_step(state, &self.config, &self.coefficients, self.system, &mut evals);
                    self.history = Some(ZhaiHistory { previous_accel: accel });
                    next
                } else {
                    zhai_step(state, self.history.as_mut(), &self.config, self.system, &mut evals)
                }
            }
        };
        let step = self.steps_taken + 1;
        let next = result.map_err(|e| match e {
            StepError::NonFinite => StepError::Unstable {
                step,
                reason: "non-finite state".into(),
            },
            StepError::Model(m) => StepError::Unstable {
                step,
                reason: m.to_string(),
            },
            other => other,
        })?;
        self.steps_taken += 1;
        let energy = if self.track_energy {
            Some(self.system.hamiltonian(&next.q, &next.p, next.time)?)
        } else {
            None
        };
        Ok((
            next,
            StepDiagnostics {
                force_evals: evals,
                energy,
                wall_nanos: start.elapsed().as_nanos() as u64,
            },
        ))
    }
}

pub fn make_stepper<'a, S: SeparableSystem + ?Sized>(
    config: &StepConfig,
    system: &'a S,
) -> Result<Stepper<'a, S>, ConfigError> {
    config.validate()?;
    Ok(Stepper {
        config: *config,
        coefficients: fr_coefficients(),
        system,
        history: None,
        steps_taken: 0,
        track_energy: false,
    })
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Unit-mass harmonic oscillators `H = Σ (p² + ω² q²)/2`.
    pub struct Oscillator {
        pub omega2: Vec<f64>,
    }

    impl Oscillator {
        pub fn unit() -> Self {
            Self { omega2: vec![1.0] }
        }
    }

    impl SeparableSystem for Oscillator {
        fn dof(&self) -> usize {
            self.omega2.len()
        }
        fn velocity(&self, p: &DVector<f64>) -> DVector<f64> {
            p.clone()
        }
        fn momentum(&self, v: &DVector<f64>) -> DVector<f64> {
            v.clone()
        }
        fn potential_gradient(&self, q: &DVector<f64>, _t: f64) -> Result<DVector<f64>, ModelError> {
            Ok(DVector::from_fn(q.len(), |i, _| self.omega2[i] * q[i]))
        }
        fn hamiltonian(&self, q: &DVector<f64>, p: &DVector<f64>, _t: f64) -> Result<f64, ModelError> {
            Ok((0..q.len()).map(|i| 0.5 * (p[i] * p[i] + self.omega2[i] * q[i] * q[i])).sum())
        }
    }

    /// No potential at all.
    pub struct FreeFlight {
        pub masses: Vec<f64>,
    }

    impl SeparableSystem for FreeFlight {
        fn dof(&self) -> usize {
            self.masses.len()
        }
        fn velocity(&self, p: &DVector<f64>) -> DVector<f64> {
            DVector::from_fn(p.len(), |i, _| p[i] / self.masses[i])
        }
        fn momentum(&self, v: &DVector<f64>) -> DVector<f64> {
            DVector::from_fn(v.len(), |i, _| v[i] * self.masses[i])
        }
        fn potential_gradient(&self, q: &DVector<f64>, _t: f64) -> Result<DVector<f64>, ModelError> {
            Ok(DVector::zeros(q.len()))
        }
        fn hamiltonian(&self, _q: &DVector<f64>, p: &DVector<f64>, _t: f64) -> Result<f64, ModelError> {
            Ok((0..p.len()).map(|i| 0.5 * p[i] * p[i] / self.masses[i]).sum())
        }
    }

    pub fn state(q: f64, p: f64) -> DloState {
        DloState {
            time: 0.0,
            q: DVector::from_element(1, q),
            p: DVector::from_element(1, p),
        }
    }

    /// Global phase-space error at t = 1 against the exact rotation.
    pub fn global_error(kind: IntegratorKind, tau: f64) -> f64 {
        let sys = Oscillator::unit();
        let mut stepper = make_stepper(&StepConfig::new(kind, tau), &sys).unwrap();
        let mut s = state(1.0, 0.0);
        let n = (1.0 / tau).round() as usize;
        for _ in 0..n {
            s = stepper.step(&s).unwrap().0;
        }
        let t = n as f64 * tau;
        ((s.q[0] - t.cos()).powi(2) + (s.p[0] + t.sin()).powi(2)).sqrt()
    }

    pub fn convergence_order(kind: IntegratorKind, taus: [f64; 3]) -> (f64, f64) {
        let e = taus.map(|t| global_error(kind, t));
        (
            (e[0] / e[1]).ln() / (taus[0] / taus[1]).ln(),
            (e[1] / e[2]).ln() / (taus[1] / taus[2]).ln(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn force_eval_counts() {
        let sys = Oscillator::unit();
        for (kind, first, steady) in [
            (IntegratorKind::Symplectic4, 3, 3),
            (IntegratorKind::Rk4, 4, 4),
            (IntegratorKind::Zhai, 4, 1),
        ] {
            let mut stepper = make_stepper(&StepConfig::new(kind, 0.01), &sys).unwrap();
            let mut s = state(1.0, 0.0);
            for n in 0..20 {
                let (next, diag) = stepper.step(&s).unwrap();
                let expect = if n == 0 { first } else { steady };
                assert_eq!(diag.force_evals, expect, "{kind} step {n}");
                s = next;
            }
        }
    }

    #[test]
    fn free_flight_is_exact() {
        let sys = FreeFlight {
            masses: vec![2.0, 0.5, 1.0],
        };
        let q0 = DVector::from_vec(vec![0.1, -0.2, 0.3]);
        let p0 = DVector::from_vec(vec![1.0, 0.25, -2.0]);
        for kind in IntegratorKind::ALL {
            let mut stepper = make_stepper(&StepConfig::new(kind, 0.1), &sys).unwrap();
            let mut s = DloState {
                time: 0.0,
                q: q0.clone(),
                p: p0.clone(),
            };
            for _ in 0..10 {
                s = stepper.step(&s).unwrap().0;
            }
            let expect = &q0 + sys.velocity(&p0) * 1.0;
            assert!((&s.q - &expect).amax() < 1e-13, "{kind}");
            assert!((&s.p - &p0).amax() < 1e-13, "{kind}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        let sys = Oscillator::unit();
        assert!(make_stepper(&StepConfig::new(IntegratorKind::Rk4, 0.0), &sys).is_err());
        assert!(make_stepper(&StepConfig::new(IntegratorKind::Rk4, -1.0), &sys).is_err());
        assert!(matches!("leapfrog".parse::<IntegratorKind>(), Err(ConfigError::UnknownIntegrator(_))));
        assert_eq!("RK4".parse::<IntegratorKind>().unwrap(), IntegratorKind::Rk4);
    }

    #[test]
    fn convergence_orders() {
        for kind in [IntegratorKind::Symplectic4, IntegratorKind::Rk4] {
            let (a, b) = convergence_order(kind, [0.1, 0.05, 0.025]);
            assert!((a - 4.0).abs() < 0.2 && (b - 4.0).abs() < 0.2, "{kind}: {a} {b}");
        }
        let (a, b) = convergence_order(IntegratorKind::Zhai, [0.01, 0.005, 0.0025]);
        assert!((a - 2.0).abs() < 0.2 && (b - 2.0).abs() < 0.2, "zhai: {a} {b}");
    }

    #[test]
    fn energy_tracking() {
        let sys = Oscillator::unit();
        let mut stepper = make_stepper(&StepConfig::new(IntegratorKind::Symplectic4, 0.1), &sys).unwrap();
        let (_, d) = stepper.step(&state(1.0, 0.0)).unwrap();
        assert!(d.energy.is_none());
        stepper.track_energy(true);
        let (_, d) = stepper.step(&state(1.0, 0.0)).unwrap();
        assert!((d.energy.unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn nan_becomes_instability() {
        let sys = Oscillator::unit();
        let mut stepper = make_stepper(&StepConfig::new(IntegratorKind::Rk4, 0.1), &sys).unwrap();
        let s = state(f64::NAN, 0.0);
        assert!(matches!(stepper.step(&s), Err(StepError::Unstable { step: 1, .. })));
    }
}
