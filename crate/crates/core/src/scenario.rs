//! Boundary conditions, loads and run configuration for the two reference
//! scenarios: free sag under gravity, and gravity plus a sinusoidal lateral
//! force at the rod center.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Vector3};
use thiserror::Error;

use crate::integrators::StepConfig;
use crate::model::{DloProperties, DloState};
use crate::spline::{SplineBasis, SplineError};

pub const STANDARD_GRAVITY: f64 = 9.81;
/// Axial anchor stiffness of the endpoint springs, N/m.
pub const ENDPOINT_SPRING_KX: f64 = 10_000.0;
pub const DEFAULT_FORCE_AMPLITUDE: f64 = 1.0;
pub const DEFAULT_FORCE_FREQUENCY: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown scenario kind `{0}` (expected gravity_only or sinusoidal_center)")]
    UnknownScenario(String),
    #[error("unknown integrator `{0}` (expected symplectic4, rk4 or zhai)")]
    UnknownIntegrator(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Generalized coordinate carried by each control point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    X,
    Y,
    Z,
    Theta,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::X, Component::Y, Component::Z, Component::Theta];

    pub fn index(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
            Component::Z => 2,
            Component::Theta => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
            Component::Theta => "theta",
        }
    }
}

/// Control point reference that can be resolved before `n_u` is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointRef {
    First,
    Last,
    Index(usize),
}

impl PointRef {
    pub fn resolve(self, n_u: usize) -> usize {
        match self {
            PointRef::First => 0,
            PointRef::Last => n_u - 1,
            PointRef::Index(i) => i,
        }
    }
}

/// Sinusoidal point load `A·sin(2πft)·direction` applied at `apply_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSchedule {
    pub amplitude: f64,
    pub frequency: f64,
    pub direction: Vector3<f64>,
    pub apply_u: f64,
}

impl ForceSchedule {
    pub fn magnitude_at(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    GravityOnly,
    SinusoidalCenter,
}

impl FromStr for ScenarioKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gravity_only" => Ok(ScenarioKind::GravityOnly),
            "sinusoidal_center" => Ok(ScenarioKind::SinusoidalCenter),
            other => Err(ConfigError::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::GravityOnly => "gravity_only",
            ScenarioKind::SinusoidalCenter => "sinusoidal_center",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub gravity: Vector3<f64>,
    pub spring_kx: f64,
    pub fixed_dofs: Vec<(PointRef, Component)>,
    pub external_force: Option<ForceSchedule>,
}

impl Scenario {
    pub fn validate(&self, length: f64) -> Result<(), ConfigError> {
        if !(self.spring_kx >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "spring_kx must be >= 0, got {}",
                self.spring_kx
            )));
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return Err(ConfigError::Invalid("gravity must be finite".into()));
        }
        if let Some(f) = &self.external_force {
            if !(f.frequency > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "force frequency must be > 0, got {}",
                    f.frequency
                )));
            }
            if !(0.0..=length).contains(&f.apply_u) {
                return Err(ConfigError::Invalid(format!(
                    "force apply_u = {} outside [0, {length}]",
                    f.apply_u
                )));
            }
            if !f.amplitude.is_finite() || !(f.direction.norm() > 0.0) {
                return Err(ConfigError::Invalid(
                    "force amplitude must be finite and direction nonzero".into(),
                ));
            }
        }
        Ok(())
    }

    /// Per-DOF mask of pinned coordinates, in component-major DOF order.
    pub fn fixed_mask(&self, n_u: usize) -> Vec<bool> {
        let mut mask = vec![false; 4 * n_u];
        for (point, comp) in &self.fixed_dofs {
            mask[comp.index() * n_u + point.resolve(n_u)] = true;
        }
        mask
    }
}

/// Optional replacements for the scenario defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub gravity: Option<Vector3<f64>>,
    pub spring_kx: Option<f64>,
    pub force_amplitude: Option<f64>,
    pub force_frequency: Option<f64>,
    pub force_direction: Option<Vector3<f64>>,
    pub force_apply_u: Option<f64>,
}

fn endpoint_lateral_constraints() -> Vec<(PointRef, Component)> {
    let mut dofs = Vec::with_capacity(6);
    for point in [PointRef::First, PointRef::Last] {
        for comp in [Component::Y, Component::Z, Component::Theta] {
            dofs.push((point, comp));
        }
    }
    dofs
}

/// Builds one of the two reference scenarios for a rod of the given length.
pub fn build_scenario(
    kind: ScenarioKind,
    length: f64,
    overrides: &ScenarioOverrides,
) -> Result<Scenario, ConfigError> {
    let external_force = match kind {
        ScenarioKind::GravityOnly => None,
        ScenarioKind::SinusoidalCenter => {
            let direction = overrides.force_direction.unwrap_or_else(Vector3::y);
            Some(ForceSchedule {
                amplitude: overrides.force_amplitude.unwrap_or(DEFAULT_FORCE_AMPLITUDE),
                frequency: overrides.force_frequency.unwrap_or(DEFAULT_FORCE_FREQUENCY),
                direction: direction.try_normalize(0.0).ok_or_else(|| {
                    ConfigError::Invalid("force direction must be nonzero".into())
                })?,
                apply_u: overrides.force_apply_u.unwrap_or(0.5 * length),
            })
        }
    };
    let scenario = Scenario {
        kind,
        gravity: overrides
            .gravity
            .unwrap_or_else(|| Vector3::new(0.0, 0.0, -STANDARD_GRAVITY)),
        spring_kx: overrides.spring_kx.unwrap_or(ENDPOINT_SPRING_KX),
        fixed_dofs: endpoint_lateral_constraints(),
        external_force,
    };
    scenario.validate(length)?;
    Ok(scenario)
}

/// Generalized external force `F(t)` in component-major DOF order. Gravity is
/// not included; it enters through the potential.
pub fn external_force_at(scenario: &Scenario, basis: &SplineBasis, t: f64) -> DVector<f64> {
    let n_u = basis.n_u();
    let mut out = DVector::zeros(4 * n_u);
    if let Some(force) = &scenario.external_force {
        let weights = basis
            .eval(force.apply_u, 0)
            .expect("apply_u validated against the rod length");
        let f = force.direction * force.magnitude_at(t);
        for (i, w) in weights.iter().enumerate() {
            for c in 0..3 {
                out[c * n_u + i] = w * f[c];
            }
        }
    }
    out
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_u: usize,
    pub n_s: usize,
    pub duration: f64,
    pub step: StepConfig,
    pub properties: DloProperties,
    pub scenario: Scenario,
    pub record_stride: usize,
}

impl SimulationConfig {
    /// Reference setup: 9 control points, 101 samples, 2 ms steps for 10 s.
    pub fn reference(kind: ScenarioKind) -> Self {
        let properties = DloProperties::default();
        let scenario = build_scenario(kind, properties.length, &ScenarioOverrides::default())
            .expect("default scenario is valid");
        Self {
            n_u: 9,
            n_s: 101,
            duration: 10.0,
            step: StepConfig::default(),
            properties,
            scenario,
            record_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_u < 4 {
            return Err(ConfigError::Invalid(format!("n_u = {} < 4", self.n_u)));
        }
        if self.n_s < 2 {
            return Err(ConfigError::Invalid(format!("n_s = {} < 2", self.n_s)));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.record_stride < 1 {
            return Err(ConfigError::Invalid("record_stride must be >= 1".into()));
        }
        self.step.validate()?;
        self.properties
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.scenario.validate(self.properties.length)
    }

    /// Number of whole steps that fit in the duration.
    pub fn step_count(&self) -> u64 {
        ((self.duration / self.step.tau) * (1.0 + 1e-12)).floor() as u64
    }
}

/// Straight rod along x: control x at the Greville abscissae, so the curve
/// is exactly `x(u) = u`; everything else and all momenta are zero.
pub fn initial_state(basis: &SplineBasis) -> DloState {
    let n_u = basis.n_u();
    let mut q = DVector::zeros(4 * n_u);
    for (i, g) in basis.greville().into_iter().enumerate() {
        q[i] = g;
    }
    DloState {
        time: 0.0,
        p: DVector::zeros(4 * n_u),
        q,
    }
}
