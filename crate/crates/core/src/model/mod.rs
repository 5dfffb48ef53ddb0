//! Spline-discretized rod dynamics: mass operator, strain measures, strain
//! and gravitational energy, their gradients, and the separable Hamiltonian.
//!
//! Generalized coordinates are stored component-major: DOF `c * n_u + i` is
//! component `c` (x, y, z, θ) of control point `i`. This is the column-major
//! layout of an `n_u × 4` control array, so a coordinate vector can be viewed
//! as the control array without copying.

mod energy;
mod mass;
mod strain;
mod system;

use nalgebra::{DMatrixView, DVector, Matrix3, Vector3};
use thiserror::Error;

use crate::spline::SplineError;

pub use energy::{elastic_forces, grad_potential, potential_energy, strain_energy, EnergyBreakdown};
pub use mass::{mass_matrix, MassOperator};
pub use strain::{compute_strains, StrainSample, DEGENERACY_THRESHOLD};
pub use system::{hamiltonian, DloSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid properties: {0}")]
    InvalidProperties(String),
    #[error("mass matrix assembly failed: {0}")]
    Assembly(String),
    #[error("degenerate curve: |r'| = 0 at u = {u}")]
    DegenerateCurve { u: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Rod geometry and material.
#[derive(Debug, Clone, PartialEq)]
pub struct DloProperties {
    pub length: f64,
    pub diameter: f64,
    pub young: f64,
    pub shear: f64,
    pub density: f64,
    /// Rest strain per sample point. Empty means zero everywhere.
    pub plastic_strain: Vec<Vector3<f64>>,
}

impl Default for DloProperties {
    /// Aluminum wire, 2 m long with a 2 mm cross section.
    fn default() -> Self {
        Self {
            length: 2.0,
            diameter: 2e-3,
            young: 69e9,
            shear: 26e9,
            density: 2700.0,
            plastic_strain: Vec::new(),
        }
    }
}

impl DloProperties {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("length", self.length),
            ("diameter", self.diameter),
            ("young", self.young),
            ("shear", self.shear),
            ("density", self.density),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidProperties(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn cross_section_area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    /// Mass per unit length μ = ρπD²/4, kg/m.
    pub fn linear_density(&self) -> f64 {
        self.density * self.cross_section_area()
    }

    /// Polar inertia per unit length I = μD²/8, kg·m.
    pub fn polar_inertia(&self) -> f64 {
        self.linear_density() * self.diameter * self.diameter / 8.0
    }

    /// Generalized density diagonal (μ, μ, μ, I).
    pub fn density_diagonal(&self) -> [f64; 4] {
        let mu = self.linear_density();
        [mu, mu, mu, self.polar_inertia()]
    }

    /// Diagonal stretch, torsion and bending stiffness.
    pub fn stiffness(&self) -> Matrix3<f64> {
        stiffness_matrix(self)
    }

    pub(crate) fn rest_strain(&self, k: usize) -> Vector3<f64> {
        self.plastic_strain.get(k).copied().unwrap_or_else(Vector3::zeros)
    }
}

/// `(πD²/4)·diag(E, G·D²/8, E·D²/16)`.
pub fn stiffness_matrix(props: &DloProperties) -> Matrix3<f64> {
    let a = props.cross_section_area();
    let d2 = props.diameter * props.diameter;
    Matrix3::from_diagonal(&Vector3::new(
        a * props.young,
        a * props.shear * d2 / 8.0,
        a * props.young * d2 / 16.0,
    ))
}

/// Canonical coordinates at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DloState {
    pub time: f64,
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

impl DloState {
    pub fn n_u(&self) -> usize {
        self.q.len() / 4
    }

    /// The configuration as an `n_u × 4` control array.
    pub fn ctrl(&self) -> DMatrixView<'_, f64> {
        ctrl_view(&self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }
}

/// Views a component-major coordinate vector as an `n_u × 4` array.
pub fn ctrl_view(q: &DVector<f64>) -> DMatrixView<'_, f64> {
    DMatrixView::from_slice(q.as_slice(), q.len() / 4, 4)
}
