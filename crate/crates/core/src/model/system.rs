use nalgebra::DVector;

use super::{grad_potential, mass_matrix, potential_energy, DloProperties, DloState, MassOperator, ModelError};
use crate::integrators::SeparableSystem;
use crate::scenario::{initial_state, Scenario, SimulationConfig};
use crate::spline::{build_basis, build_sample_grid, SampleGrid};

/// `½ pᵀM⁻¹p + U(q)` with the frozen mass operator.
pub fn hamiltonian(
    mass: &MassOperator,
    grid: &SampleGrid,
    props: &DloProperties,
    state: &DloState,
    scenario: &Scenario,
) -> Result<f64, ModelError> {
    let u = potential_energy(grid, props, &state.q, scenario)?;
    Ok(mass.kinetic_energy(&state.p) + u.total())
}

/// A rod model bound to one scenario: grid, frozen constrained mass and the
/// pinned coordinates.
#[derive(Debug, Clone)]
pub struct DloSystem {
    grid: SampleGrid,
    props: DloProperties,
    scenario: Scenario,
    mass: MassOperator,
    fixed: Vec<bool>,
    pinned_q: DVector<f64>,
}

impl DloSystem {
    /// Assembles the system around `reference`, which also supplies the
    /// values of the pinned coordinates.
    pub fn new(
        grid: SampleGrid,
        props: DloProperties,
        scenario: Scenario,
        reference: &DVector<f64>,
    ) -> Result<Self, ModelError> {
        props.validate()?;
        let fixed = scenario.fixed_mask(grid.n_u());
        let mass = mass_matrix(&grid, &props, reference)?.with_fixed_dofs(&fixed)?;
        Ok(Self {
            grid,
            props,
            scenario,
            mass,
            fixed,
            pinned_q: reference.clone(),
        })
    }

    /// Builds the system and its straight initial state from a config.
    pub fn from_config(config: &SimulationConfig) -> Result<(Self, DloState), ModelError> {
        let basis = build_basis(config.n_u, config.properties.length)?;
        let grid = build_sample_grid(&basis, config.n_s)?;
        let state = initial_state(&basis);
        let system = Self::new(grid, config.properties.clone(), config.scenario.clone(), &state.q)?;
        Ok((system, state))
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn properties(&self) -> &DloProperties {
        &self.props
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn mass(&self) -> &MassOperator {
        &self.mass
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn energy(&self, state: &DloState) -> Result<f64, ModelError> {
        hamiltonian(&self.mass, &self.grid, &self.props, state, &self.scenario)
    }
}

impl SeparableSystem for DloSystem {
    fn dof(&self) -> usize {
        self.mass.dof()
    }

    fn velocity(&self, p: &DVector<f64>) -> DVector<f64> {
        self.mass.to_velocities(p)
    }

    fn momentum(&self, v: &DVector<f64>) -> DVector<f64> {
        self.mass.to_momenta(v)
    }

    /// Pinned entries are zeroed so the kicks never move their momenta.
    fn potential_gradient(&self, q: &DVector<f64>, t: f64) -> Result<DVector<f64>, ModelError> {
        let mut g = grad_potential(&self.grid, &self.props, q, &self.scenario, t)?;
        for (d, _) in self.fixed.iter().enumerate().filter(|(_, f)| **f) {
            g[d] = 0.0;
        }
        Ok(g)
    }

    fn hamiltonian(&self, q: &DVector<f64>, p: &DVector<f64>, _t: f64) -> Result<f64, ModelError> {
        let u = potential_energy(&self.grid, &self.props, q, &self.scenario)?;
        Ok(self.mass.kinetic_energy(p) + u.total())
    }

    fn constrain(&self, q: &mut DVector<f64>, p: &mut DVector<f64>) {
        for (d, _) in self.fixed.iter().enumerate().filter(|(_, f)| **f) {
            q[d] = self.pinned_q[d];
            p[d] = 0.0;
        }
    }
}
