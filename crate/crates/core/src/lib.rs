//! Dynamics of deformable linear objects (cables, wires, ropes) represented
//! as cubic B-spline curves with a twist angle, integrated with explicit
//! symplectic, Runge–Kutta or Zhai steppers.
//!
//! * [`spline`]: clamped cubic basis and precomputed sample grids.
//! * [`model`]: mass operator, strains, energy, forces and the Hamiltonian.
//! * [`integrators`]: the three steppers behind one interface.
//! * [`scenario`]: boundary conditions, loads and run configuration.
//! * [`harness`]: simulation runs, diagnostics, studies and file output.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harness;
pub mod integrators;
pub mod model;
pub mod scenario;
pub mod spline;

pub use integrators::{make_stepper, IntegratorKind, StepConfig};
pub use model::{DloProperties, DloState, DloSystem};
pub use scenario::{ScenarioKind, SimulationConfig};
