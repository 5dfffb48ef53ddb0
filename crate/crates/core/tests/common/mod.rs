//! Oracles shared by the integration tests. Nothing here calls into the code
//! under test except to obtain the function being checked.
#![allow(dead_code)]

use dlo_core::integrators::SeparableSystem;
use dlo_core::model::{DloState, ModelError};
use nalgebra::DVector;
use rand::Rng;

/// Unit harmonic oscillator `H = (p² + q²)/2`.
pub struct Oscillator;

impl SeparableSystem for Oscillator {
    fn dof(&self) -> usize {
        1
    }
    fn velocity(&self, p: &DVector<f64>) -> DVector<f64> {
        p.clone()
    }
    fn momentum(&self, v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }
    fn potential_gradient(&self, q: &DVector<f64>, _t: f64) -> Result<DVector<f64>, ModelError> {
        Ok(q.clone())
    }
    fn hamiltonian(&self, q: &DVector<f64>, p: &DVector<f64>, _t: f64) -> Result<f64, ModelError> {
        Ok(0.5 * (q[0] * q[0] + p[0] * p[0]))
    }
}

pub fn oscillator_state(q: f64, p: f64) -> DloState {
    DloState {
        time: 0.0,
        q: DVector::from_element(1, q),
        p: DVector::from_element(1, p),
    }
}

/// Phase-space distance from the exact solution `(cos t, -sin t)`.
pub fn exact_rotation_error(state: &DloState) -> f64 {
    let t = state.time;
    ((state.q[0] - t.cos()).powi(2) + (state.p[0] + t.sin()).powi(2)).sqrt()
}

/// Sixth-order central differences, step `1e-5 · max(1, |x_i|)`.
pub fn fd_gradient(x: &DVector<f64>, f: impl Fn(&DVector<f64>) -> f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| {
        let h = 1e-5 * x[i].abs().max(1.0);
        let at = |k: f64| {
            let mut y = x.clone();
            y[i] += k * h;
            f(&y)
        };
        (45.0 * (at(1.0) - at(-1.0)) - 9.0 * (at(2.0) - at(-2.0)) + (at(3.0) - at(-3.0))) / (60.0 * h)
    })
}

/// Largest per-component relative error, denominators floored at
/// `1e-8 · ‖expected‖∞`.
pub fn worst_relative(actual: &DVector<f64>, expected: &DVector<f64>) -> f64 {
    let floor = 1e-8 * expected.amax();
    actual
        .iter()
        .zip(expected.iter())
        .map(|(a, e)| (a - e).abs() / e.abs().max(floor))
        .fold(0.0, f64::max)
}

/// Random smooth-ish perturbation of a component-major configuration:
/// lateral and twist amplitude `amp`, axial `amp / 5`.
pub fn perturb(q: &DVector<f64>, rng: &mut impl Rng, amp: f64) -> DVector<f64> {
    let n_u = q.len() / 4;
    let mut out = q.clone();
    for i in 0..n_u {
        out[i] += 0.2 * amp * rng.random_range(-1.0..1.0);
        for c in 1..4 {
            out[c * n_u + i] += amp * rng.random_range(-1.0..1.0);
        }
    }
    out
}

/// Least-squares slope of `ln e` against `ln τ`.
pub fn log_slope(taus: &[f64], errors: &[f64]) -> f64 {
    let x: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
