use nalgebra::DVector;

use super::{counted_gradient, ensure_finite, SeparableSystem, StepConfig, StepError};
use crate::model::DloState;

/// Acceleration from the previous step.
#[derive(Debug, Clone, PartialEq)]
pub struct ZhaiHistory {
    pub previous_accel: DVector<f64>,
}

pub(crate) fn acceleration<S: SeparableSystem + ?Sized>(
    system: &S,
    q: &DVector<f64>,
    t: f64,
    evals: &mut u32,
) -> Result<DVector<f64>, StepError> {
    let g = counted_gradient(system, q, t, evals)?;
    Ok(-system.velocity(&g))
}

/// Explicit two-parameter step
///
/// ```text
/// q⁺ = q + τv + (½ + ψ)τ²a - ψτ²a⁻
/// v⁺ = v + (1 + φ)τa - φτa⁻
/// ```
///
/// with `a` evaluated at the current state and `a⁻` taken from `history`,
/// which is updated in place.
pub fn zhai_step<S: SeparableSystem + ?Sized>(
    state: &DloState,
    history: Option<&mut ZhaiHistory>,
    config: &StepConfig,
    system: &S,
    evals: &mut u32,
) -> Result<DloState, StepError> {
    let history = history.ok_or(StepError::BootstrapRequired)?;
    let (tau, psi, phi) = (config.tau, config.zhai_psi, config.zhai_phi);
    let a = acceleration(system, &state.q, state.time, evals)?;
    let a_prev = &history.previous_accel;
    let v = system.velocity(&state.p);

    let mut q = &state.q + &v * tau + &a * ((0.5 + psi) * tau * tau) - a_prev * (psi * tau * tau);
    let v_next = v + &a * ((1.0 + phi) * tau) - a_prev * (phi * tau);
    let mut p = system.momentum(&v_next);
    system.constrain(&mut q, &mut p);
    history.previous_accel = a;

    let next = DloState {
        time: state.time + tau,
        q,
        p,
    };
    ensure_finite(&next)?;
    Ok(next)
}
