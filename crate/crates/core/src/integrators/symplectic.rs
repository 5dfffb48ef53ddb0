use super::{counted_gradient, ensure_finite, SeparableSystem, StepConfig, StepError, SymplecticCoefficients};
use crate::model::DloState;

/// One drift/kick composition step. Each kick samples the force at the time
/// reached by the preceding drifts; zero-weight kicks are skipped.
pub fn symplectic4_step<S: SeparableSystem + ?Sized>(
    state: &DloState,
    config: &StepConfig,
    coefficients: &SymplecticCoefficients,
    system: &S,
    evals: &mut u32,
) -> Result<DloState, StepError> {
    let tau = config.tau;
    let mut q = state.q.clone();
    let mut p = state.p.clone();
    let mut elapsed = 0.0;
    for (c, d) in coefficients.c.iter().zip(&coefficients.d) {
        q.axpy(c * tau, &system.velocity(&p), 1.0);
        elapsed += c;
        if *d != 0.0 {
            let g = counted_gradient(system, &q, state.time + elapsed * tau, evals)?;
            p.axpy(-d * tau, &g, 1.0);
        }
    }
    system.constrain(&mut q, &mut p);
    let next = DloState {
        time: state.time + tau,
        q,
        p,
    };
    ensure_finite(&next)?;
    Ok(next)
}
