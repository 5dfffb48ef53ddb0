use nalgebra::DVector;

use super::{counted_gradient, ensure_finite, SeparableSystem, StepConfig, StepError};
use crate::model::DloState;

/// Classical Runge–Kutta on `q̇ = ∂K/∂p`, `ṗ = -∂U/∂q`.
pub fn rk4_step<S: SeparableSystem + ?Sized>(
    state: &DloState,
    config: &StepConfig,
    system: &S,
    evals: &mut u32,
) -> Result<DloState, StepError> {
    let tau = config.tau;
    let t = state.time;
    let rate = |q: &DVector<f64>, p: &DVector<f64>, t: f64, evals: &mut u32| {
        let g = counted_gradient(system, q, t, evals)?;
        Ok::<_, StepError>((system.velocity(p), -g))
    };
    let (q0, p0) = (&state.q, &state.p);

    let (k1q, k1p) = rate(q0, p0, t, evals)?;
    let (k2q, k2p) = rate(&(q0 + &k1q * (0.5 * tau)), &(p0 + &k1p * (0.5 * tau)), t + 0.5 * tau, evals)?;
    let (k3q, k3p) = rate(&(q0 + &k2q * (0.5 * tau)), &(p0 + &k2p * (0.5 * tau)), t + 0.5 * tau, evals)?;
    let (k4q, k4p) = rate(&(q0 + &k3q * tau), &(p0 + &k3p * tau), t + tau, evals)?;

    let w = tau / 6.0;
    let mut q = q0 + (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * w;
    let mut p = p0 + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * w;
    system.constrain(&mut q, &mut p);
    let next = DloState { time: t + tau, q, p };
    ensure_finite(&next)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::super::{make_stepper, IntegratorKind, StepConfig};
    use approx::assert_relative_eq;

    #[test]
    fn one_step_reference_values() {
        let sys = Oscillator::unit();
        let mut stepper = make_stepper(&StepConfig::new(IntegratorKind::Rk4, 0.1), &sys).unwrap();
        let (s, _) = stepper.step(&state(1.0, 0.0)).unwrap();
        assert_relative_eq!(s.q[0], 0.995_004_166_666_666_7, epsilon = 1e-15);
        assert_relative_eq!(s.p[0], -0.099_833_333_333_333_33, epsilon = 1e-15);
        assert_relative_eq!(s.time, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn dissipates_monotonically() {
        let sys = Oscillator::unit();
        let mut stepper = make_stepper(&StepConfig::new(IntegratorKind::Rk4, 0.1), &sys).unwrap();
        let mut s = state(1.0, 0.0);
        let mut last = 0.5;
        for _ in 0..100_000 {
            s = stepper.step(&s).unwrap().0;
            let h = 0.5 * (s.q[0] * s.q[0] + s.p[0] * s.p[0]);
            assert!(h < last);
            last = h;
        }
        assert!(last < 0.5 * (1.0 - 1e-3), "{last}");
    }
}
