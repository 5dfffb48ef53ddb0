use nalgebra::{DVector, Vector3};

use super::strain::{local_strain, SampledCurve};
use super::{DloProperties, ModelError};
use crate::scenario::{external_force_at, Scenario};
use crate::spline::SampleGrid;

/// Potential energy split by source, joules.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub strain: f64,
    pub gravity: f64,
    pub springs: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.strain + self.gravity + self.springs
    }
}

/// Per-sample partial derivatives of the energy density, already multiplied
/// by the quadrature weight: `by_sample[k][j][c]` is `∂e_k/∂q_c^(j)(u_k)`.
struct DensityGradient {
    by_sample: Vec<[[f64; 4]; 4]>,
}

impl DensityGradient {
    fn new(n_s: usize) -> Self {
        Self {
            by_sample: vec![[[0.0; 4]; 4]; n_s],
        }
    }

    fn add(&mut self, order: usize, k: usize, v: &Vector3<f64>) {
        for c in 0..3 {
            self.by_sample[k][order][c] += v[c];
        }
    }

    /// Chain rule through the basis, `Σ_j B_jᵀ G_j`, using the nonzero
    /// entries of each grid row.
    fn into_dofs(self, grid: &SampleGrid) -> DVector<f64> {
        let n_u = grid.n_u();
        let mut out = DVector::zeros(4 * n_u);
        let dst = out.as_mut_slice();
        for (k, g) in self.by_sample.iter().enumerate() {
            let row = grid.row(k);
            for c in 0..4 {
                let start = c * n_u + row.first;
                let acc: &mut [f64; 4] = (&mut dst[start..start + 4]).try_into().expect("four nonzeros per row");
                for (j, gj) in g.iter().enumerate() {
                    let v = gj[c];
                    if v != 0.0 {
                        for (a, w) in acc.iter_mut().zip(&row.ders[j]) {
                            *a += w * v;
                        }
                    }
                }
            }
        }
        out
    }
}

fn strain_terms(
    grid: &SampleGrid,
    props: &DloProperties,
    curve: &SampledCurve,
    mut grad: Option<&mut DensityGradient>,
) -> Result<f64, ModelError> {
    let h = props.stiffness().diagonal();
    let weights = grid.weights();
    let mut energy = 0.0;
    for (k, &u) in grid.u_values().iter().enumerate() {
        let kin = curve.at(k);
        let local = local_strain(&kin, u, grad.is_some())?;
        let residual = local.sample.vector() - props.rest_strain(k);
        let h_res = h.component_mul(&residual);
        let density = 0.5 * residual.dot(&h_res);
        energy += weights[k] * density * local.speed;

        if let Some(g) = grad.as_deref_mut() {
            let w = weights[k];
            let ws = w * local.speed;
            let d_a = local.d_d1.tr_mul(&h_res) * ws + kin.d1 * (w * density / local.speed);
            g.add(1, k, &d_a);
            g.add(2, k, &(local.d_d2.tr_mul(&h_res) * ws));
            g.add(3, k, &(local.d_d3.tr_mul(&h_res) * ws));
            g.by_sample[k][1][3] += ws * h_res[1];
        }
    }
    Ok(energy)
}

fn gravity_terms(
    grid: &SampleGrid,
    props: &DloProperties,
    gravity: &Vector3<f64>,
    curve: &SampledCurve,
    mut grad: Option<&mut DensityGradient>,
) -> f64 {
    if gravity.iter().all(|g| *g == 0.0) {
        return 0.0;
    }
    let mu = props.linear_density();
    let mut energy = 0.0;
    for (k, w) in grid.weights().iter().enumerate() {
        let kin = curve.at(k);
        let speed = kin.d1.norm();
        let height = gravity.dot(&kin.r);
        energy -= mu * w * height * speed;
        if let Some(g) = grad.as_deref_mut() {
            g.add(0, k, &(gravity * (-mu * w * speed)));
            if speed > 0.0 {
                g.add(1, k, &(kin.d1 * (-mu * w * height / speed)));
            }
        }
    }
    energy
}

/// Axial anchors at the undeformed endpoint positions `x = 0` and `x = L`.
fn spring_terms(props: &DloProperties, kx: f64, q: &DVector<f64>, grad: Option<&mut DVector<f64>>) -> f64 {
    let n_u = q.len() / 4;
    let d0 = q[0];
    let d1 = q[n_u - 1] - props.length;
    if let Some(g) = grad {
        g[0] += kx * d0;
        g[n_u - 1] += kx * d1;
    }
    0.5 * kx * (d0 * d0 + d1 * d1)
}

/// `½∫ εₑᵀ H εₑ |r'| du` on the grid.
pub fn strain_energy(grid: &SampleGrid, props: &DloProperties, q: &DVector<f64>) -> Result<f64, ModelError> {
    let curve = SampledCurve::new(grid, q)?;
    strain_terms(grid, props, &curve, None)
}

/// Strain, gravitational and spring energy.
pub fn potential_energy(
    grid: &SampleGrid,
    props: &DloProperties,
    q: &DVector<f64>,
    scenario: &Scenario,
) -> Result<EnergyBreakdown, ModelError> {
    let curve = SampledCurve::new(grid, q)?;
    Ok(EnergyBreakdown {
        strain: strain_terms(grid, props, &curve, None)?,
        gravity: gravity_terms(grid, props, &scenario.gravity, &curve, None),
        springs: spring_terms(props, scenario.spring_kx, q, None),
    })
}

/// Elastic generalized forces `P = -∂U_strain/∂q`. The `|r'|` weight of the
/// line element is differentiated along with the strains.
pub fn elastic_forces(grid: &SampleGrid, props: &DloProperties, q: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
    let curve = SampledCurve::new(grid, q)?;
    let mut g = DensityGradient::new(grid.n_s());
    strain_terms(grid, props, &curve, Some(&mut g))?;
    Ok(-g.into_dofs(grid))
}

/// `∂U/∂q - F_ext(t)`: the momentum rate is the negative of this.
pub fn grad_potential(
    grid: &SampleGrid,
    props: &DloProperties,
    q: &DVector<f64>,
    scenario: &Scenario,
    t: f64,
) -> Result<DVector<f64>, ModelError> {
    let curve = SampledCurve::new(grid, q)?;
    let mut g = DensityGradient::new(grid.n_s());
    strain_terms(grid, props, &curve, Some(&mut g))?;
    gravity_terms(grid, props, &scenario.gravity, &curve, Some(&mut g));
    let mut out = g.into_dofs(grid);
    spring_terms(props, scenario.spring_kx, q, Some(&mut out));
    if scenario.external_force.is_some() {
        out -= external_force_at(scenario, grid.basis(), t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, initial_state, ScenarioKind, ScenarioOverrides};
    use crate::spline::{build_basis, build_sample_grid};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n_u: usize) -> (SampleGrid, DloProperties, DVector<f64>) {
        let basis = build_basis(n_u, 2.0).unwrap();
        let grid = build_sample_grid(&basis, 101).unwrap();
        let q = initial_state(&basis).q;
        (grid, DloProperties::default(), q)
    }

    fn no_gravity() -> Scenario {
        build_scenario(
            ScenarioKind::GravityOnly,
            2.0,
            &ScenarioOverrides {
                gravity: Some(Vector3::zeros()),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn perturbed(q: &DVector<f64>, rng: &mut ChaCha8Rng, amp: f64) -> DVector<f64> {
        let n_u = q.len() / 4;
        let mut out = q.clone();
        for i in 0..n_u {
            out[i] += amp * 0.2 * rng.random_range(-1.0..1.0);
            for c in 1..4 {
                out[c * n_u + i] += amp * rng.random_range(-1.0..1.0);
            }
        }
        out
    }

    /// Sixth-order central differences of a scalar function, step
    /// `1e-5 · max(1, |q_i|)`.
    fn fd_gradient(q: &DVector<f64>, f: impl Fn(&DVector<f64>) -> f64) -> DVector<f64> {
        DVector::from_fn(q.len(), |i, _| {
            let h = 1e-5 * q[i].abs().max(1.0);
            let at = |k: f64| {
                let mut x = q.clone();
                x[i] += k * h;
                f(&x)
            };
            (45.0 * (at(1.0) - at(-1.0)) - 9.0 * (at(2.0) - at(-2.0)) + (at(3.0) - at(-3.0))) / (60.0 * h)
        })
    }

    #[test]
    fn rest_configuration_has_no_energy() {
        let (grid, props, q) = setup(9);
        let e = potential_energy(&grid, &props, &q, &no_gravity()).unwrap();
        assert!(e.total().abs() < 1e-20);
        assert!(elastic_forces(&grid, &props, &q).unwrap().amax() < 1e-9);
        assert!(grad_potential(&grid, &props, &q, &no_gravity(), 0.0).unwrap().amax() < 1e-9);
    }

    #[test]
    fn rigid_drop_changes_gravity_energy() {
        let (grid, props, q) = setup(9);
        let scenario = build_scenario(ScenarioKind::GravityOnly, 2.0, &Default::default()).unwrap();
        let before = potential_energy(&grid, &props, &q, &scenario).unwrap();
        let mut dropped = q.clone();
        for i in 0..9 {
            dropped[18 + i] -= 0.1;
        }
        let after = potential_energy(&grid, &props, &dropped, &scenario).unwrap();
        let expect = -props.linear_density() * 2.0 * 9.81 * 0.1;
        assert_relative_eq!(after.gravity - before.gravity, expect, max_relative = 1e-12);
        assert!((after.strain - before.strain).abs() < 1e-12);
    }

    #[test]
    fn endpoint_spring_energy() {
        let (grid, props, mut q) = setup(9);
        q[0] += 1e-3;
        let e = potential_energy(&grid, &props, &q, &no_gravity()).unwrap();
        assert_relative_eq!(e.springs, 5e-3, max_relative = 1e-12);
    }

    #[test]
    fn elastic_forces_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (grid, props, q0) = setup(9);
        for _ in 0..5 {
            let q = perturbed(&q0, &mut rng, 0.02);
            let p = elastic_forces(&grid, &props, &q).unwrap();
            let fd = fd_gradient(&q, |x| strain_energy(&grid, &props, x).unwrap());
            let scale = p.amax();
            for i in 0..q.len() {
                let denom = p[i].abs().max(1e-8 * scale);
                assert!(((-fd[i]) - p[i]).abs() / denom < 1e-5, "dof {i}: {} vs {}", -fd[i], p[i]);
            }
        }
    }

    #[test]
    fn total_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (grid, props, q0) = setup(9);
        let scenario = build_scenario(ScenarioKind::GravityOnly, 2.0, &Default::default()).unwrap();
        for _ in 0..3 {
            let q = perturbed(&q0, &mut rng, 0.02);
            let g = grad_potential(&grid, &props, &q, &scenario, 0.0).unwrap();
            let fd = fd_gradient(&q, |x| potential_energy(&grid, &props, x, &scenario).unwrap().total());
            let scale = g.amax();
            for i in 0..q.len() {
                let denom = g[i].abs().max(1e-8 * scale);
                assert!((fd[i] - g[i]).abs() / denom < 1e-5, "dof {i}: {} vs {}", fd[i], g[i]);
            }
        }
    }

    #[test]
    fn stretched_rod_pulls_inward() {
        let (grid, props, mut q) = setup(9);
        for i in 0..9 {
            q[i] *= 1.01;
        }
        let p = elastic_forces(&grid, &props, &q).unwrap();
        assert!(p[0] > 0.0);
        assert!(p[8] < 0.0);
        assert!(p.rows(9, 27).amax() < 1e-9 * p.amax());
    }

    #[test]
    fn rigid_translation_does_no_elastic_work() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (grid, props, q0) = setup(9);
        let q = perturbed(&q0, &mut rng, 0.05);
        let p = elastic_forces(&grid, &props, &q).unwrap();
        for c in 0..3 {
            let work: f64 = p.rows(c * 9, 9).sum();
            assert!(work.abs() < 1e-8 * p.amax().max(1.0), "component {c}: {work}");
        }
    }

    #[test]
    fn point_force_enters_with_basis_weights() {
        let (grid, props, q) = setup(9);
        let scenario = build_scenario(
            ScenarioKind::SinusoidalCenter,
            2.0,
            &ScenarioOverrides {
                gravity: Some(Vector3::zeros()),
                ..Default::default()
            },
        )
        .unwrap();
        // sin(2π·0.5·0.5) = 1
        let g = grad_potential(&grid, &props, &q, &scenario, 0.5).unwrap();
        let w = grid.basis().eval(1.0, 0).unwrap();
        for i in 0..9 {
            assert!((g[9 + i] + w[i]).abs() < 1e-9);
        }
        let total: f64 = g.rows(9, 9).sum();
        assert_relative_eq!(total, -1.0, epsilon = 1e-9);
    }
}
