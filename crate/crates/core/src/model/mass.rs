use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::{ctrl_view, DloProperties, ModelError};
use crate::spline::SampleGrid;

/// Mass matrix assembled once at a reference configuration, with its LU
/// factors.
///
/// Pinned DOFs are decoupled by replacing their rows and columns with the
/// identity, so the solve returns zero velocity for zero pinned momentum and
/// the free block is exactly the constrained mass matrix.
#[derive(Debug, Clone)]
pub struct MassOperator {
    matrix: DMatrix<f64>,
    effective: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    fixed: Vec<bool>,
}

impl MassOperator {
    fn factor(matrix: DMatrix<f64>, fixed: Vec<bool>) -> Result<Self, ModelError> {
        let n = matrix.nrows();
        let mut effective = matrix.clone();
        for (d, _) in fixed.iter().enumerate().filter(|(_, f)| **f) {
            effective.row_mut(d).fill(0.0);
            effective.column_mut(d).fill(0.0);
            effective[(d, d)] = 1.0;
        }
        let lu = effective.clone().lu();
        if !lu.is_invertible() {
            return Err(ModelError::Assembly(format!(
                "singular {n}x{n} mass matrix (coincident control points?)"
            )));
        }
        let scale = effective.amax();
        let pivot_min = (0..n).map(|i| lu.u()[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(pivot_min > scale * 1e-14) {
            return Err(ModelError::Assembly(format!(
                "numerically singular mass matrix (pivot {pivot_min:e}, scale {scale:e})"
            )));
        }
        Ok(Self {
            matrix,
            effective,
            lu,
            fixed,
        })
    }

    /// Refactors with the given DOFs pinned.
    pub fn with_fixed_dofs(self, fixed: &[bool]) -> Result<Self, ModelError> {
        if fixed.len() != self.matrix.nrows() {
            return Err(ModelError::Dimension(format!(
                "fixed mask has {} entries for {} DOFs",
                fixed.len(),
                self.matrix.nrows()
            )));
        }
        Self::factor(self.matrix, fixed.to_vec())
    }

    /// The assembled, unconstrained matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The matrix actually used by [`apply`](Self::apply) and
    /// [`solve`](Self::solve).
    pub fn effective(&self) -> &DMatrix<f64> {
        &self.effective
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn dof(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.effective * v
    }

    /// Solves `M x = rhs` with the cached factors.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(rhs).expect("factorization checked at assembly")
    }

    /// Accelerations from a total generalized force.
    pub fn accelerations(&self, total_force: &DVector<f64>) -> DVector<f64> {
        self.solve(total_force)
    }

    /// `p = M q̇`.
    pub fn to_momenta(&self, velocities: &DVector<f64>) -> DVector<f64> {
        self.apply(velocities)
    }

    /// `q̇ = M⁻¹ p`.
    pub fn to_velocities(&self, momenta: &DVector<f64>) -> DVector<f64> {
        self.solve(momenta)
    }

    pub fn kinetic_energy(&self, momenta: &DVector<f64>) -> f64 {
        0.5 * momenta.dot(&self.solve(momenta))
    }
}

/// Assembles `M_ij = ∫ b_i b_j J |r'| du` with the trapezoid rule, `|r'|`
/// taken from `reference` and frozen.
pub fn mass_matrix(
    grid: &SampleGrid,
    props: &DloProperties,
    reference: &DVector<f64>,
) -> Result<MassOperator, ModelError> {
    let n_u = grid.n_u();
    if reference.len() != 4 * n_u {
        return Err(ModelError::Dimension(format!(
            "reference configuration has {} DOFs, grid expects {}",
            reference.len(),
            4 * n_u
        )));
    }
    let b0 = grid.matrix(0);
    let d1 = grid.matrix(1) * ctrl_view(reference);
    let weights: Vec<f64> = grid
        .weights()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let speed = d1.fixed_view::<1, 3>(k, 0).norm();
            w * speed
        })
        .collect();

    let mut gram = DMatrix::zeros(n_u, n_u);
    for i in 0..n_u {
        for j in i..n_u {
            let v: f64 = (0..grid.n_s())
                .map(|k| weights[k] * b0[(k, i)] * b0[(k, j)])
                .sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }

    let density = props.density_diagonal();
    let mut matrix = DMatrix::zeros(4 * n_u, 4 * n_u);
    for (c, rho) in density.iter().enumerate() {
        matrix
            .view_mut((c * n_u, c * n_u), (n_u, n_u))
            .copy_from(&(&gram * *rho));
    }
    MassOperator::factor(matrix, vec![false; 4 * n_u])
}
