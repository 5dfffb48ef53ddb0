//! Clamped cubic B-spline basis on the material coordinate `u ∈ [0, L]`.
//!
//! The basis is evaluated with the Cox–de Boor recurrence together with the
//! analytic derivative recurrence, so first to third derivatives are exact
//! piecewise polynomials. [`SampleGrid`] caches the basis and its derivatives
//! at uniformly spaced sample points; all quadrature in the model reduces to
//! products with those cached matrices.

use nalgebra::{DMatrix, DMatrixView, Vector4};
use thiserror::Error;

/// Polynomial degree of the basis. Only cubics are supported.
pub const DEGREE: usize = 3;

/// Highest derivative order available from [`SplineBasis::eval`].
pub const MAX_DERIVATIVE: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parameter u = {u} outside [0, {length}]")]
    OutOfDomain { u: f64, length: f64 },
    #[error("dimension mismatch: expected {expected} control points, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Clamped cubic B-spline basis with uniform interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    n_u: usize,
    length: f64,
    knots: Vec<f64>,
}

impl SplineBasis {
    /// Builds the basis with `n_u` functions over `[0, length]`.
    pub fn new(n_u: usize, length: f64) -> Result<Self, SplineError> {
        if n_u < DEGREE + 1 {
            return Err(SplineError::InvalidArgument(format!(
                "n_u = {n_u} is below degree + 1 = {}",
                DEGREE + 1
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(SplineError::InvalidArgument(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let spans = n_u - DEGREE;
        let mut knots = Vec::with_capacity(n_u + DEGREE + 1);
        knots.extend(std::iter::repeat_n(0.0, DEGREE));
        for k in 0..=spans {
            knots.push(if k == spans {
                length
            } else {
                k as f64 * length / spans as f64
            });
        }
        knots.extend(std::iter::repeat_n(length, DEGREE));
        Ok(Self { n_u, length, knots })
    }

    pub fn degree(&self) -> usize {
        DEGREE
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of non-degenerate knot spans.
    pub fn span_count(&self) -> usize {
        self.n_u - DEGREE
    }

    /// Knot averages `(t[i+1] + t[i+2] + t[i+3]) / 3`. Control values placed at
    /// these abscissae reproduce the identity map `x(u) = u`.
    pub fn greville(&self) -> Vec<f64> {
        (0..self.n_u)
            .map(|i| {
                let s: f64 = self.knots[i + 1..=i + DEGREE].iter().sum();
                s / DEGREE as f64
            })
            .collect()
    }

    /// Index `s` of the span with `t[s] <= u < t[s+1]`; `u = L` maps to the
    /// last non-degenerate span.
    fn span(&self, u: f64) -> usize {
        let last = self.n_u - 1;
        if u >= self.knots[last + 1] {
            return last;
        }
        let (mut lo, mut hi) = (DEGREE, last + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    fn check_domain(&self, u: f64) -> Result<(), SplineError> {
        if !(0.0..=self.length).contains(&u) {
            return Err(SplineError::OutOfDomain {
                u,
                length: self.length,
            });
        }
        Ok(())
    }

    /// Nonzero basis values and derivatives at `u`.
    ///
    /// Returns the index of the first nonzero function and `ders[j][r]`, the
    /// `j`-th derivative of basis function `first + r`.
    pub fn nonzero_derivatives(
        &self,
        u: f64,
    ) -> Result<(usize, [[f64; DEGREE + 1]; MAX_DERIVATIVE + 1]), SplineError> {
        self.check_domain(u)?;
        let span = self.span(u);
        Ok((span - DEGREE, ders_basis_funs(&self.knots, span, u)))
    }

    /// All `n_u` values of the `order`-th derivative at `u`.
    pub fn eval(&self, u: f64, order: usize) -> Result<Vec<f64>, SplineError> {
        if order > MAX_DERIVATIVE {
            return Err(SplineError::InvalidArgument(format!(
                "derivative order {order} exceeds {MAX_DERIVATIVE}"
            )));
        }
        let (first, ders) = self.nonzero_derivatives(u)?;
        let mut out = vec![0.0; self.n_u];
        out[first..=first + DEGREE].copy_from_slice(&ders[order]);
        Ok(out)
    }

    /// Evaluates `Σ_i b_i^(order)(u) q_i` for an `n_u × 4` control array.
    pub fn eval_curve(
        &self,
        ctrl: DMatrixView<'_, f64>,
        u: f64,
        order: usize,
    ) -> Result<Vector4<f64>, SplineError> {
        if ctrl.nrows() != self.n_u || ctrl.ncols() != 4 {
            return Err(SplineError::Dimension {
                expected: self.n_u,
                got: ctrl.nrows(),
            });
        }
        if order > MAX_DERIVATIVE {
            return Err(SplineError::InvalidArgument(format!(
                "derivative order {order} exceeds {MAX_DERIVATIVE}"
            )));
        }
        let (first, ders) = self.nonzero_derivatives(u)?;
        let mut out = Vector4::zeros();
        for (r, w) in ders[order].iter().enumerate() {
            for c in 0..4 {
                out[c] += w * ctrl[(first + r, c)];
            }
        }
        Ok(out)
    }
}

/// Basis functions and derivatives on one knot span (Piegl & Tiller, A2.3).
fn ders_basis_funs(knots: &[f64], span: usize, u: f64) -> [[f64; DEGREE + 1]; MAX_DERIVATIVE + 1] {
    const P: usize = DEGREE;
    const N: usize = MAX_DERIVATIVE;
    let mut ndu = [[0.0f64; P + 1]; P + 1];
    let mut left = [0.0f64; P + 1];
    let mut right = [0.0f64; P + 1];
    ndu[0][0] = 1.0;
    for j in 1..=P {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle holds knot differences, upper the basis values
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = [[0.0f64; P + 1]; N + 1];
    for j in 0..=P {
        ders[0][j] = ndu[j][P];
    }

    let mut a = [[0.0f64; P + 1]; 2];
    for r in 0..=P {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=N {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = P - k;
            if r >= k {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { P - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }

    let mut factor = P as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (P - k) as f64;
    }
    ders
}

/// The nonzero part of one grid row: `ders[j][r]` is derivative `j` of
/// basis function `first + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub first: usize,
    pub ders: [[f64; DEGREE + 1]; MAX_DERIVATIVE + 1],
}

/// Basis values and derivatives cached on `n_s` uniform samples of `[0, L]`,
/// both as dense matrices and as compact rows.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    basis: SplineBasis,
    u_values: Vec<f64>,
    weights: Vec<f64>,
    matrices: [DMatrix<f64>; MAX_DERIVATIVE + 1],
    rows: Vec<SampleRow>,
}

impl SampleGrid {
    pub fn new(basis: &SplineBasis, n_s: usize) -> Result<Self, SplineError> {
        if n_s < 2 {
            return Err(SplineError::InvalidArgument(format!(
                "n_s = {n_s}, need at least 2 sample points"
            )));
        }
        let length = basis.length();
        let du = length / (n_s - 1) as f64;
        let u_values: Vec<f64> = (0..n_s)
            .map(|k| if k == n_s - 1 { length } else { k as f64 * du })
            .collect();

        // composite trapezoid
        let mut weights = vec![du; n_s];
        weights[0] *= 0.5;
        weights[n_s - 1] *= 0.5;

        let n_u = basis.n_u();
        let mut matrices: [DMatrix<f64>; MAX_DERIVATIVE + 1] =
            std::array::from_fn(|_| DMatrix::zeros(n_s, n_u));
        let mut rows = Vec::with_capacity(n_s);
        for (k, &u) in u_values.iter().enumerate() {
            let (first, ders) = basis.nonzero_derivatives(u)?;
            for (j, m) in matrices.iter_mut().enumerate() {
                for r in 0..=DEGREE {
                    m[(k, first + r)] = ders[j][r];
                }
            }
            rows.push(SampleRow { first, ders });
        }
        Ok(Self {
            basis: basis.clone(),
            u_values,
            weights,
            matrices,
            rows,
        })
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn n_s(&self) -> usize {
        self.u_values.len()
    }

    pub fn n_u(&self) -> usize {
        self.basis.n_u()
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `n_s × n_u` matrix of `b_i^(order)(u_k)`.
    pub fn matrix(&self, order: usize) -> &DMatrix<f64> {
        &self.matrices[order]
    }

    /// Nonzero entries of row `k` across all derivative orders.
    pub fn row(&self, k: usize) -> &SampleRow {
        &self.rows[k]
    }
}

pub fn build_basis(n_u: usize, length: f64) -> Result<SplineBasis, SplineError> {
    SplineBasis::new(n_u, length)
}

pub fn eval_basis(basis: &SplineBasis, u: f64, order: usize) -> Result<Vec<f64>, SplineError> {
    basis.eval(u, order)
}

pub fn eval_curve(
    basis: &SplineBasis,
    ctrl: DMatrixView<'_, f64>,
    u: f64,
    order: usize,
) -> Result<Vector4<f64>, SplineError> {
    basis.eval_curve(ctrl, u, order)
}

pub fn build_sample_grid(basis: &SplineBasis, n_s: usize) -> Result<SampleGrid, SplineError> {
    SampleGrid::new(basis, n_s)
}
