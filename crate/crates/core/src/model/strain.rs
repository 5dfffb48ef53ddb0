use nalgebra::{DVector, Matrix3, Vector3};

use super::ModelError;
use crate::spline::SampleGrid;

/// `|C|² < DEGENERACY_THRESHOLD · |r'|⁴` counts as a straight segment: bending
/// strain and geometric torsion are taken as zero there.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Strain measures at one sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainSample {
    /// Stretch `1 - |r'|`.
    pub eps_s: f64,
    /// Twist `θ' - γ`, rad/m.
    pub eps_t: f64,
    /// Curvature `|C| / |r'|³`, 1/m.
    pub eps_b: f64,
    /// `C = r' × r''`.
    pub cross_c: Vector3<f64>,
    /// Geometric torsion `Cᵀ r''' / |C|²`.
    pub gamma: f64,
}

impl StrainSample {
    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.eps_s, self.eps_t, self.eps_b)
    }
}

/// Centerline derivatives at a sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kinematics {
    pub r: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
    pub d3: Vector3<f64>,
    pub dtheta: f64,
}

/// Centerline derivatives at every grid sample.
pub(crate) struct SampledCurve {
    samples: Vec<Kinematics>,
}

impl SampledCurve {
    pub fn new(grid: &SampleGrid, q: &DVector<f64>) -> Result<Self, ModelError> {
        let n_u = grid.n_u();
        if q.len() != 4 * n_u {
            return Err(ModelError::Dimension(format!(
                "configuration has {} DOFs, grid expects {}",
                q.len(),
                4 * n_u
            )));
        }
        let q = q.as_slice();
        let samples = (0..grid.n_s())
            .map(|k| {
                let row = grid.row(k);
                let local = |c: usize| -> [f64; 4] {
                    let start = c * n_u + row.first;
                    q[start..start + 4].try_into().expect("four nonzeros per row")
                };
                let comps = [local(0), local(1), local(2), local(3)];
                let dot = |j: usize, c: usize| -> f64 { (0..4).map(|r| row.ders[j][r] * comps[c][r]).sum() };
                let v = |j: usize| Vector3::new(dot(j, 0), dot(j, 1), dot(j, 2));
                Kinematics {
                    r: v(0),
                    d1: v(1),
                    d2: v(2),
                    d3: v(3),
                    dtheta: dot(1, 3),
                }
            })
            .collect();
        Ok(Self { samples })
    }

    pub fn at(&self, k: usize) -> Kinematics {
        self.samples[k]
    }
}

/// Strain at one sample with its partial derivatives with respect to
/// `r'`, `r''`, `r'''` and `θ'`. Row `m` of each Jacobian is the gradient of
/// strain component `m` (stretch, twist, bend).
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalStrain {
    pub sample: StrainSample,
    pub speed: f64,
    pub d_d1: Matrix3<f64>,
    pub d_d2: Matrix3<f64>,
    pub d_d3: Matrix3<f64>,
}

pub(crate) fn local_strain(kin: &Kinematics, u: f64, with_jacobian: bool) -> Result<LocalStrain, ModelError> {
    let a = kin.d1;
    let b = kin.d2;
    let c = kin.d3;
    let speed = a.norm();
    if !(speed > 0.0) {
        return Err(ModelError::DegenerateCurve { u });
    }
    let cross = a.cross(&b);
    let c2 = cross.norm_squared();
    let speed2 = speed * speed;
    let degenerate = !(c2 >= DEGENERACY_THRESHOLD * speed2 * speed2);

    let (eps_b, gamma) = if degenerate {
        (0.0, 0.0)
    } else {
        (c2.sqrt() / (speed2 * speed), cross.dot(&c) / c2)
    };
    let sample = StrainSample {
        eps_s: 1.0 - speed,
        eps_t: kin.dtheta - gamma,
        eps_b,
        cross_c: cross,
        gamma,
    };

    let mut out = LocalStrain {
        sample,
        speed,
        d_d1: Matrix3::zeros(),
        d_d2: Matrix3::zeros(),
        d_d3: Matrix3::zeros(),
    };
    if !with_jacobian {
        return Ok(out);
    }

    let unit = a / speed;
    out.d_d1.set_row(0, &(-unit).transpose());
    if !degenerate {
        let cn = c2.sqrt();
        let s = cross.dot(&c);
        let b_x_c = b.cross(&cross); // d|C|²/dr' = 2 r''×C
        let c_x_a = cross.cross(&a); // d|C|²/dr'' = 2 C×r'

        // γ = s / |C|², s = (r'×r'')·r'''
        let inv_c2 = 1.0 / c2;
        let dg_da = b.cross(&c) * inv_c2 - b_x_c * (2.0 * s * inv_c2 * inv_c2);
        let dg_db = c.cross(&a) * inv_c2 - c_x_a * (2.0 * s * inv_c2 * inv_c2);
        let dg_dc = cross * inv_c2;
        out.d_d1.set_row(1, &(-dg_da).transpose());
        out.d_d2.set_row(1, &(-dg_db).transpose());
        out.d_d3.set_row(1, &(-dg_dc).transpose());

        // ε_b = |C| |r'|⁻³
        let inv_s3 = 1.0 / (speed2 * speed);
        let db_da = b_x_c * (inv_s3 / cn) - a * (3.0 * cn * inv_s3 / speed2);
        let db_db = c_x_a * (inv_s3 / cn);
        out.d_d1.set_row(2, &db_da.transpose());
        out.d_d2.set_row(2, &db_db.transpose());
    }
    Ok(out)
}

/// Strain measures at every grid sample.
pub fn compute_strains(grid: &SampleGrid, q: &DVector<f64>) -> Result<Vec<StrainSample>, ModelError> {
    let curve = SampledCurve::new(grid, q)?;
    grid.u_values()
        .iter()
        .enumerate()
        .map(|(k, &u)| local_strain(&curve.at(k), u, false).map(|l| l.sample))
        .collect()
}
