//! Rotation-group and Lie-algebra primitives on SO(3).
//!
//! The newtypes enforce structural invariants at construction time:
//! [`SkewMatrix3`] stores only its axial vector, [`SymMatrix3`] its six
//! independent entries, and [`RotationMatrix`] re-orthonormalizes itself when
//! long composition chains drift. Everything else in the crate builds on the
//! maps defined here: the skew/vex isomorphism, the `psi` projection, the
//! normalized distance to the identity, the angle-axis and Cayley
//! parameterizations, and the symmetric 3x3 eigendecomposition.

use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// 3-vector of `f64`: angular rates (rad/s), Rodrigues vectors, unit axes.
pub type Vec3 = Vector3<f64>;

/// Orthonormality defect above which a composed rotation is re-projected
/// onto SO(3).
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// Rotations with `dist_identity() > 1 - NEAR_PI_TOL` are rejected by the
/// Rodrigues map, which blows up on half-turns.
pub const NEAR_PI_TOL: f64 = 1e-6;

/// Below this rotation angle `RotationMatrix::exp` switches to Taylor
/// expansions of the trigonometric coefficients.
const SMALL_ANGLE: f64 = 1e-8;

pub(crate) fn hat(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Skew-symmetric 3x3 matrix, stored as its axial vector so that
/// `S^T = -S` holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix3 {
    axial: Vec3,
}

impl SkewMatrix3 {
    pub fn new(axial: Vec3) -> Self {
        Self { axial }
    }

    pub fn axial(&self) -> Vec3 {
        self.axial
    }

    /// Materialize the full 3x3 matrix `[v]x` with `[v]x w = v x w`.
    pub fn as_matrix(&self) -> Matrix3<f64> {
        hat(&self.axial)
    }
}

/// `[v]x`, the cross-product matrix of `v`.
pub fn skew(v: Vec3) -> SkewMatrix3 {
    SkewMatrix3::new(v)
}

/// Inverse of [`skew`]: recovers the axial vector.
pub fn vex(s: &SkewMatrix3) -> Vec3 {
    s.axial()
}

/// Axial vector of the skew-symmetric part of `m`: `vex((m - m^T)/2)`.
///
/// Restricted to skew-symmetric input this is exactly [`vex`]; it vanishes on
/// symmetric matrices.
pub fn psi(m: &Matrix3<f64>) -> Vec3 {
    0.5 * Vec3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    )
}

/// Rotation matrix: orthonormal with determinant +1.
///
/// Construction goes through validated constructors; composition re-projects
/// onto the group whenever the orthonormality defect exceeds
/// [`ORTHONORMALITY_TOL`], so long simulations do not drift off the manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality (Frobenius defect of `R^T R - I` at most
    /// [`ORTHONORMALITY_TOL`]) and determinant sign.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix3::identity()).norm();
        if defect > ORTHONORMALITY_TOL || m.determinant() <= 0.0 {
            return Err(Error::NotRotation { defect });
        }
        Ok(Self(m))
    }

    /// Rotation of `angle` radians about the unit vector `axis`.
    pub fn from_angle_axis(angle: f64, axis: Vec3) -> Result<Self> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitAxis { norm });
        }
        Ok(Self(rotation_about(angle, &axis)))
    }

    /// Exponential map: the rotation by angle `|x|` about `x/|x|`.
    ///
    /// Total on all of R^3; angles below 1e-8 use fourth-order Taylor
    /// expansions of `sin(t)/t` and `(1-cos t)/t^2` to avoid 0/0.
    pub fn exp(x: Vec3) -> Self {
        let theta = x.norm();
        let (a, b) = if theta < SMALL_ANGLE {
            let t2 = theta * theta;
            (
                1.0 - t2 / 6.0 * (1.0 - t2 / 20.0),
                0.5 - t2 / 24.0 * (1.0 - t2 / 30.0),
            )
        } else {
            let half_sin = (0.5 * theta).sin();
            (
                theta.sin() / theta,
                2.0 * half_sin * half_sin / (theta * theta),
            )
        };
        let k = hat(&x);
        Self(Matrix3::identity() + a * k + b * (k * k))
    }

    /// Cayley parameterization: maps any `z` in R^3 to a rotation of angle
    /// strictly less than pi, `z` being its Rodrigues vector.
    pub fn cayley(z: Vec3) -> Self {
        let n2 = z.norm_squared();
        let m = (1.0 - n2) * Matrix3::identity() + 2.0 * (z * z.transpose()) + 2.0 * hat(&z);
        Self(m / (1.0 + n2))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Group inverse (`R^T`).
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Squared normalized distance to the identity, `tr(I - R)/4`,
    /// clamped into [0, 1] against roundoff.
    ///
    /// Evaluated as `|I - R|_F^2 / 8` (the same quantity on SO(3)): the sum
    /// of squares has no cancellation, so small distances keep full relative
    /// precision where `3 - tr(R)` would bottom out near `sqrt(eps)`.
    pub fn dist_identity_sq(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let e = (i == j) as u8 as f64 - self.0[(i, j)];
                sum += e * e;
            }
        }
        (sum / 8.0).clamp(0.0, 1.0)
    }

    /// Normalized distance to the identity: `|sin(angle/2)|`, in [0, 1].
    pub fn dist_identity(&self) -> f64 {
        self.dist_identity_sq().sqrt()
    }

    /// Rodrigues vector `psi(R) / (2 (1 - |R|_I^2))`, the inverse of
    /// [`RotationMatrix::cayley`].
    ///
    /// Fails within [`NEAR_PI_TOL`] of a half-turn, where the map blows up.
    pub fn rodrigues(&self) -> Result<Vec3> {
        let d = self.dist_identity();
        if d > 1.0 - NEAR_PI_TOL {
            return Err(Error::NearHalfTurn { dist_identity: d });
        }
        Ok(psi(&self.0) / (2.0 * (1.0 - d * d)))
    }

    /// Rotation angle in (0, pi) and unit axis.
    ///
    /// Fails if the rotation is too close to the identity or to a half-turn
    /// for the axis to be numerically meaningful.
    pub fn angle_axis(&self) -> Result<(f64, Vec3)> {
        let d = self.dist_identity();
        if d <= 1e-9 || d >= 1.0 - 1e-9 {
            return Err(Error::AxisUndefined { dist_identity: d });
        }
        let v = psi(&self.0); // sin(angle) * axis
        Ok((2.0 * d.asin(), v / v.norm()))
    }

    /// Frobenius norm of `R^T R - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).norm()
    }

    /// Gram-Schmidt on the columns; the third column is rebuilt by cross
    /// product so the determinant comes out +1.
    fn reprojected(m: &Matrix3<f64>) -> Matrix3<f64> {
        let c0 = m.column(0).into_owned().normalize();
        let mut c1 = m.column(1).into_owned();
        c1 -= c0 * c0.dot(&c1);
        let c1 = c1.normalize();
        let c2 = c0.cross(&c1);
        Matrix3::from_columns(&[c0, c1, c2])
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        let m = self.0 * rhs.0;
        let r = RotationMatrix(m);
        if r.orthonormality_defect() > ORTHONORMALITY_TOL {
            RotationMatrix(Self::reprojected(&m))
        } else {
            r
        }
    }
}

impl Mul<Vec3> for RotationMatrix {
    type Output = Vec3;

    fn mul(self, v: Vec3) -> Vec3 {
        self.0 * v
    }
}

/// `I + sin(angle) [u]x + (1 - cos(angle)) [u]x^2` for a unit axis `u`.
fn rotation_about(angle: f64, axis: &Vec3) -> Matrix3<f64> {
    let k = hat(axis);
    let half_sin = (0.5 * angle).sin();
    Matrix3::identity() + angle.sin() * k + 2.0 * half_sin * half_sin * (k * k)
}

/// Symmetric 3x3 matrix stored as six independent entries, so `M = M^T`
/// holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix3 {
    diag: Vec3,
    /// Off-diagonal entries (m12, m13, m23).
    off: Vec3,
}

impl SymMatrix3 {
    pub fn new(m11: f64, m22: f64, m33: f64, m12: f64, m13: f64, m23: f64) -> Self {
        Self {
            diag: Vec3::new(m11, m22, m33),
            off: Vec3::new(m12, m13, m23),
        }
    }

    pub fn from_diagonal(d1: f64, d2: f64, d3: f64) -> Self {
        Self::new(d1, d2, d3, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::from_diagonal(1.0, 1.0, 1.0)
    }

    /// Accepts matrices whose asymmetry defect is within roundoff of zero.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let defect = (m - m.transpose()).norm();
        if defect > 1e-12 * m.norm().max(1.0) {
            return Err(Error::NotSymmetric { defect });
        }
        Ok(Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        ))
    }

    /// Weighted sum of outer products `sum_i w_i v_i v_i^T`.
    pub fn weighted_outer_sum(pairs: &[(Vec3, f64)]) -> Self {
        let mut diag = Vec3::zeros();
        let mut off = Vec3::zeros();
        for (v, w) in pairs {
            diag += *w * Vec3::new(v.x * v.x, v.y * v.y, v.z * v.z);
            off += *w * Vec3::new(v.x * v.y, v.x * v.z, v.y * v.z);
        }
        Self { diag, off }
    }

    pub fn as_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.diag.x, self.off.x, self.off.y, //
            self.off.x, self.diag.y, self.off.z, //
            self.off.y, self.off.z, self.diag.z,
        )
    }

    pub fn trace(&self) -> f64 {
        self.diag.x + self.diag.y + self.diag.z
    }

    /// Induced gain matrix `1/2 (tr(M) I - M)`.
    ///
    /// For a weighting matrix built from two or more noncollinear directions
    /// this is positive definite; anything else is rejected, since the gain
    /// matrix spectrum sets the filter convergence rates.
    pub fn abar(&self) -> Result<SymMatrix3> {
        let half_tr = 0.5 * self.trace();
        let bar = Self {
            diag: Vec3::new(
                half_tr - 0.5 * self.diag.x,
                half_tr - 0.5 * self.diag.y,
                half_tr - 0.5 * self.diag.z,
            ),
            off: -0.5 * self.off,
        };
        let min_eigenvalue = bar.eigen().values[0];
        if min_eigenvalue <= 0.0 {
            return Err(Error::GainNotPositiveDefinite { min_eigenvalue });
        }
        Ok(bar)
    }

    /// Eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Sweeps until the off-diagonal Frobenius norm falls below `1e-14` times
    /// the matrix scale, at most 50 sweeps; unconditionally convergent for
    /// symmetric 3x3 input. Eigenvalues come back ascending with matching
    /// eigenvector columns. Repeated eigenvalues yield some orthonormal basis
    /// of the eigenspace; callers must not rely on which one.
    pub fn eigen(&self) -> SymEigen3 {
        let mut a = self.as_matrix();
        let mut v = Matrix3::<f64>::identity();
        let scale = a.norm().max(1.0);
        for _ in 0..50 {
            let off = (2.0
                * (a[(0, 1)] * a[(0, 1)] + a[(0, 2)] * a[(0, 2)] + a[(1, 2)] * a[(1, 2)]))
                .sqrt();
            if off < 1e-14 * scale {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut g = Matrix3::<f64>::identity();
                g[(p, p)] = c;
                g[(q, q)] = c;
                g[(p, q)] = s;
                g[(q, p)] = -s;
                a = g.transpose() * a * g;
                // The rotation annihilates (p, q) analytically; pin it and
                // keep the iterate exactly symmetric.
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                let sym = 0.5 * (a + a.transpose());
                a = sym;
                v *= g;
            }
        }

        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
        let values = [
            a[(order[0], order[0])],
            a[(order[1], order[1])],
            a[(order[2], order[2])],
        ];
        let vectors = Matrix3::from_columns(&[
            v.column(order[0]).into_owned(),
            v.column(order[1]).into_owned(),
            v.column(order[2]).into_owned(),
        ]);
        SymEigen3 { values, vectors }
    }

    /// Matrix exponential `exp(M t)`, symmetric positive definite for all `t`.
    pub fn exp_scaled(&self, t: f64) -> SymMatrix3 {
        let e = self.eigen();
        let d = Matrix3::from_diagonal(&Vec3::new(
            (e.values[0] * t).exp(),
            (e.values[1] * t).exp(),
            (e.values[2] * t).exp(),
        ));
        let m = e.vectors * d * e.vectors.transpose();
        // Symmetric up to roundoff; average the off-diagonal pairs.
        Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        )
    }
}

impl Mul<Vec3> for SymMatrix3 {
    type Output = Vec3;

    fn mul(self, v: Vec3) -> Vec3 {
        self.as_matrix() * v
    }
}

impl Mul<f64> for SymMatrix3 {
    type Output = SymMatrix3;

    fn mul(self, s: f64) -> SymMatrix3 {
        SymMatrix3 {
            diag: self.diag * s,
            off: self.off * s,
        }
    }
}

impl Neg for SymMatrix3 {
    type Output = SymMatrix3;

    fn neg(self) -> SymMatrix3 {
        self * -1.0
    }
}

/// Result of [`SymMatrix3::eigen`]: eigenvalues ascending, eigenvectors as
/// the matching orthonormal columns of `vectors`.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen3 {
    pub values: [f64; 3],
    pub vectors: Matrix3<f64>,
}

impl SymEigen3 {
    /// `V diag(values) V^T`, for residual checks.
    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.vectors
            * Matrix3::from_diagonal(&Vec3::new(self.values[0], self.values[1], self.values[2]))
            * self.vectors.transpose()
    }
}
