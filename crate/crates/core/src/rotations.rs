//! Rotation representations and conversions.
//!
//! Three encodings are used throughout the crate: axis-angle (compact storage
//! in clip files), 3x3 rotation matrices (all kinematic math), and the
//! continuous 6D code (network inputs/outputs). The 6D code is the first two
//! rows of the rotation matrix flattened row-major; a full matrix is recovered
//! from it by Gram-Schmidt orthogonalization.
//!
//! All math here is f64. Operations are pure and the types are plain values.

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Axis-angle rotation: `v = angle * unit_axis`, angle in radians.
///
/// Canonical form keeps the angle in `[0, pi]`; the zero vector is the
/// identity rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub v: Vec3,
}

impl AxisAngle {
    pub const IDENTITY: AxisAngle = AxisAngle { v: vec3::ZERO };

    /// Wraps the magnitude into `[0, pi]`, flipping the axis as needed.
    pub fn new(v: Vec3) -> AxisAngle {
        let angle = vec3::norm(v);
        if angle <= f64::EPSILON {
            return AxisAngle::IDENTITY;
        }
        let mut wrapped = angle % std::f64::consts::TAU;
        let mut axis = vec3::scale(v, 1.0 / angle);
        if wrapped > std::f64::consts::PI {
            wrapped = std::f64::consts::TAU - wrapped;
            axis = vec3::scale(axis, -1.0);
        }
        AxisAngle {
            v: vec3::scale(axis, wrapped),
        }
    }

    pub fn angle(&self) -> f64 {
        vec3::norm(self.v)
    }
}

/// 3x3 rotation matrix, row-major.
///
/// Invariants: orthonormal columns and determinant +1 within 1e-6. Use
/// [`RotMatrix::from_rows`] to validate untrusted data;
/// [`RotMatrix::from_rows_unchecked`] skips the check for values that are
/// rotations by construction (products, transposes, Rodrigues outputs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotMatrix {
    m: [[f64; 3]; 3],
}

pub const ORTHONORMAL_TOL: f64 = 1e-6;

impl RotMatrix {
    pub const IDENTITY: RotMatrix = RotMatrix {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_rows(m: [[f64; 3]; 3]) -> Result<RotMatrix> {
        let r = RotMatrix { m };
        if !r.is_valid() {
            return Err(Error::InvalidArgument(format!(
                "not a rotation matrix: {m:?}"
            )));
        }
        Ok(r)
    }

    /// Caller guarantees orthonormality; no validation is performed.
    pub fn from_rows_unchecked(m: [[f64; 3]; 3]) -> RotMatrix {
        RotMatrix { m }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.m[i]
    }

    pub fn col(&self, j: usize) -> Vec3 {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    /// Rotation about the x axis (right-hand rule).
    pub fn rx(angle: f64) -> RotMatrix {
        let (s, c) = angle.sin_cos();
        RotMatrix {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    /// Rotation about the y axis.
    pub fn ry(angle: f64) -> RotMatrix {
        let (s, c) = angle.sin_cos();
        RotMatrix {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    /// Rotation about the z axis.
    pub fn rz(angle: f64) -> RotMatrix {
        let (s, c) = angle.sin_cos();
        RotMatrix {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn transpose(&self) -> RotMatrix {
        let m = &self.m;
        RotMatrix {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn mul(&self, rhs: &RotMatrix) -> RotMatrix {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        RotMatrix { m: out }
    }

    /// Applies the rotation to a vector (`y = R x`).
    pub fn apply(&self, x: Vec3) -> Vec3 {
        [
            vec3::dot(self.m[0], x),
            vec3::dot(self.m[1], x),
            vec3::dot(self.m[2], x),
        ]
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Orthonormal columns and determinant +1 within [`ORTHONORMAL_TOL`].
    pub fn is_valid(&self) -> bool {
        if !self.m.iter().flatten().all(|x| x.is_finite()) {
            return false;
        }
        for j in 0..3 {
            let cj = self.col(j);
            if (vec3::norm(cj) - 1.0).abs() > ORTHONORMAL_TOL {
                return false;
            }
            for k in (j + 1)..3 {
                if vec3::dot(cj, self.col(k)).abs() > ORTHONORMAL_TOL {
                    return false;
                }
            }
        }
        (self.det() - 1.0).abs() <= ORTHONORMAL_TOL
    }
}

/// 6D rotation code: first two rows of a rotation matrix, flattened.
///
/// Raw values carry no invariants (network outputs are unconstrained);
/// [`recover_6d`] turns any non-degenerate code back into a valid matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation6D {
    pub r: [f64; 6],
}

impl Rotation6D {
    /// The code that recovers to the identity matrix.
    pub const IDENTITY: Rotation6D = Rotation6D {
        r: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    };

    pub fn new(r: [f64; 6]) -> Rotation6D {
        Rotation6D { r }
    }
}

/// Rodrigues formula. The zero vector maps to the identity.
pub fn axis_angle_to_matrix(a: AxisAngle) -> Result<RotMatrix> {
    if !vec3::is_finite(a.v) {
        return Err(Error::InvalidArgument(format!(
            "non-finite axis-angle {:?}",
            a.v
        )));
    }
    let angle = a.angle();
    if angle <= f64::EPSILON {
        return Ok(RotMatrix::IDENTITY);
    }
    let [x, y, z] = vec3::scale(a.v, 1.0 / angle);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    Ok(RotMatrix {
        m: [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ],
    })
}

/// Inverse of [`axis_angle_to_matrix`]; the returned angle is in `[0, pi]`.
///
/// Near angle pi the rotation axis loses its sign in the skew part of the
/// matrix; when that happens the axis whose first non-zero component is
/// non-negative is chosen, which keeps the result deterministic.
pub fn matrix_to_axis_angle(m: &RotMatrix) -> AxisAngle {
    let cos_angle = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    if angle < 1e-12 {
        return AxisAngle::IDENTITY;
    }
    let r = m.rows();
    // (R - R^T)/2 = sin(angle) * skew(axis)
    let skew = [
        (r[2][1] - r[1][2]) / 2.0,
        (r[0][2] - r[2][0]) / 2.0,
        (r[1][0] - r[0][1]) / 2.0,
    ];
    if angle < std::f64::consts::PI - 1e-6 {
        let axis = vec3::scale(skew, 1.0 / angle.sin());
        return AxisAngle::new(vec3::scale(axis, angle));
    }
    // Near pi: (R + R^T)/2 = cos*I + (1-cos) * axis*axis^T is well conditioned.
    let denom = 1.0 - cos_angle;
    let mut outer = [[0.0; 3]; 3];
    for (i, row) in outer.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let sym = (r[i][j] + r[j][i]) / 2.0;
            let diag = if i == j { cos_angle } else { 0.0 };
            *v = (sym - diag) / denom;
        }
    }
    let i = (0..3)
        .max_by(|&a, &b| outer[a][a].total_cmp(&outer[b][b]))
        .unwrap();
    let ai = outer[i][i].max(0.0).sqrt();
    let mut axis = [outer[i][0] / ai, outer[i][1] / ai, outer[i][2] / ai];
    let n = vec3::norm(axis);
    axis = vec3::scale(axis, 1.0 / n);
    // Recover the sign from the skew part if it still carries signal,
    // otherwise apply the first-non-zero-component convention.
    let signal = vec3::dot(skew, axis);
    if signal.abs() > 1e-9 {
        if signal < 0.0 {
            axis = vec3::scale(axis, -1.0);
        }
    } else {
        let lead = axis.iter().find(|x| x.abs() > 1e-12);
        if let Some(&lead) = lead {
            if lead < 0.0 {
                axis = vec3::scale(axis, -1.0);
            }
        }
    }
    AxisAngle::new(vec3::scale(axis, angle))
}

/// First two rows of the matrix, row-major.
pub fn matrix_to_6d(m: &RotMatrix) -> Rotation6D {
    let r = m.rows();
    Rotation6D {
        r: [r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2]],
    }
}

/// Gram-Schmidt recovery of a full rotation matrix from a 6D code.
///
/// `b1 = normalize(r[0..3])`, `b2 = normalize(r[3..6] - (r[3..6].b1) b1)`,
/// `b3 = b1 x b2`; the rows of the result are `b1, b2, b3`.
pub fn recover_6d(r: &Rotation6D) -> Result<RotMatrix> {
    let a1 = [r.r[0], r.r[1], r.r[2]];
    let a2 = [r.r[3], r.r[4], r.r[5]];
    let n1 = vec3::norm(a1);
    if n1 < 1e-9 || !n1.is_finite() {
        return Err(Error::DegenerateRotation(format!(
            "first row of 6D code is near zero: {a1:?}"
        )));
    }
    let b1 = [a1[0] / n1, a1[1] / n1, a1[2] / n1];
    let proj = vec3::dot(a2, b1);
    let u2 = vec3::sub(a2, [b1[0] * proj, b1[1] * proj, b1[2] * proj]);
    let n2 = vec3::norm(u2);
    if n2 < 1e-9 || !n2.is_finite() {
        return Err(Error::DegenerateRotation(format!(
            "rows of 6D code are parallel: {:?}",
            r.r
        )));
    }
    let b2 = [u2[0] / n2, u2[1] / n2, u2[2] / n2];
    let b3 = vec3::cross(b1, b2);
    Ok(RotMatrix { m: [b1, b2, b3] })
}

/// Relative rotation between consecutive frames: `prev^T * cur`.
pub fn angular_velocity(prev: &RotMatrix, cur: &RotMatrix) -> RotMatrix {
    prev.transpose().mul(cur)
}

/// Geodesic distance on SO(3) in radians, in `[0, pi]`.
///
/// Computed as `atan2(|skew|, (trace - 1)/2)`, which equals
/// `arccos((trace(a^T b) - 1)/2)` but stays accurate near zero where the
/// arccosine form amplifies roundoff.
pub fn geodesic_angle(a: &RotMatrix, b: &RotMatrix) -> f64 {
    let rel = a.transpose().mul(b);
    let r = rel.rows();
    let skew = [
        (r[2][1] - r[1][2]) / 2.0,
        (r[0][2] - r[2][0]) / 2.0,
        (r[1][0] - r[0][1]) / 2.0,
    ];
    let sin = vec3::norm(skew).min(1.0);
    let cos = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    sin.atan2(cos)
}
