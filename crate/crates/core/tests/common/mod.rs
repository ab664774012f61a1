//! Shared test oracles, independent of the library's implementation paths.

#![allow(dead_code)]

pub mod grad;

use sparsepose::rng::Rng64;
use sparsepose::rotations::{AxisAngle, RotMatrix};
use sparsepose::skeleton::{PoseOutput, Skeleton};
use sparsepose::vec3::Vec3;

/// Axis-angle to rotation matrix via unit quaternions. Kept deliberately
/// separate from the Rodrigues path in the library.
pub fn quat_oracle_matrix(aa: AxisAngle) -> [[f64; 3]; 3] {
    let angle = aa.angle();
    let (w, x, y, z) = if angle < 1e-300 {
        (1.0, 0.0, 0.0, 0.0)
    } else {
        let axis = [aa.v[0] / angle, aa.v[1] / angle, aa.v[2] / angle];
        let (s, c) = ((angle / 2.0).sin(), (angle / 2.0).cos());
        (c, s * axis[0], s * axis[1], s * axis[2])
    };
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// 4x4 homogeneous transform.
#[derive(Clone, Copy)]
pub struct Hom(pub [[f64; 4]; 4]);

impl Hom {
    pub fn identity() -> Hom {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Hom(m)
    }

    pub fn translation(t: Vec3) -> Hom {
        let mut m = Hom::identity().0;
        m[0][3] = t[0];
        m[1][3] = t[1];
        m[2][3] = t[2];
        Hom(m)
    }

    pub fn rotation(r: &RotMatrix) -> Hom {
        let mut m = Hom::identity().0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = r.rows()[i][j];
            }
        }
        Hom(m)
    }

    pub fn mul(&self, rhs: &Hom) -> Hom {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Hom(out)
    }

    pub fn position(&self) -> Vec3 {
        [self.0[0][3], self.0[1][3], self.0[2][3]]
    }
}

/// Forward kinematics by recursive descent over an explicit child list with
/// full homogeneous transforms, independent of the library's index walk.
pub fn fk_oracle_positions(s: &Skeleton, pose: &PoseOutput) -> Vec<Vec3> {
    let n = s.joint_count();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        if let Some(p) = s.parent[j] {
            children[p].push(j);
        }
    }
    let mut out = vec![[0.0; 3]; n];
    let root_t = Hom::translation(pose.root_pos).mul(&Hom::rotation(&pose.global_orient));
    fn descend(
        s: &Skeleton,
        pose: &PoseOutput,
        children: &[Vec<usize>],
        joint: usize,
        t: &Hom,
        out: &mut Vec<Vec3>,
    ) {
        out[joint] = t.position();
        for &c in &children[joint] {
            let local = t
                .mul(&Hom::translation(s.offset[c]))
                .mul(&Hom::rotation(pose.local(c)));
            descend(s, pose, children, c, &local, out);
        }
    }
    descend(s, pose, &children, s.root_index, &root_t, &mut out);
    out
}

/// Uniform-ish random rotation with angle bounded away from pi.
pub fn random_rotation_axis_angle(rng: &mut Rng64) -> AxisAngle {
    let axis = loop {
        let v = [
            rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            break [v[0] / n, v[1] / n, v[2] / n];
        }
    };
    let angle = rng.uniform(1e-6, std::f64::consts::PI - 1e-3);
    AxisAngle::new([axis[0] * angle, axis[1] * angle, axis[2] * angle])
}

pub fn random_pose(rng: &mut Rng64, s: &Skeleton, root_pos: Vec3) -> PoseOutput {
    PoseOutput {
        global_orient: sparsepose::rotations::axis_angle_to_matrix(random_rotation_axis_angle(rng))
            .unwrap(),
        local_rot: (1..s.joint_count())
            .map(|_| {
                sparsepose::rotations::axis_angle_to_matrix(random_rotation_axis_angle(rng))
                    .unwrap()
            })
            .collect(),
        root_pos,
    }
}

pub fn assert_mat_close(got: &RotMatrix, want: &[[f64; 3]; 3], tol: f64, what: &str) {
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (got.rows()[i][j] - want[i][j]).abs() <= tol,
                "{what}: entry ({i},{j}) {} vs {}",
                got.rows()[i][j],
                want[i][j]
            );
        }
    }
}

/// Central-difference gradient of a scalar function at `x`.
pub fn finite_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], eps: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let up = f(&probe);
        probe[i] = x[i] - eps;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * eps);
    }
    grad
}

/// Asserts |analytic - fd| against a relative tolerance with a small floor.
pub fn assert_grad_close(analytic: &[f64], fd: &[f64], rel_tol: f64, what: &str) {
    assert_eq!(analytic.len(), fd.len(), "{what}: gradient length");
    for (i, (a, g)) in analytic.iter().zip(fd).enumerate() {
        let denom = a.abs().max(g.abs()).max(1e-4);
        assert!(
            (a - g).abs() / denom <= rel_tol,
            "{what}: component {i}: analytic {a} vs finite-difference {g}"
        );
    }
}

// ---------------------------------------------------------------------------
// Gradient-check drivers shared by the gradcheck suite and the acceptance
// gate. A graph builder maps leaf tensors to a scalar; the driver compares
// its backward gradients against central finite differences.
// ---------------------------------------------------------------------------

use sparsepose::autodiff::{Tape, Tensor, Var};

pub const FD_EPS: f64 = 1e-5;
pub const PRIMITIVE_TOL: f64 = 1e-4;
pub const COMPOSITE_TOL: f64 = 1e-3;

pub type GraphBuilder = dyn Fn(&mut Tape, &[Var]) -> Var;

/// Checks d(scalar graph)/d(input k) for every input against central
/// finite differences.
pub fn check_graph_gradients(
    what: &str,
    inputs: &[(Vec<usize>, Vec<f64>)],
    build: &GraphBuilder,
    rel_tol: f64,
) {
    let eval = |datas: &[Vec<f64>]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs
            .iter()
            .zip(datas)
            .map(|((shape, _), data)| tape.leaf(&Tensor::from_vec(shape, data.clone())))
            .collect();
        let out = build(&mut tape, &vars);
        tape.value(out)[0]
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs
        .iter()
        .map(|(shape, data)| tape.leaf(&Tensor::from_vec(shape, data.clone())))
        .collect();
    let out = build(&mut tape, &vars);
    assert_eq!(tape.value(out).len(), 1, "{what}: graph must be scalar");
    tape.backward(out).unwrap();

    for k in 0..inputs.len() {
        let analytic: Vec<f64> = tape
            .grad(vars[k])
            .map(|g| g.to_vec())
            .unwrap_or_else(|| vec![0.0; inputs[k].1.len()]);
        let mut datas: Vec<Vec<f64>> = inputs.iter().map(|(_, d)| d.clone()).collect();
        let base = datas[k].clone();
        let mut f = |x: &[f64]| -> f64 {
            datas[k].copy_from_slice(x);
            eval(&datas)
        };
        let fd = finite_diff(&mut f, &base, FD_EPS);
        assert_grad_close(&analytic, &fd, rel_tol, &format!("{what} input {k}"));
    }
}

pub fn random_data(rng: &mut Rng64, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.uniform(lo, hi)).collect()
}
