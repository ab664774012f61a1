//! Gradient-based refinement of the arm joints against the tracked hand
//! positions.
//!
//! Only the four shoulder/elbow rotations move; everything else in the pose
//! (including the shoulder positions, which are fixed by their frozen
//! ancestors) stays bit-identical. The objective is the summed squared hand
//! position error, differentiated through the same Gram-Schmidt recovery and
//! forward kinematics used everywhere else.

use crate::autodiff::{adam_step, AdamConfig, AdamState, Tape};
use crate::diffkin::{fk_positions_var, recover_6d_var};
use crate::error::Result;
use crate::rotations::{matrix_to_6d, recover_6d, Rotation6D};
use crate::skeleton::{forward_kinematics, PoseOutput, Skeleton};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkOptimizer {
    Adam,
    GradientDescent,
}

/// Refinement budget. The defaults (5 iterations at 1e-3) follow the
/// real-time setting; `iters = 0` disables refinement entirely.
#[derive(Debug, Clone, Copy)]
pub struct IkConfig {
    pub lr: f64,
    pub iters: usize,
    pub optimizer: IkOptimizer,
}

impl Default for IkConfig {
    fn default() -> Self {
        IkConfig {
            lr: 1e-3,
            iters: 5,
            optimizer: IkOptimizer::Adam,
        }
    }
}

/// The four optimized joints, derived from the hand chains.
fn arm_joints(s: &Skeleton) -> [usize; 4] {
    let l_elbow = s.parent[s.left_hand_index].expect("wrist has a parent");
    let r_elbow = s.parent[s.right_hand_index].expect("wrist has a parent");
    let l_shoulder = s.parent[l_elbow].expect("elbow has a parent");
    let r_shoulder = s.parent[r_elbow].expect("elbow has a parent");
    [l_shoulder, r_shoulder, l_elbow, r_elbow]
}

/// Squared hand-position error of a pose against the two targets.
pub fn hand_error(s: &Skeleton, pose: &PoseOutput, left: Vec3, right: Vec3) -> f64 {
    let state = forward_kinematics(s, pose);
    let dl = vec3::sub(state.pos[s.left_hand_index], left);
    let dr = vec3::sub(state.pos[s.right_hand_index], right);
    vec3::dot(dl, dl) + vec3::dot(dr, dr)
}

/// Refines the shoulder and elbow rotations so the wrists approach the given
/// targets. Never worsens the objective: if the final error exceeds the
/// initial one the input pose is returned unchanged.
pub fn refine_arms(
    pose: &PoseOutput,
    s: &Skeleton,
    left_target: Vec3,
    right_target: Vec3,
    cfg: &IkConfig,
) -> Result<PoseOutput> {
    if cfg.iters == 0 {
        return Ok(pose.clone());
    }
    let joints = arm_joints(s);
    let mut codes: Vec<[f64; 6]> = joints
        .iter()
        .map(|&j| matrix_to_6d(pose.local(j)).r)
        .collect();
    let mut adam: Vec<AdamState> = codes.iter().map(|_| AdamState::new(6)).collect();
    let adam_cfg = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };

    let initial_error = hand_error(s, pose, left_target, right_target);
    for _ in 0..cfg.iters {
        let mut tape = Tape::new();
        let code_vars: Vec<_> = codes
            .iter()
            .map(|c| tape.leaf(&crate::autodiff::Tensor::from_vec(&[6], c.to_vec())))
            .collect();
        // frozen rotations enter as constants; the four optimized joints are
        // recovered from their leaf codes
        let global = tape.constant(
            &[3, 3],
            pose.global_orient
                .rows()
                .iter()
                .flatten()
                .cloned()
                .collect(),
        );
        let mut locals = Vec::with_capacity(pose.local_rot.len());
        for j in 1..s.joint_count() {
            if let Some(k) = joints.iter().position(|&a| a == j) {
                locals.push(recover_6d_var(&mut tape, code_vars[k])?);
            } else {
                locals.push(tape.constant(
                    &[3, 3],
                    pose.local(j).rows().iter().flatten().cloned().collect(),
                ));
            }
        }
        let root = tape.constant(&[3], pose.root_pos.to_vec());
        let positions = fk_positions_var(&mut tape, s, global, &locals, root)?;
        let left_const = tape.constant(&[3], left_target.to_vec());
        let right_const = tape.constant(&[3], right_target.to_vec());
        let el = tape.l2_loss(positions[s.left_hand_index], left_const)?;
        let er = tape.l2_loss(positions[s.right_hand_index], right_const)?;
        let objective = tape.add(el, er)?;
        tape.backward(objective)?;
        for (k, code) in codes.iter_mut().enumerate() {
            let Some(grad) = tape.grad(code_vars[k]) else {
                continue;
            };
            match cfg.optimizer {
                IkOptimizer::Adam => adam_step(code, grad, &mut adam[k], &adam_cfg),
                IkOptimizer::GradientDescent => {
                    for (c, g) in code.iter_mut().zip(grad) {
                        *c -= cfg.lr * g;
                    }
                }
            }
        }
    }

    let mut refined = pose.clone();
    for (k, &j) in joints.iter().enumerate() {
        refined.local_rot[j - 1] = recover_6d(&Rotation6D::new(codes[k]))?;
    }
    let final_error = hand_error(s, &refined, left_target, right_target);
    if final_error > initial_error {
        return Ok(pose.clone());
    }
    Ok(refined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::{axis_angle_to_matrix, AxisAngle};

    fn bent_pose() -> PoseOutput {
        let mut pose = PoseOutput::rest([0.0, 0.95, 0.0]);
        pose.local_rot[15] = axis_angle_to_matrix(AxisAngle::new([0.0, 0.0, 0.5])).unwrap();
        pose.local_rot[17] = axis_angle_to_matrix(AxisAngle::new([0.0, 0.4, 0.0])).unwrap();
        pose.local_rot[16] = axis_angle_to_matrix(AxisAngle::new([0.0, 0.0, -0.5])).unwrap();
        pose.local_rot[18] = axis_angle_to_matrix(AxisAngle::new([0.0, -0.4, 0.0])).unwrap();
        pose
    }

    fn hand_targets(s: &Skeleton, pose: &PoseOutput) -> (Vec3, Vec3) {
        let st = forward_kinematics(s, pose);
        (st.pos[s.left_hand_index], st.pos[s.right_hand_index])
    }

    #[test]
    fn already_optimal_pose_is_untouched() {
        let s = Skeleton::default_rig();
        let pose = bent_pose();
        let (l, r) = hand_targets(&s, &pose);
        let refined = refine_arms(&pose, &s, l, r, &IkConfig::default()).unwrap();
        // zero gradient: the optimized codes never move, recovery reproduces
        // the rotations within Gram-Schmidt roundoff
        for (a, b) in pose.local_rot.iter().zip(&refined.local_rot) {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((a.rows()[i][j] - b.rows()[i][j]).abs() < 1e-9);
                }
            }
        }
        assert_eq!(pose.root_pos, refined.root_pos);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let s = Skeleton::default_rig();
        let pose = bent_pose();
        let cfg = IkConfig {
            iters: 0,
            ..IkConfig::default()
        };
        let refined = refine_arms(&pose, &s, [9.0; 3], [-9.0; 3], &cfg).unwrap();
        assert_eq!(pose, refined);
    }

    #[test]
    fn perturbed_elbow_recovers_against_targets() {
        let s = Skeleton::default_rig();
        let truth = bent_pose();
        let (l, r) = hand_targets(&s, &truth);
        let mut perturbed = truth.clone();
        let bump = axis_angle_to_matrix(AxisAngle::new([0.0, 0.1, 0.0])).unwrap();
        perturbed.local_rot[17] = perturbed.local_rot[17].mul(&bump); // left elbow
        let before = hand_error(&s, &perturbed, l, r);
        assert!(before > 1e-6);
        let cfg = IkConfig {
            lr: 1e-2,
            iters: 50,
            optimizer: IkOptimizer::Adam,
        };
        let refined = refine_arms(&perturbed, &s, l, r, &cfg).unwrap();
        let after = hand_error(&s, &refined, l, r);
        // >= 90% reduction of the positional error; hand_error is squared
        assert!(
            after <= 0.01 * before,
            "hand error only fell from {before:.3e} to {after:.3e}"
        );
    }

    #[test]
    fn frozen_joints_are_bit_identical() {
        let s = Skeleton::default_rig();
        let pose = bent_pose();
        let (l, r) = hand_targets(&s, &pose);
        let targets = (
            vec3::add(l, [0.05, 0.02, -0.03]),
            vec3::add(r, [-0.04, 0.0, 0.05]),
        );
        let refined = refine_arms(&pose, &s, targets.0, targets.1, &IkConfig::default()).unwrap();
        let joints = arm_joints(&s);
        for j in 1..s.joint_count() {
            if !joints.contains(&j) {
                assert_eq!(
                    pose.local(j).rows(),
                    refined.local(j).rows(),
                    "joint {j} rotation moved"
                );
            }
        }
        assert_eq!(pose.root_pos, refined.root_pos);
        assert_eq!(pose.global_orient.rows(), refined.global_orient.rows());
        // world positions outside the arm chains are bit-identical
        let before = forward_kinematics(&s, &pose);
        let after = forward_kinematics(&s, &refined);
        let moved: Vec<usize> = joints.iter().flat_map(|&j| s.descendants(j)).collect();
        for j in 0..s.joint_count() {
            if !moved.contains(&j) {
                for k in 0..3 {
                    assert_eq!(
                        before.pos[j][k].to_bits(),
                        after.pos[j][k].to_bits(),
                        "joint {j} position moved"
                    );
                }
            }
        }
    }

    #[test]
    fn monotone_safeguard_never_worsens() {
        let s = Skeleton::default_rig();
        let pose = bent_pose();
        let (l, r) = hand_targets(&s, &pose);
        // unreachable targets force convergence toward the closest point;
        // a huge learning rate would otherwise make things worse
        let cfg = IkConfig {
            lr: 10.0,
            iters: 3,
            optimizer: IkOptimizer::GradientDescent,
        };
        let targets = (
            vec3::add(l, [2.0, 0.0, 0.0]),
            vec3::add(r, [-2.0, 0.0, 0.0]),
        );
        let before = hand_error(&s, &pose, targets.0, targets.1);
        let refined = refine_arms(&pose, &s, targets.0, targets.1, &cfg).unwrap();
        let after = hand_error(&s, &refined, targets.0, targets.1);
        assert!(after <= before);
    }

    #[test]
    fn gradient_descent_variant_improves_too() {
        let s = Skeleton::default_rig();
        let truth = bent_pose();
        let (l, r) = hand_targets(&s, &truth);
        let mut perturbed = truth.clone();
        let bump = axis_angle_to_matrix(AxisAngle::new([0.08, 0.0, 0.0])).unwrap();
        perturbed.local_rot[15] = perturbed.local_rot[15].mul(&bump);
        let before = hand_error(&s, &perturbed, l, r);
        let cfg = IkConfig {
            lr: 0.5,
            iters: 40,
            optimizer: IkOptimizer::GradientDescent,
        };
        let refined = refine_arms(&perturbed, &s, l, r, &cfg).unwrap();
        let after = hand_error(&s, &refined, l, r);
        assert!(after < before);
    }
}
