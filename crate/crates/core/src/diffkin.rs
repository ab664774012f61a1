//! Differentiable kinematics: Gram-Schmidt 6D recovery and forward kinematics
//! expressed in tape primitives, so that position losses and the arm
//! refinement can backpropagate through rotation recovery and the joint tree.
//!
//! The plain-value counterparts live in [`crate::rotations`] and
//! [`crate::skeleton`]; these versions must agree with them exactly (same
//! formulas, same evaluation order), which the unit tests pin down.

use crate::autodiff::{Tape, Var};
use crate::error::Result;
use crate::skeleton::Skeleton;
use crate::vec3::Vec3;

/// Gram-Schmidt recovery of a rotation matrix (shape `[3,3]`) from a 6-value
/// code on the tape. Degenerate codes surface the same error as the plain
/// version.
pub fn recover_6d_var(tape: &mut Tape, code: Var) -> Result<Var> {
    let flat = if tape.shape(code).len() == 2 {
        tape.reshape(code, &[6])?
    } else {
        code
    };
    let a1 = tape.slice(flat, 0, 0, 3)?;
    let a2 = tape.slice(flat, 0, 3, 3)?;
    let b1 = tape.normalize(a1)?;
    let proj = tape.dot(a2, b1)?;
    let along = tape.mul_scalar(b1, proj)?;
    let u2 = tape.sub(a2, along)?;
    let b2 = tape.normalize(u2)?;
    let b3 = tape.cross(b1, b2)?;
    let rows = tape.concat(&[b1, b2, b3], 0)?;
    tape.reshape(rows, &[3, 3])
}

/// World joint positions (each shape `[3]`) for the whole tree.
///
/// `global_orient` is `[3,3]`, `local_rot` holds the 21 child-relative
/// rotations for joints `1..=21`, `root_pos` is `[3]`. Mirrors
/// [`crate::skeleton::forward_kinematics`] including its evaluation order.
pub fn fk_positions_var(
    tape: &mut Tape,
    s: &Skeleton,
    global_orient: Var,
    local_rot: &[Var],
    root_pos: Var,
) -> Result<Vec<Var>> {
    let n = s.joint_count();
    debug_assert_eq!(local_rot.len(), n - 1);
    let mut orient: Vec<Var> = Vec::with_capacity(n);
    let mut pos: Vec<Var> = Vec::with_capacity(n);
    orient.push(global_orient);
    pos.push(root_pos);
    for j in 1..n {
        let parent = s.parent[j].expect("non-root joint has a parent");
        let o = tape.matmul(orient[parent], local_rot[j - 1])?;
        orient.push(o);
        let offset = tape.constant(&[3], s.offset[j].to_vec());
        let limb = tape.matmul(orient[parent], offset)?;
        let p = tape.add(pos[parent], limb)?;
        pos.push(p);
    }
    Ok(pos)
}

/// Root position that pins the head joint to `head_pos_world`, plus the
/// resulting world positions of every joint. Gradients flow into the
/// rotations both through the bone chain and through the derived root.
pub fn fk_from_head_var(
    tape: &mut Tape,
    s: &Skeleton,
    global_orient: Var,
    local_rot: &[Var],
    head_pos_world: Vec3,
) -> Result<(Var, Vec<Var>)> {
    let zero = tape.constant(&[3], vec![0.0; 3]);
    let zero_rooted = fk_positions_var(tape, s, global_orient, local_rot, zero)?;
    let head_const = tape.constant(&[3], head_pos_world.to_vec());
    let root = tape.sub(head_const, zero_rooted[s.head_index])?;
    let mut pos = Vec::with_capacity(zero_rooted.len());
    for p0 in &zero_rooted {
        pos.push(tape.add(*p0, root)?);
    }
    Ok((root, pos))
}
