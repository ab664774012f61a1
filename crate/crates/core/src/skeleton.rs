//! 22-joint kinematic tree, forward kinematics, and root recovery from the
//! tracked head position.

use crate::error::{Error, Result};
use crate::rotations::RotMatrix;
use crate::vec3::{self, Vec3};

pub const JOINT_COUNT: usize = 22;
pub const LOCAL_JOINT_COUNT: usize = JOINT_COUNT - 1;

/// Kinematic tree: parent indices in topological order (parent[i] < i for
/// every non-root joint, root at index 0) and rest-pose bone offsets in the
/// parent frame.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub names: Vec<String>,
    pub parent: Vec<Option<usize>>,
    pub offset: Vec<Vec3>,
    pub root_index: usize,
    pub head_index: usize,
    pub left_hand_index: usize,
    pub right_hand_index: usize,
}

const DEFAULT_CONFIG: &str = include_str!("../data/skeleton_default.txt");

impl Skeleton {
    /// The built-in desk rig (also shipped as `data/skeleton_default.txt`).
    pub fn default_rig() -> Skeleton {
        Skeleton::parse_config(DEFAULT_CONFIG).expect("built-in skeleton config is valid")
    }

    /// Parses the plain-text config: one `name parent x y z` line per joint,
    /// `#` comments, parent given as index with -1 for the root.
    pub fn parse_config(text: &str) -> Result<Skeleton> {
        let mut names = Vec::new();
        let mut parent = Vec::new();
        let mut offset = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!(
                    "skeleton line {}: expected 5 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let idx = names.len();
            let p: i64 = fields[1]
                .parse()
                .map_err(|e| Error::Parse(format!("skeleton line {}: {e}", lineno + 1)))?;
            let parse_f = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("skeleton line {}: {e}", lineno + 1)))
            };
            let o = [
                parse_f(fields[2])?,
                parse_f(fields[3])?,
                parse_f(fields[4])?,
            ];
            if p < 0 {
                if idx != 0 {
                    return Err(Error::Parse(format!(
                        "skeleton line {}: root must be the first joint",
                        lineno + 1
                    )));
                }
                parent.push(None);
            } else {
                let p = p as usize;
                if p >= idx {
                    return Err(Error::Parse(format!(
                        "skeleton line {}: parent {} is not earlier than joint {}",
                        lineno + 1,
                        p,
                        idx
                    )));
                }
                parent.push(Some(p));
            }
            names.push(fields[0].to_string());
            offset.push(o);
        }
        let find = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Parse(format!("skeleton config lacks joint '{name}'")))
        };
        let skeleton = Skeleton {
            root_index: 0,
            head_index: find("head")?,
            left_hand_index: find("left_wrist")?,
            right_hand_index: find("right_wrist")?,
            names,
            parent,
            offset,
        };
        if skeleton.names.len() != JOINT_COUNT {
            return Err(Error::Parse(format!(
                "expected {JOINT_COUNT} joints, got {}",
                skeleton.names.len()
            )));
        }
        Ok(skeleton)
    }

    pub fn load(path: &std::path::Path) -> Result<Skeleton> {
        Skeleton::parse_config(&std::fs::read_to_string(path)?)
    }

    pub fn joint_count(&self) -> usize {
        self.names.len()
    }

    /// Chain of joints from the root (exclusive) down to `joint` (inclusive).
    pub fn chain_to(&self, joint: usize) -> Vec<usize> {
        let mut chain = Vec::new();
        let mut j = joint;
        while let Some(p) = self.parent[j] {
            chain.push(j);
            j = p;
        }
        chain.reverse();
        chain
    }

    /// All joints whose chain passes through `ancestor` (excluding it).
    pub fn descendants(&self, ancestor: usize) -> Vec<usize> {
        (0..self.joint_count())
            .filter(|&j| {
                let mut k = j;
                while let Some(p) = self.parent[k] {
                    if p == ancestor {
                        return true;
                    }
                    k = p;
                }
                false
            })
            .collect()
    }

    /// FNV-1a over the canonical serialization; stored in clip headers so a
    /// clip recorded against one rig is not silently evaluated against another.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for i in 0..self.joint_count() {
            eat(self.names[i].as_bytes());
            let p = self.parent[i].map(|p| p as i64).unwrap_or(-1);
            eat(&p.to_le_bytes());
            for c in self.offset[i] {
                eat(&c.to_bits().to_le_bytes());
            }
        }
        h
    }
}

/// One body pose: pelvis world orientation, 21 child-relative joint rotations
/// (joint indices 1..=21), and the pelvis world position. The root's own
/// local rotation is folded into `global_orient`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseOutput {
    pub global_orient: RotMatrix,
    pub local_rot: Vec<RotMatrix>,
    pub root_pos: Vec3,
}

impl PoseOutput {
    pub fn rest(root_pos: Vec3) -> PoseOutput {
        PoseOutput {
            global_orient: RotMatrix::IDENTITY,
            local_rot: vec![RotMatrix::IDENTITY; LOCAL_JOINT_COUNT],
            root_pos,
        }
    }

    /// World orientation/position of every joint.
    pub fn local(&self, joint: usize) -> &RotMatrix {
        &self.local_rot[joint - 1]
    }
}

/// World-space result of forward kinematics.
#[derive(Debug, Clone)]
pub struct JointState {
    pub pos: Vec<Vec3>,
    pub orient: Vec<RotMatrix>,
}

/// Walks the tree in index order: each joint's world orientation is its
/// parent's orientation composed with the local rotation, and its position is
/// the parent position plus the parent-rotated rest offset.
pub fn forward_kinematics(s: &Skeleton, p: &PoseOutput) -> JointState {
    let n = s.joint_count();
    debug_assert_eq!(p.local_rot.len(), n - 1);
    let mut pos = vec![vec3::ZERO; n];
    let mut orient = vec![RotMatrix::IDENTITY; n];
    pos[s.root_index] = p.root_pos;
    orient[s.root_index] = p.global_orient;
    for j in 1..n {
        let parent = s.parent[j].expect("non-root joint has a parent");
        orient[j] = orient[parent].mul(p.local(j));
        pos[j] = vec3::add(pos[parent], orient[parent].apply(s.offset[j]));
    }
    JointState { pos, orient }
}

/// Pelvis position that places the head joint exactly at `head_pos_world`
/// under the given rotations: FK is run with the root at the origin and the
/// head's offset from the tracked position is returned.
pub fn root_from_head(
    s: &Skeleton,
    global_orient: &RotMatrix,
    local_rot: &[RotMatrix],
    head_pos_world: Vec3,
) -> Vec3 {
    let zero_rooted = PoseOutput {
        global_orient: *global_orient,
        local_rot: local_rot.to_vec(),
        root_pos: vec3::ZERO,
    };
    let state = forward_kinematics(s, &zero_rooted);
    vec3::sub(head_pos_world, state.pos[s.head_index])
}
