//! Evaluation metrics over predicted vs ground-truth pose sequences.
//!
//! MPJRE is the mean geodesic rotation distance in degrees over all 22 joints
//! (the pelvis compares global orientations). MPJPE is the mean Euclidean
//! distance of forward-kinematics joint positions in centimeters; MPJPE-Hand
//! restricts it to the wrists. MPJVE compares backward-difference velocities
//! of the FK positions in cm/s, skipping the first frame.

use std::path::Path;

use crate::error::{Error, Result};
use crate::rotations::geodesic_angle;
use crate::skeleton::{forward_kinematics, PoseOutput, Skeleton};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub mpjre_deg: f64,
    pub mpjpe_cm: f64,
    pub mpjpe_hand_cm: f64,
    pub mpjve_cm_s: f64,
    pub per_joint_mpjre_deg: Vec<f64>,
    pub per_joint_mpjpe_cm: Vec<f64>,
    pub joint_names: Vec<String>,
    pub frames: usize,
}

pub fn evaluate(
    pred: &[PoseOutput],
    gt: &[PoseOutput],
    s: &Skeleton,
    fps: f64,
) -> Result<EvalReport> {
    evaluate_many(&[(pred, gt)], s, fps)
}

/// Metrics pooled over several independent sequences (velocity differences
/// never cross a sequence boundary).
pub fn evaluate_many(
    pairs: &[(&[PoseOutput], &[PoseOutput])],
    s: &Skeleton,
    fps: f64,
) -> Result<EvalReport> {
    let n_joints = s.joint_count();
    let hands = [s.left_hand_index, s.right_hand_index];
    let mut rot_sum = vec![0.0; n_joints];
    let mut pos_sum = vec![0.0; n_joints];
    let mut vel_sum = 0.0;
    let mut hand_sum = 0.0;
    let mut n_frames = 0usize;
    let mut n_vel_frames = 0usize;

    for (pred, gt) in pairs {
        if pred.len() != gt.len() {
            return Err(Error::InvalidArgument(format!(
                "sequence lengths differ: {} predicted vs {} ground truth",
                pred.len(),
                gt.len()
            )));
        }
        let mut prev_pred: Vec<Vec3> = Vec::new();
        let mut prev_gt: Vec<Vec3> = Vec::new();
        for (p, g) in pred.iter().zip(*gt) {
            for j in 0..n_joints {
                let (rp, rg) = if j == s.root_index {
                    (&p.global_orient, &g.global_orient)
                } else {
                    (p.local(j), g.local(j))
                };
                rot_sum[j] += geodesic_angle(rp, rg).to_degrees();
            }
            let sp = forward_kinematics(s, p);
            let sg = forward_kinematics(s, g);
            for j in 0..n_joints {
                pos_sum[j] += vec3::norm(vec3::sub(sp.pos[j], sg.pos[j]));
            }
            for h in hands {
                hand_sum += vec3::norm(vec3::sub(sp.pos[h], sg.pos[h]));
            }
            if !prev_pred.is_empty() {
                for j in 0..n_joints {
                    let dv = vec3::sub(
                        vec3::sub(sp.pos[j], prev_pred[j]),
                        vec3::sub(sg.pos[j], prev_gt[j]),
                    );
                    vel_sum += vec3::norm(dv) * fps;
                }
                n_vel_frames += 1;
            }
            prev_pred = sp.pos;
            prev_gt = sg.pos;
        }
        n_frames += pred.len();
    }
    if n_frames == 0 {
        return Err(Error::InvalidArgument("empty sequences".into()));
    }

    let per_joint_mpjre_deg: Vec<f64> = rot_sum.iter().map(|x| x / n_frames as f64).collect();
    let per_joint_mpjpe_cm: Vec<f64> = pos_sum
        .iter()
        .map(|x| x / n_frames as f64 * 100.0)
        .collect();
    let mpjre_deg = per_joint_mpjre_deg.iter().sum::<f64>() / n_joints as f64;
    let mpjpe_cm = per_joint_mpjpe_cm.iter().sum::<f64>() / n_joints as f64;
    let mpjpe_hand_cm = hand_sum / (n_frames * hands.len()) as f64 * 100.0;
    let mpjve_cm_s = if n_vel_frames > 0 {
        vel_sum / (n_vel_frames * n_joints) as f64 * 100.0
    } else {
        0.0
    };
    Ok(EvalReport {
        mpjre_deg,
        mpjpe_cm,
        mpjpe_hand_cm,
        mpjve_cm_s,
        per_joint_mpjre_deg,
        per_joint_mpjpe_cm,
        joint_names: s.names.clone(),
        frames: n_frames,
    })
}

impl EvalReport {
    /// Aligned human-readable table, including the 22-row per-joint block.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<18} {:>12}\n", "metric", "value"));
        out.push_str(&format!("{:<18} {:>12.4}\n", "MPJRE [deg]", self.mpjre_deg));
        out.push_str(&format!("{:<18} {:>12.4}\n", "MPJPE [cm]", self.mpjpe_cm));
        out.push_str(&format!(
            "{:<18} {:>12.4}\n",
            "MPJPE-Hand [cm]", self.mpjpe_hand_cm
        ));
        out.push_str(&format!(
            "{:<18} {:>12.4}\n",
            "MPJVE [cm/s]", self.mpjve_cm_s
        ));
        out.push_str(&format!("{:<18} {:>12}\n", "frames", self.frames));
        out.push('\n');
        out.push_str(&format!(
            "{:<4} {:<16} {:>12} {:>12}\n",
            "idx", "joint", "MPJRE [deg]", "MPJPE [cm]"
        ));
        for j in 0..self.joint_names.len() {
            out.push_str(&format!(
                "{:<4} {:<16} {:>12.4} {:>12.4}\n",
                j, self.joint_names[j], self.per_joint_mpjre_deg[j], self.per_joint_mpjpe_cm[j]
            ));
        }
        out
    }

    /// Machine-readable `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mpjre_deg={}\n", self.mpjre_deg));
        out.push_str(&format!("mpjpe_cm={}\n", self.mpjpe_cm));
        out.push_str(&format!("mpjpe_hand_cm={}\n", self.mpjpe_hand_cm));
        out.push_str(&format!("mpjve_cm_s={}\n", self.mpjve_cm_s));
        out.push_str(&format!("frames={}\n", self.frames));
        for j in 0..self.joint_names.len() {
            out.push_str(&format!("joint.{j:02}.name={}\n", self.joint_names[j]));
            out.push_str(&format!(
                "joint.{j:02}.mpjre_deg={}\n",
                self.per_joint_mpjre_deg[j]
            ));
            out.push_str(&format!(
                "joint.{j:02}.mpjpe_cm={}\n",
                self.per_joint_mpjpe_cm[j]
            ));
        }
        out
    }

    pub fn write_files(&self, table_path: &Path, kv_path: &Path) -> Result<()> {
        std::fs::write(table_path, self.to_table())?;
        std::fs::write(kv_path, self.to_kv())?;
        Ok(())
    }
}
