//! Motion clips: storage formats, synthetic generation, tracker extraction,
//! resampling, and dataset splitting.
//!
//! The binary clip container is the canonical form (bit-exact round trips);
//! a line-oriented text variant exists for fixtures. Tracker streams reuse
//! the same container layout with per-device records.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::TrackerFrame;
use crate::rng::Rng64;
use crate::rotations::{axis_angle_to_matrix, matrix_to_axis_angle, AxisAngle};
use crate::skeleton::{forward_kinematics, PoseOutput, Skeleton, LOCAL_JOINT_COUNT};
use crate::vec3::{self, Vec3};

/// One stored frame: root position, global orientation, and the 21 local
/// joint rotations, all rotations in canonical axis-angle form.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipFrame {
    pub root_pos: Vec3,
    pub global_orient: AxisAngle,
    pub local_rot: Vec<AxisAngle>,
}

/// A time-indexed ground-truth motion at a fixed frame rate; the unit of
/// training and evaluation data.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    pub fps: f64,
    pub skeleton_hash: u64,
    pub frames: Vec<ClipFrame>,
}

impl MotionClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn pose(&self, i: usize) -> Result<PoseOutput> {
        let f = &self.frames[i];
        Ok(PoseOutput {
            global_orient: axis_angle_to_matrix(f.global_orient)?,
            local_rot: f
                .local_rot
                .iter()
                .map(|a| axis_angle_to_matrix(*a))
                .collect::<Result<_>>()?,
            root_pos: f.root_pos,
        })
    }

    pub fn poses(&self) -> Result<Vec<PoseOutput>> {
        (0..self.len()).map(|i| self.pose(i)).collect()
    }
}

/// Simulated device observations extracted from ground truth: world pose of
/// the head and both wrists per frame, device order (head, left, right).
pub fn extract_trackers(clip: &MotionClip, s: &Skeleton) -> Result<Vec<Vec<TrackerFrame>>> {
    let mut out = Vec::with_capacity(clip.len());
    for i in 0..clip.len() {
        let state = forward_kinematics(s, &clip.pose(i)?);
        out.push(
            [s.head_index, s.left_hand_index, s.right_hand_index]
                .iter()
                .map(|&j| TrackerFrame {
                    pos: state.pos[j],
                    orient: state.orient[j],
                })
                .collect(),
        );
    }
    Ok(out)
}

/// Synthetic motion families. Stand-ins for captured data: smooth sinusoidal
/// joint trajectories with per-seed amplitude and phase variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    WalkCycle,
    ArmWave,
    Squat,
    HeadTurn,
    Composite,
}

impl MotionKind {
    pub const ALL: [MotionKind; 5] = [
        MotionKind::WalkCycle,
        MotionKind::ArmWave,
        MotionKind::Squat,
        MotionKind::HeadTurn,
        MotionKind::Composite,
    ];

    pub fn parse(name: &str) -> Result<MotionKind> {
        match name {
            "walk-cycle" => Ok(MotionKind::WalkCycle),
            "arm-wave" => Ok(MotionKind::ArmWave),
            "squat" => Ok(MotionKind::Squat),
            "head-turn" => Ok(MotionKind::HeadTurn),
            "composite" => Ok(MotionKind::Composite),
            other => Err(Error::InvalidArgument(format!(
                "unknown motion kind '{other}' (walk-cycle, arm-wave, squat, head-turn, composite)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MotionKind::WalkCycle => "walk-cycle",
            MotionKind::ArmWave => "arm-wave",
            MotionKind::Squat => "squat",
            MotionKind::HeadTurn => "head-turn",
            MotionKind::Composite => "composite",
        }
    }
}

// joint indices of the default rig
const L_HIP: usize = 1;
const R_HIP: usize = 2;
const SPINE1: usize = 3;
const L_KNEE: usize = 4;
const R_KNEE: usize = 5;
const L_ANKLE: usize = 7;
const R_ANKLE: usize = 8;
const NECK: usize = 12;
const HEAD: usize = 15;
const L_SHOULDER: usize = 16;
const R_SHOULDER: usize = 17;
const L_ELBOW: usize = 18;
const R_ELBOW: usize = 19;

struct MotionParams {
    freq: f64,
    phase: f64,
    leg_amp: f64,
    arm_amp: f64,
    bend_amp: f64,
    head_amp: f64,
    speed: f64,
}

impl MotionParams {
    fn from_seed(rng: &mut Rng64) -> MotionParams {
        MotionParams {
            freq: rng.uniform(0.7, 1.3),
            phase: rng.uniform(0.0, std::f64::consts::TAU),
            leg_amp: rng.uniform(0.35, 0.6),
            arm_amp: rng.uniform(0.3, 0.7),
            bend_amp: rng.uniform(0.4, 0.8),
            head_amp: rng.uniform(0.4, 0.8),
            speed: rng.uniform(0.7, 1.3),
        }
    }
}

/// Procedurally generates a clip. Same seed, same clip, bit for bit.
pub fn synth_motion(
    kind: MotionKind,
    duration_s: f64,
    seed: u64,
    fps: f64,
    s: &Skeleton,
) -> Result<MotionClip> {
    if duration_s <= 0.0 || fps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "duration {duration_s} s and fps {fps} must be positive"
        )));
    }
    let n = (duration_s * fps).round() as usize;
    // fold the kind name into the stream so equal seeds of different kinds
    // draw independent parameters
    let kind_tag = kind
        .name()
        .bytes()
        .fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
    let mut rng = Rng64::new(seed ^ kind_tag.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let p = MotionParams::from_seed(&mut rng);
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fps;
        frames.push(frame_for(kind, t, &p));
    }
    Ok(MotionClip {
        fps,
        skeleton_hash: s.hash(),
        frames,
    })
}

fn rest_frame() -> ClipFrame {
    ClipFrame {
        root_pos: [0.0, 0.95, 0.0],
        global_orient: AxisAngle::IDENTITY,
        local_rot: vec![AxisAngle::IDENTITY; LOCAL_JOINT_COUNT],
    }
}

fn set_local(frame: &mut ClipFrame, joint: usize, axis: Vec3, angle: f64) {
    frame.local_rot[joint - 1] = AxisAngle::new(vec3::scale(axis, angle));
}

fn add_local(frame: &mut ClipFrame, joint: usize, axis: Vec3, angle: f64) {
    let cur = frame.local_rot[joint - 1].v;
    frame.local_rot[joint - 1] = AxisAngle::new(vec3::add(cur, vec3::scale(axis, angle)));
}

const X: Vec3 = [1.0, 0.0, 0.0];
const Y: Vec3 = [0.0, 1.0, 0.0];
const Z: Vec3 = [0.0, 0.0, 1.0];

fn walk_into(f: &mut ClipFrame, t: f64, p: &MotionParams, weight: f64) {
    let w = std::f64::consts::TAU * p.freq;
    let phi = w * t + p.phase;
    let leg = p.leg_amp * weight;
    let arm = p.arm_amp * weight * 0.6;
    add_local(f, L_HIP, X, leg * phi.sin());
    add_local(f, R_HIP, X, -leg * phi.sin());
    add_local(f, L_KNEE, X, 0.5 * leg * (1.0 - (phi + 0.5).cos()));
    add_local(f, R_KNEE, X, 0.5 * leg * (1.0 + (phi + 0.5).cos()));
    add_local(f, L_ANKLE, X, -0.2 * leg * phi.sin());
    add_local(f, R_ANKLE, X, 0.2 * leg * phi.sin());
    // arms counter-swing; rest pose holds the arms along +-x, so a rotation
    // about y moves the hands forward and back
    add_local(f, L_SHOULDER, Y, -arm * phi.sin());
    add_local(f, R_SHOULDER, Y, -arm * phi.sin());
    add_local(f, L_ELBOW, Y, -0.4 * arm * (1.0 - (phi).cos()));
    add_local(f, R_ELBOW, Y, -0.4 * arm * (1.0 + (phi).cos()));
    add_local(f, SPINE1, Y, 0.08 * weight * phi.sin());
    let speed = p.speed * weight;
    f.root_pos = vec3::add(
        f.root_pos,
        [
            0.015 * weight * phi.sin(),
            0.02 * weight * (2.0 * phi).sin(),
            speed * t,
        ],
    );
}

fn arm_wave_into(f: &mut ClipFrame, t: f64, p: &MotionParams, weight: f64) {
    let w = std::f64::consts::TAU * p.freq;
    let phi = w * t + p.phase;
    let a = p.arm_amp * weight;
    // raise the arms (rotation about z lifts a +-x limb) and wave
    add_local(f, L_SHOULDER, Z, a * (0.8 + 0.5 * phi.sin()));
    add_local(f, R_SHOULDER, Z, -a * (0.8 + 0.5 * (phi + 0.7).sin()));
    add_local(f, L_ELBOW, Z, 0.6 * a * (1.3 * phi).sin());
    add_local(f, R_ELBOW, Z, -0.6 * a * (1.3 * phi + 0.4).sin());
    add_local(f, SPINE1, Z, 0.05 * weight * phi.sin());
}

fn squat_into(f: &mut ClipFrame, t: f64, p: &MotionParams, weight: f64) {
    let w = std::f64::consts::TAU * p.freq * 0.5;
    let phi = w * t + p.phase;
    let bend = p.bend_amp * weight * 0.5 * (1.0 - phi.cos());
    add_local(f, L_HIP, X, -bend);
    add_local(f, R_HIP, X, -bend);
    add_local(f, L_KNEE, X, 1.8 * bend);
    add_local(f, R_KNEE, X, 1.8 * bend);
    add_local(f, L_ANKLE, X, -0.8 * bend);
    add_local(f, R_ANKLE, X, -0.8 * bend);
    add_local(f, SPINE1, X, 0.3 * bend);
    f.root_pos = vec3::add(f.root_pos, [0.0, -0.35 * bend, 0.0]);
}

fn head_turn_into(f: &mut ClipFrame, t: f64, p: &MotionParams, weight: f64) {
    let w = std::f64::consts::TAU * p.freq;
    let phi = w * t + p.phase;
    let a = p.head_amp * weight;
    set_local(f, NECK, Y, 0.45 * a * phi.sin());
    set_local(f, HEAD, Y, 0.55 * a * (phi - 0.3).sin());
    add_local(f, HEAD, X, 0.15 * a * (0.7 * phi).sin());
}

fn frame_for(kind: MotionKind, t: f64, p: &MotionParams) -> ClipFrame {
    let mut f = rest_frame();
    match kind {
        MotionKind::WalkCycle => walk_into(&mut f, t, p, 1.0),
        MotionKind::ArmWave => arm_wave_into(&mut f, t, p, 1.0),
        MotionKind::Squat => squat_into(&mut f, t, p, 1.0),
        MotionKind::HeadTurn => head_turn_into(&mut f, t, p, 1.0),
        MotionKind::Composite => {
            walk_into(&mut f, t, p, 0.6);
            arm_wave_into(&mut f, t, p, 0.4);
            head_turn_into(&mut f, t, p, 0.5);
            f.global_orient = AxisAngle::new([
                0.0,
                0.15 * (std::f64::consts::TAU * 0.1 * p.freq * t).sin(),
                0.0,
            ]);
        }
    }
    f
}

/// Rate conversion: root positions interpolate linearly, rotations along the
/// shortest geodesic between neighbouring frames.
pub fn resample(clip: &MotionClip, target_fps: f64) -> Result<MotionClip> {
    if target_fps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target fps {target_fps} must be positive"
        )));
    }
    if clip.len() < 2 {
        return Err(Error::InvalidArgument(
            "cannot resample a clip with fewer than 2 frames".into(),
        ));
    }
    let n_src = clip.len();
    let duration = n_src as f64 / clip.fps;
    let n_dst = (duration * target_fps).round() as usize;
    let lerp_rot = |a: AxisAngle, b: AxisAngle, w: f64| -> Result<AxisAngle> {
        let ra = axis_angle_to_matrix(a)?;
        let rb = axis_angle_to_matrix(b)?;
        let rel = matrix_to_axis_angle(&ra.transpose().mul(&rb));
        let step = axis_angle_to_matrix(AxisAngle::new(vec3::scale(rel.v, w)))?;
        Ok(matrix_to_axis_angle(&ra.mul(&step)))
    };
    let mut frames = Vec::with_capacity(n_dst);
    for j in 0..n_dst {
        let x = (j as f64 / target_fps) * clip.fps;
        let i0 = (x.floor() as usize).min(n_src - 1);
        let i1 = (i0 + 1).min(n_src - 1);
        let w = (x - i0 as f64).clamp(0.0, 1.0);
        let (f0, f1) = (&clip.frames[i0], &clip.frames[i1]);
        let root_pos = vec3::add(
            vec3::scale(f0.root_pos, 1.0 - w),
            vec3::scale(f1.root_pos, w),
        );
        let global_orient = lerp_rot(f0.global_orient, f1.global_orient, w)?;
        let local_rot = f0
            .local_rot
            .iter()
            .zip(&f1.local_rot)
            .map(|(a, b)| lerp_rot(*a, *b, w))
            .collect::<Result<_>>()?;
        frames.push(ClipFrame {
            root_pos,
            global_orient,
            local_rot,
        });
    }
    Ok(MotionClip {
        fps: target_fps,
        skeleton_hash: clip.skeleton_hash,
        frames,
    })
}

/// Disjoint train/test index split via a seeded shuffle.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

pub const DEFAULT_TRAIN_RATIO: f64 = 0.9;

pub fn split_dataset(n_clips: usize, train_ratio: f64, seed: u64) -> DatasetSplit {
    let mut indices: Vec<usize> = (0..n_clips).collect();
    let mut rng = Rng64::new(seed);
    rng.shuffle(&mut indices);
    let n_train = ((n_clips as f64) * train_ratio).round() as usize;
    let n_train = n_train.min(n_clips);
    let test = indices.split_off(n_train);
    DatasetSplit {
        train: indices,
        test,
        seed,
    }
}

// ---------------------------------------------------------------------------
// Containers. Both share the header layout (magic, version, fps, record
// arity, skeleton hash, frame count) followed by little-endian f64 records.
// ---------------------------------------------------------------------------

const CLIP_MAGIC: &[u8; 8] = b"SPMC0001";
const STREAM_MAGIC: &[u8; 8] = b"SPTS0001";
const CLIP_RECORD: usize = 3 + 3 + LOCAL_JOINT_COUNT * 3; // 69 values

fn write_header(buf: &mut Vec<u8>, magic: &[u8; 8], fps: f64, arity: u32, hash: u64, n: u64) {
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&fps.to_le_bytes());
    buf.extend_from_slice(&arity.to_le_bytes());
    buf.extend_from_slice(&hash.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
}

pub fn write_clip(clip: &MotionClip, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(40 + clip.len() * CLIP_RECORD * 8);
    write_header(
        &mut buf,
        CLIP_MAGIC,
        clip.fps,
        CLIP_RECORD as u32,
        clip.skeleton_hash,
        clip.len() as u64,
    );
    for f in &clip.frames {
        for x in f.root_pos.iter().chain(f.global_orient.v.iter()) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for a in &f.local_rot {
            for x in &a.v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_clip(path: &Path) -> Result<MotionClip> {
    let bytes = std::fs::read(path)?;
    let mut r = crate::wire::Cursor::new(&bytes);
    let magic = r.take_n(8)?;
    if magic != CLIP_MAGIC {
        return Err(Error::Parse(format!(
            "{} is not a motion clip (bad magic)",
            path.display()
        )));
    }
    let fps = r.f64()?;
    let arity = r.u32()? as usize;
    if arity != CLIP_RECORD {
        return Err(Error::ConfigMismatch(format!(
            "clip record arity {arity}, expected {CLIP_RECORD}"
        )));
    }
    let skeleton_hash = r.u64()?;
    let n = r.u64()? as usize;
    let mut frames = Vec::with_capacity(n);
    for _ in 0..n {
        let mut vals = [0.0; CLIP_RECORD];
        for v in vals.iter_mut() {
            *v = r.f64()?;
        }
        frames.push(ClipFrame {
            root_pos: [vals[0], vals[1], vals[2]],
            global_orient: AxisAngle {
                v: [vals[3], vals[4], vals[5]],
            },
            local_rot: vals[6..]
                .chunks_exact(3)
                .map(|c| AxisAngle {
                    v: [c[0], c[1], c[2]],
                })
                .collect(),
        });
    }
    if !r.done() {
        return Err(Error::Parse("trailing bytes after clip payload".into()));
    }
    Ok(MotionClip {
        fps,
        skeleton_hash,
        frames,
    })
}

/// Text fixture variant: `#` comments, `fps`/`joints`/`skeleton`/`frames`
/// header lines, then one frame per line as 69 decimal values in the order
/// root_pos(3), global axis-angle(3), 21 local axis-angles(3 each).
pub fn write_clip_text(clip: &MotionClip, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("# motion clip fixture: root_pos(3) global_aa(3) local_aa(21x3) per line\n");
    out.push_str(&format!("fps {}\n", clip.fps));
    out.push_str(&format!("joints {}\n", LOCAL_JOINT_COUNT + 1));
    out.push_str(&format!("skeleton {:016x}\n", clip.skeleton_hash));
    out.push_str(&format!("frames {}\n", clip.len()));
    for f in &clip.frames {
        let mut fields: Vec<String> = Vec::with_capacity(CLIP_RECORD);
        for x in f.root_pos.iter().chain(f.global_orient.v.iter()) {
            fields.push(format!("{x}"));
        }
        for a in &f.local_rot {
            for x in &a.v {
                fields.push(format!("{x}"));
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_clip_text(path: &Path) -> Result<MotionClip> {
    let text = std::fs::read_to_string(path)?;
    let mut fps = None;
    let mut hash = None;
    let mut expected_frames = None;
    let mut frames = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
        match first {
            "fps" => {
                fps = Some(
                    fields
                        .next()
                        .ok_or_else(|| bad("missing fps value"))?
                        .parse::<f64>()
                        .map_err(|_| bad("bad fps value"))?,
                )
            }
            "joints" => {
                let j: usize = fields
                    .next()
                    .ok_or_else(|| bad("missing joint count"))?
                    .parse()
                    .map_err(|_| bad("bad joint count"))?;
                if j != LOCAL_JOINT_COUNT + 1 {
                    return Err(Error::ConfigMismatch(format!(
                        "clip has {j} joints, expected {}",
                        LOCAL_JOINT_COUNT + 1
                    )));
                }
            }
            "skeleton" => {
                hash = Some(
                    u64::from_str_radix(
                        fields.next().ok_or_else(|| bad("missing skeleton hash"))?,
                        16,
                    )
                    .map_err(|_| bad("bad skeleton hash"))?,
                )
            }
            "frames" => {
                expected_frames = Some(
                    fields
                        .next()
                        .ok_or_else(|| bad("missing frame count"))?
                        .parse::<usize>()
                        .map_err(|_| bad("bad frame count"))?,
                )
            }
            _ => {
                let mut vals = Vec::with_capacity(CLIP_RECORD);
                vals.push(first.parse::<f64>().map_err(|_| bad("bad frame value"))?);
                for f in fields {
                    vals.push(f.parse::<f64>().map_err(|_| bad("bad frame value"))?);
                }
                if vals.len() != CLIP_RECORD {
                    return Err(bad(&format!(
                        "expected {CLIP_RECORD} values, got {}",
                        vals.len()
                    )));
                }
                frames.push(ClipFrame {
                    root_pos: [vals[0], vals[1], vals[2]],
                    global_orient: AxisAngle {
                        v: [vals[3], vals[4], vals[5]],
                    },
                    local_rot: vals[6..]
                        .chunks_exact(3)
                        .map(|c| AxisAngle {
                            v: [c[0], c[1], c[2]],
                        })
                        .collect(),
                });
            }
        }
    }
    if let Some(n) = expected_frames {
        if n != frames.len() {
            return Err(Error::Parse(format!(
                "header declares {n} frames, file has {}",
                frames.len()
            )));
        }
    }
    Ok(MotionClip {
        fps: fps.ok_or_else(|| Error::Parse("missing fps header".into()))?,
        skeleton_hash: hash.ok_or_else(|| Error::Parse("missing skeleton header".into()))?,
        frames,
    })
}

/// Raw tracked-device stream: per frame, one (position, orientation)
/// observation per device, device order (head, left hand, right hand).
#[derive(Debug, Clone)]
pub struct TrackerStreamFile {
    pub fps: f64,
    pub skeleton_hash: u64,
    pub frames: Vec<Vec<TrackerFrame>>,
}

pub fn write_tracker_stream(stream: &TrackerStreamFile, path: &Path) -> Result<()> {
    let devices = stream.frames.first().map(|f| f.len()).unwrap_or(0);
    let record = devices * 6;
    let mut buf = Vec::with_capacity(40 + stream.frames.len() * record * 8);
    write_header(
        &mut buf,
        STREAM_MAGIC,
        stream.fps,
        record as u32,
        stream.skeleton_hash,
        stream.frames.len() as u64,
    );
    for frame in &stream.frames {
        for device in frame {
            let aa = matrix_to_axis_angle(&device.orient);
            for x in device.pos.iter().chain(aa.v.iter()) {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_tracker_stream(path: &Path) -> Result<TrackerStreamFile> {
    let bytes = std::fs::read(path)?;
    let mut r = crate::wire::Cursor::new(&bytes);
    let magic = r.take_n(8)?;
    if magic != STREAM_MAGIC {
        return Err(Error::Parse(format!(
            "{} is not a tracker stream (bad magic)",
            path.display()
        )));
    }
    let fps = r.f64()?;
    let record = r.u32()? as usize;
    if record % 6 != 0 || record == 0 {
        return Err(Error::ConfigMismatch(format!(
            "tracker record arity {record} is not a multiple of 6"
        )));
    }
    let devices = record / 6;
    let skeleton_hash = r.u64()?;
    let n = r.u64()? as usize;
    let mut frames = Vec::with_capacity(n);
    for _ in 0..n {
        let mut frame = Vec::with_capacity(devices);
        for _ in 0..devices {
            let mut vals = [0.0; 6];
            for v in vals.iter_mut() {
                *v = r.f64()?;
            }
            frame.push(TrackerFrame {
                pos: [vals[0], vals[1], vals[2]],
                orient: axis_angle_to_matrix(AxisAngle {
                    v: [vals[3], vals[4], vals[5]],
                })?,
            });
        }
        frames.push(frame);
    }
    Ok(TrackerStreamFile {
        fps,
        skeleton_hash,
        frames,
    })
}

/// Reads every `.mc` clip in a directory, sorted by file name for
/// reproducible ordering.
pub fn read_clip_dir(dir: &Path) -> Result<Vec<MotionClip>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|e| e == "mc").unwrap_or(false))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_clip(p)).collect()
}
