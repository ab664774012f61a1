//! C ABI for the streaming pose estimator.
//!
//! A session wraps a loaded checkpoint, a skeleton, and a rolling buffer of
//! tracker observations. Callers push one observation triple per frame; once
//! the buffer spans a full window (plus one frame for velocities) every push
//! yields a pose. Handles are opaque, results are error codes, and all
//! buffers use row-major doubles.

#![allow(clippy::needless_range_loop)]

use std::ffi::CStr;
use std::os::raw::{c_char, c_int};
use std::path::Path;

use sparsepose::features::TrackerFrame;
use sparsepose::ik::IkConfig;
use sparsepose::model::{decode, Checkpoint, ModelWeights, RawPrediction};
use sparsepose::rotations::RotMatrix;
use sparsepose::skeleton::{Skeleton, LOCAL_JOINT_COUNT};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    /// Success; any output parameters are filled.
    SpOk = 0,
    /// Not enough frames buffered yet; no pose was produced.
    SpPending = 1,
    /// A required pointer argument was null.
    SpNullArg = 2,
    /// A path was not valid UTF-8 or an argument was out of range.
    SpInvalidArg = 3,
    /// The checkpoint or skeleton file failed to load.
    SpLoadFailed = 4,
    /// Inference failed (degenerate rotation or shape error).
    SpInferFailed = 5,
}

/// One 6DoF device observation: world position and row-major 3x3 rotation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpObservation {
    pub pos: [f64; 3],
    pub orient: [f64; 9],
}

/// One predicted body pose: pelvis world position, row-major pelvis
/// orientation, and the 21 local joint rotations in joint-index order.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpPose {
    pub root_pos: [f64; 3],
    pub global_orient: [f64; 9],
    pub local_rot: [f64; 189],
}

/// Opaque streaming session.
pub struct SpSession {
    weights: ModelWeights,
    skeleton: Skeleton,
    ik: IkConfig,
    use_ik: bool,
    buffer: Vec<Vec<TrackerFrame>>,
}

fn matrix_from(values: &[f64; 9]) -> Result<RotMatrix, ()> {
    let m = [
        [values[0], values[1], values[2]],
        [values[3], values[4], values[5]],
        [values[6], values[7], values[8]],
    ];
    RotMatrix::from_rows(m).map_err(|_| ())
}

fn matrix_into(m: &RotMatrix, out: &mut [f64]) {
    for (i, row) in m.rows().iter().enumerate() {
        out[i * 3..i * 3 + 3].copy_from_slice(row);
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, SpStatus> {
    if ptr.is_null() {
        return Err(SpStatus::SpNullArg);
    }
    let s = CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| SpStatus::SpInvalidArg)?;
    Ok(Path::new(s))
}

/// Opens a session from a checkpoint. `skeleton_path` may be null to use the
/// built-in rig; `ik_iterations = 0` disables the arm refinement.
///
/// # Safety
/// `checkpoint_path` (and `skeleton_path` when non-null) must point to
/// nul-terminated strings; `out` must point to writable storage for one
/// pointer. The returned session must be released with [`sp_session_close`].
#[no_mangle]
pub unsafe extern "C" fn sp_session_open(
    checkpoint_path: *const c_char,
    skeleton_path: *const c_char,
    ik_iterations: c_int,
    out: *mut *mut SpSession,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::SpNullArg;
    }
    *out = std::ptr::null_mut();
    let ck_path = match path_from(checkpoint_path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let skeleton = if skeleton_path.is_null() {
        Skeleton::default_rig()
    } else {
        let sk_path = match path_from(skeleton_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match Skeleton::load(sk_path) {
            Ok(s) => s,
            Err(_) => return SpStatus::SpLoadFailed,
        }
    };
    if ik_iterations < 0 {
        return SpStatus::SpInvalidArg;
    }
    let checkpoint = match Checkpoint::load(ck_path) {
        Ok(c) => c,
        Err(_) => return SpStatus::SpLoadFailed,
    };
    let session = Box::new(SpSession {
        weights: checkpoint.weights,
        skeleton,
        ik: IkConfig {
            iters: ik_iterations as usize,
            ..IkConfig::default()
        },
        use_ik: ik_iterations > 0,
        buffer: Vec::new(),
    });
    *out = Box::into_raw(session);
    SpStatus::SpOk
}

/// Frees a session. Null is a no-op.
///
/// # Safety
/// `session` must be a pointer returned by [`sp_session_open`] that has not
/// been closed already.
#[no_mangle]
pub unsafe extern "C" fn sp_session_close(session: *mut SpSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Window length of the loaded model; the first pose appears after
/// `window + 1` pushed frames.
///
/// # Safety
/// `session` must be a live session pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_session_window(session: *const SpSession) -> u32 {
    if session.is_null() {
        return 0;
    }
    (*session).weights.cfg.window as u32
}

/// Pushes one frame of observations (head, left hand, right hand) and, once
/// warmed up, writes the predicted pose for this frame into `out_pose`.
///
/// Returns `SpPending` while the buffer is still filling.
///
/// # Safety
/// `session` must be a live session pointer, `obs` must point to three
/// observations, and `out_pose` must point to writable storage for one pose.
#[no_mangle]
pub unsafe extern "C" fn sp_session_push(
    session: *mut SpSession,
    obs: *const SpObservation,
    out_pose: *mut SpPose,
) -> SpStatus {
    if session.is_null() || obs.is_null() || out_pose.is_null() {
        return SpStatus::SpNullArg;
    }
    let session = &mut *session;
    let obs = std::slice::from_raw_parts(obs, 3);
    let mut frame = Vec::with_capacity(3);
    for o in obs {
        if !o.pos.iter().chain(o.orient.iter()).all(|x| x.is_finite()) {
            return SpStatus::SpInvalidArg;
        }
        let orient = match matrix_from(&o.orient) {
            Ok(m) => m,
            Err(()) => return SpStatus::SpInvalidArg,
        };
        frame.push(TrackerFrame { pos: o.pos, orient });
    }
    let window = session.weights.cfg.window;
    session.buffer.push(frame);
    if session.buffer.len() > window + 1 {
        session.buffer.remove(0);
    }
    if session.buffer.len() < window + 1 {
        return SpStatus::SpPending;
    }
    let windows = sparsepose::features::make_windows(&session.buffer, window, 1);
    let Some(w) = windows.last() else {
        return SpStatus::SpPending;
    };
    let current = session.buffer.last().expect("buffer is non-empty");
    let pred: RawPrediction = match session.weights.forward(w) {
        Ok(p) => p,
        Err(_) => return SpStatus::SpInferFailed,
    };
    let pose = match decode(&pred, &current[0], &session.skeleton) {
        Ok(p) => p,
        Err(_) => return SpStatus::SpInferFailed,
    };
    let pose = if session.use_ik {
        match sparsepose::ik::refine_arms(
            &pose,
            &session.skeleton,
            current[1].pos,
            current[2].pos,
            &session.ik,
        ) {
            Ok(p) => p,
            Err(_) => return SpStatus::SpInferFailed,
        }
    } else {
        pose
    };
    let out = &mut *out_pose;
    out.root_pos = pose.root_pos;
    matrix_into(&pose.global_orient, &mut out.global_orient);
    for (j, m) in pose.local_rot.iter().enumerate() {
        matrix_into(m, &mut out.local_rot[j * 9..j * 9 + 9]);
    }
    debug_assert_eq!(pose.local_rot.len(), LOCAL_JOINT_COUNT);
    SpStatus::SpOk
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sp_status_message(status: SpStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        SpStatus::SpOk => b"ok\0",
        SpStatus::SpPending => b"pending: not enough frames buffered\0",
        SpStatus::SpNullArg => b"null pointer argument\0",
        SpStatus::SpInvalidArg => b"invalid argument\0",
        SpStatus::SpLoadFailed => b"failed to load checkpoint or skeleton\0",
        SpStatus::SpInferFailed => b"inference failed\0",
    };
    msg.as_ptr() as *const c_char
}
