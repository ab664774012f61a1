//! Per-frame input features and sliding windows over tracker streams.
//!
//! Each tracked device contributes 18 values per timestep: position (3),
//! linear velocity by backward difference (3), orientation as a 6D code (6),
//! and angular velocity as a 6D code (6). With the three standard devices
//! (head, left hand, right hand) a timestep is a 54-vector.

use crate::rotations::{angular_velocity, matrix_to_6d, RotMatrix};
use crate::vec3::{self, Vec3};

/// Number of tracked devices in the three-input setting.
pub const DEVICE_COUNT: usize = 3;
/// Feature width contributed by one device.
pub const PER_DEVICE_DIM: usize = 18;
/// Feature width for the standard three devices.
pub const FEATURE_DIM: usize = DEVICE_COUNT * PER_DEVICE_DIM;

/// One 6DoF observation of a tracked device.
#[derive(Debug, Clone, Copy)]
pub struct TrackerFrame {
    pub pos: Vec3,
    pub orient: RotMatrix,
}

impl TrackerFrame {
    pub fn identity() -> TrackerFrame {
        TrackerFrame {
            pos: vec3::ZERO,
            orient: RotMatrix::IDENTITY,
        }
    }
}

/// The concatenated `[p, v, theta, omega]` feature vector for one timestep,
/// devices ordered (head, left hand, right hand).
#[derive(Debug, Clone, PartialEq)]
pub struct InputFeature {
    pub x: Vec<f64>,
}

/// `N` consecutive feature rows ending at the prediction target frame.
#[derive(Debug, Clone)]
pub struct Window {
    pub frames: Vec<InputFeature>,
    /// Index of the target frame in the originating stream (0-based).
    pub target: usize,
}

/// Builds the feature vector for one timestep from the current and previous
/// observations of each device. Device ordering must match between the two
/// slices.
pub fn encode_frame(cur: &[TrackerFrame], prev: &[TrackerFrame]) -> InputFeature {
    debug_assert_eq!(cur.len(), prev.len());
    let mut x = Vec::with_capacity(cur.len() * PER_DEVICE_DIM);
    for (c, p) in cur.iter().zip(prev.iter()) {
        x.extend_from_slice(&c.pos);
        x.extend_from_slice(&vec3::sub(c.pos, p.pos));
        x.extend_from_slice(&matrix_to_6d(&c.orient).r);
        x.extend_from_slice(&matrix_to_6d(&angular_velocity(&p.orient, &c.orient)).r);
    }
    InputFeature { x }
}

/// Encodes features for frames `1..stream.len()` of a device stream (frame 0
/// has no predecessor for the backward differences and is never encoded).
pub fn encode_stream(stream: &[Vec<TrackerFrame>]) -> Vec<InputFeature> {
    (1..stream.len())
        .map(|t| encode_frame(&stream[t], &stream[t - 1]))
        .collect()
}

/// Sliding windows over a tracker stream.
///
/// The stream needs `window_len + 1` frames before the first prediction: the
/// earliest target is frame index `window_len`, whose window covers the
/// features of frames `target - window_len + 1 ..= target`. Returns an empty
/// vector (the warning indicator for callers) when the stream is too short.
pub fn make_windows(stream: &[Vec<TrackerFrame>], window_len: usize, stride: usize) -> Vec<Window> {
    assert!(window_len > 0 && stride > 0);
    if stream.len() < window_len + 1 {
        return Vec::new();
    }
    let features = encode_stream(stream);
    let mut windows = Vec::new();
    let mut target = window_len;
    while target < stream.len() {
        // features[k] describes stream frame k+1
        let start = target - window_len;
        let frames = features[start..start + window_len].to_vec();
        windows.push(Window { frames, target });
        target += stride;
    }
    windows
}
