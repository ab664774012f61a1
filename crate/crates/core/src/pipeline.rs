//! End-to-end inference: sliding-window streaming prediction, optional arm
//! refinement against the tracked hands, evaluation against ground truth,
//! and runtime measurement.

use std::time::Instant;

use crate::data::{extract_trackers, synth_motion, MotionClip, MotionKind};
use crate::error::{Error, Result};
use crate::features::{make_windows, TrackerFrame, Window};
use crate::ik::{refine_arms, IkConfig};
use crate::metrics::{evaluate_many, EvalReport};
use crate::model::{decode, ModelWeights, RawPrediction};
use crate::skeleton::{PoseOutput, Skeleton};

/// Inference-time switches.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Arm refinement budget; `use_ik = false` or `ik.iters = 0` disables it.
    pub ik: IkConfig,
    pub use_ik: bool,
    /// Ignore the stabilizer output and derive global orientation from the
    /// tracked head orientation through the chain.
    pub no_stabilizer: bool,
    /// Worker threads for frame-parallel evaluation. Results are written to
    /// disjoint slots, so the output is identical for any thread count.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ik: IkConfig::default(),
            use_ik: true,
            no_stabilizer: false,
            threads: 1,
        }
    }
}

fn predict_one(
    weights: &ModelWeights,
    s: &Skeleton,
    window: &Window,
    frame: &[TrackerFrame],
    cfg: &PipelineConfig,
) -> Result<PoseOutput> {
    let mut pred: RawPrediction = weights.forward(window)?;
    if cfg.no_stabilizer {
        pred.global6d = None;
    }
    let pose = decode(&pred, &frame[0], s)?;
    if cfg.use_ik && cfg.ik.iters > 0 {
        refine_arms(&pose, s, frame[1].pos, frame[2].pos, &cfg.ik)
    } else {
        Ok(pose)
    }
}

/// Strictly causal stride-1 inference over a tracker stream: one pose per
/// frame from index `window` onward. The head targeting and hand refinement
/// for each output frame use only that frame's tracked observations.
pub fn infer_stream(
    weights: &ModelWeights,
    s: &Skeleton,
    stream: &[Vec<TrackerFrame>],
    cfg: &PipelineConfig,
) -> Result<Vec<PoseOutput>> {
    let window_len = weights.cfg.window;
    let windows = make_windows(stream, window_len, 1);
    if windows.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "stream of {} frames is shorter than window {} + 1",
            stream.len(),
            window_len
        )));
    }
    let threads = cfg.threads.max(1).min(windows.len());
    if threads == 1 {
        return windows
            .iter()
            .map(|w| predict_one(weights, s, w, &stream[w.target], cfg))
            .collect();
    }
    let mut out: Vec<Option<Result<PoseOutput>>> = Vec::new();
    out.resize_with(windows.len(), || None);
    let chunk = windows.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (slot_chunk, win_chunk) in out.chunks_mut(chunk).zip(windows.chunks(chunk)) {
            scope.spawn(move || {
                for (slot, w) in slot_chunk.iter_mut().zip(win_chunk) {
                    *slot = Some(predict_one(weights, s, w, &stream[w.target], cfg));
                }
            });
        }
    });
    out.into_iter()
        .map(|r| r.expect("every slot was filled"))
        .collect()
}

/// Predicted poses for one ground-truth clip, aligned with frames
/// `window..clip.len()`.
pub struct ClipPrediction {
    pub pred: Vec<PoseOutput>,
    pub gt: Vec<PoseOutput>,
    pub first_target: usize,
}

pub fn predict_clip(
    weights: &ModelWeights,
    s: &Skeleton,
    clip: &MotionClip,
    cfg: &PipelineConfig,
) -> Result<ClipPrediction> {
    let stream = extract_trackers(clip, s)?;
    let pred = infer_stream(weights, s, &stream, cfg)?;
    let first_target = weights.cfg.window;
    let gt = (first_target..clip.len())
        .map(|i| clip.pose(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClipPrediction {
        pred,
        gt,
        first_target,
    })
}

/// Streaming inference plus metrics over a set of held-out clips.
pub fn evaluate_clips(
    weights: &ModelWeights,
    s: &Skeleton,
    clips: &[MotionClip],
    cfg: &PipelineConfig,
) -> Result<EvalReport> {
    if clips.is_empty() {
        return Err(Error::InvalidArgument("no clips to evaluate".into()));
    }
    let fps = clips[0].fps;
    let mut predictions = Vec::with_capacity(clips.len());
    for clip in clips {
        if (clip.fps - fps).abs() > 1e-9 {
            return Err(Error::ConfigMismatch(
                "clips with mixed frame rates in one evaluation".into(),
            ));
        }
        predictions.push(predict_clip(weights, s, clip, cfg)?);
    }
    let pairs: Vec<(&[PoseOutput], &[PoseOutput])> = predictions
        .iter()
        .map(|p| (p.pred.as_slice(), p.gt.as_slice()))
        .collect();
    evaluate_many(&pairs, s, fps)
}

/// Wall-clock costs of the two inference stages, measured separately.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub frames: usize,
    pub forward_mean_ms: f64,
    pub forward_p95_ms: f64,
    pub forward_fps: f64,
    pub ik_iters_timed: usize,
    pub ik_iter_mean_ms: f64,
    pub param_count: usize,
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("frames timed        {:>12}\n", self.frames));
        out.push_str(&format!("parameters          {:>12}\n", self.param_count));
        out.push_str(&format!(
            "{:<10} {:>14} {:>14} {:>14}\n",
            "stage", "mean [ms]", "p95 [ms]", "throughput"
        ));
        out.push_str(&format!(
            "{:<10} {:>14.4} {:>14.4} {:>10.1} fps\n",
            "network", self.forward_mean_ms, self.forward_p95_ms, self.forward_fps
        ));
        out.push_str(&format!(
            "{:<10} {:>14.4} {:>14} {:>14}\n",
            "ik/iter", self.ik_iter_mean_ms, "-", "-"
        ));
        out
    }
}

/// Times the network forward pass per frame and the refinement cost per IK
/// iteration over a synthetic stream of at least `frames` predictions.
pub fn bench(
    weights: &ModelWeights,
    s: &Skeleton,
    frames: usize,
    ik: &IkConfig,
) -> Result<BenchReport> {
    let window_len = weights.cfg.window;
    let need = frames + window_len + 1;
    let clip = synth_motion(
        MotionKind::Composite,
        need as f64 / 60.0 + 1.0,
        12345,
        60.0,
        s,
    )?;
    let stream = extract_trackers(&clip, s)?;
    let windows = make_windows(&stream, window_len, 1);
    let windows = &windows[..frames.min(windows.len())];

    let mut forward_ms = Vec::with_capacity(windows.len());
    let mut poses = Vec::with_capacity(windows.len());
    for w in windows {
        let t0 = Instant::now();
        let pred = weights.forward(w)?;
        forward_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        poses.push(decode(&pred, &stream[w.target][0], s)?);
    }
    let mut sorted = forward_ms.clone();
    sorted.sort_by(f64::total_cmp);
    let forward_mean_ms = forward_ms.iter().sum::<f64>() / forward_ms.len() as f64;
    let forward_p95_ms = sorted[(sorted.len() * 95 / 100).min(sorted.len() - 1)];

    let ik_cfg = IkConfig {
        iters: ik.iters.max(1),
        ..*ik
    };
    let mut ik_total = 0.0;
    let mut ik_iters_timed = 0usize;
    for (w, pose) in windows.iter().zip(&poses) {
        let t0 = Instant::now();
        refine_arms(
            pose,
            s,
            stream[w.target][1].pos,
            stream[w.target][2].pos,
            &ik_cfg,
        )?;
        ik_total += t0.elapsed().as_secs_f64() * 1e3;
        ik_iters_timed += ik_cfg.iters;
    }
    Ok(BenchReport {
        frames: windows.len(),
        forward_mean_ms,
        forward_p95_ms,
        forward_fps: 1e3 / forward_mean_ms,
        ik_iters_timed,
        ik_iter_mean_ms: ik_total / ik_iters_timed as f64,
        param_count: weights.param_count(),
    })
}

/// `key = value` text config with `#` comments, used by the CLI.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {}: expected key=value, got '{line}'",
                lineno + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
