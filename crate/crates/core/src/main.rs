use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use sparsepose::data::{
    extract_trackers, read_clip, read_clip_dir, read_tracker_stream, synth_motion, write_clip,
    write_clip_text, write_tracker_stream, MotionClip, MotionKind, TrackerStreamFile,
};
use sparsepose::ik::{IkConfig, IkOptimizer};
use sparsepose::model::{Checkpoint, ModelConfig};
use sparsepose::pipeline::{bench, evaluate_clips, infer_stream, parse_key_values, PipelineConfig};
use sparsepose::rotations::matrix_to_axis_angle;
use sparsepose::skeleton::Skeleton;
use sparsepose::training::{train, write_history, TrainConfig};
use sparsepose::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sparsepose",
    about = "Full-body pose estimation from head and hand 6DoF tracking",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic motion clip.
    Synth {
        /// walk-cycle | arm-wave | squat | head-turn | composite
        #[arg(long, default_value = "composite")]
        kind: String,
        /// Clip length in seconds.
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60.0)]
        fps: f64,
        /// Output clip path (binary container).
        #[arg(long)]
        out: PathBuf,
        /// Also write the text fixture variant next to the clip.
        #[arg(long)]
        text: bool,
        /// Also write the extracted tracker stream to this path.
        #[arg(long)]
        trackers_out: Option<PathBuf>,
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Train a model on a directory of clips.
    Train {
        /// Directory containing .mc clips.
        #[arg(long)]
        data: PathBuf,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// key=value config file; command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        skeleton: Option<PathBuf>,
        /// Resume from an existing checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Loss history output (default: <out>.losses.txt).
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        iters: Option<u64>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        checkpoint_every: Option<u64>,
        #[arg(long)]
        embed_dim: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        heads: Option<usize>,
        #[arg(long)]
        mlp_hidden: Option<usize>,
        #[arg(long)]
        no_stabilizer: bool,
        #[arg(long)]
        predict_pelvis: bool,
        #[arg(long)]
        no_fk_loss: bool,
    },
    /// Evaluate a checkpoint against ground-truth clips.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Clip files or directories of .mc clips.
        #[arg(long, required = true, num_args = 1..)]
        clips: Vec<PathBuf>,
        /// Report directory (report.txt and report.kv are written here).
        #[arg(long)]
        out_dir: PathBuf,
        /// Disable the arm refinement.
        #[arg(long)]
        no_ik: bool,
        /// Derive global orientation from the tracked head instead of the
        /// stabilizer output.
        #[arg(long)]
        no_stabilizer: bool,
        #[arg(long, default_value_t = 5)]
        ik_iters: usize,
        #[arg(long, default_value_t = 1e-3)]
        ik_lr: f64,
        /// Use plain gradient descent in the refinement instead of Adam.
        #[arg(long)]
        ik_gd: bool,
        /// Worker threads (THREADS env var is the fallback).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Run streaming inference over a tracker stream (or a clip, from which
    /// the trackers are extracted) and write the predicted motion clip.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Tracker stream (.ts) or motion clip (.mc); detected by magic.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_ik: bool,
        #[arg(long)]
        no_stabilizer: bool,
        #[arg(long, default_value_t = 5)]
        ik_iters: usize,
        #[arg(long, default_value_t = 1e-3)]
        ik_lr: f64,
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Measure network inference and IK iteration cost separately.
    Bench {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1200)]
        frames: usize,
        #[arg(long, default_value_t = 5)]
        ik_iters: usize,
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
}

fn load_skeleton(path: &Option<PathBuf>) -> Result<Skeleton> {
    match path {
        Some(p) => Skeleton::load(p),
        None => Ok(Skeleton::default_rig()),
    }
}

fn check_clip_rig(clip: &MotionClip, s: &Skeleton, what: &str) -> Result<()> {
    if clip.skeleton_hash != s.hash() {
        return Err(Error::ConfigMismatch(format!(
            "{what} was recorded against a different skeleton \
             (hash {:016x}, expected {:016x})",
            clip.skeleton_hash,
            s.hash()
        )));
    }
    Ok(())
}

fn collect_clips(paths: &[PathBuf], s: &Skeleton) -> Result<Vec<MotionClip>> {
    let mut clips = Vec::new();
    for p in paths {
        if p.is_dir() {
            clips.extend(read_clip_dir(p)?);
        } else {
            clips.push(read_clip(p)?);
        }
    }
    if clips.is_empty() {
        return Err(Error::InvalidArgument("no clips found".into()));
    }
    for clip in &clips {
        check_clip_rig(clip, s, "clip")?;
    }
    Ok(clips)
}

fn parse_flag<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("config key '{key}': bad value '{value}'")))
}

fn apply_config_file(
    path: &Path,
    model_cfg: &mut ModelConfig,
    train_cfg: &mut TrainConfig,
) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (k, v) in parse_key_values(&text)? {
        match k.as_str() {
            "embed_dim" => model_cfg.embed_dim = parse_flag(&k, &v)?,
            "num_layers" => model_cfg.num_layers = parse_flag(&k, &v)?,
            "num_heads" => model_cfg.num_heads = parse_flag(&k, &v)?,
            "mlp_hidden" => model_cfg.mlp_hidden = parse_flag(&k, &v)?,
            "window" => train_cfg.window = parse_flag(&k, &v)?,
            "batch" => train_cfg.batch = parse_flag(&k, &v)?,
            "lr" => train_cfg.lr = parse_flag(&k, &v)?,
            "decay_factor" => train_cfg.decay_factor = parse_flag(&k, &v)?,
            "decay_every" => train_cfg.decay_every = parse_flag(&k, &v)?,
            "max_iters" => train_cfg.max_iters = parse_flag(&k, &v)?,
            "seed" => train_cfg.seed = parse_flag(&k, &v)?,
            "checkpoint_every" => train_cfg.checkpoint_every = parse_flag(&k, &v)?,
            "lambda_ori" => train_cfg.loss_weights.ori = parse_flag(&k, &v)?,
            "lambda_rot" => train_cfg.loss_weights.rot = parse_flag(&k, &v)?,
            "lambda_fk" => train_cfg.loss_weights.fk = parse_flag(&k, &v)?,
            "no_stabilizer" => train_cfg.no_stabilizer = parse_flag(&k, &v)?,
            "predict_pelvis" => train_cfg.predict_pelvis = parse_flag(&k, &v)?,
            "no_fk_loss" => train_cfg.no_fk_loss = parse_flag(&k, &v)?,
            other => {
                return Err(Error::Parse(format!("unknown config key '{other}'")));
            }
        }
    }
    Ok(())
}

fn threads_from(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth {
            kind,
            duration,
            seed,
            fps,
            out,
            text,
            trackers_out,
            skeleton,
        } => {
            let s = load_skeleton(&skeleton)?;
            let kind = MotionKind::parse(&kind)?;
            let clip = synth_motion(kind, duration, seed, fps, &s)?;
            write_clip(&clip, &out)?;
            println!(
                "wrote {} ({} frames at {} fps, kind {})",
                out.display(),
                clip.len(),
                clip.fps,
                kind.name()
            );
            if text {
                let text_path = out.with_extension("mct");
                write_clip_text(&clip, &text_path)?;
                println!("wrote {}", text_path.display());
            }
            if let Some(tp) = trackers_out {
                let stream = TrackerStreamFile {
                    fps: clip.fps,
                    skeleton_hash: clip.skeleton_hash,
                    frames: extract_trackers(&clip, &s)?,
                };
                write_tracker_stream(&stream, &tp)?;
                println!("wrote {}", tp.display());
            }
            Ok(())
        }
        Command::Train {
            data,
            out,
            config,
            skeleton,
            resume,
            history,
            iters,
            batch,
            window,
            lr,
            seed,
            checkpoint_every,
            embed_dim,
            layers,
            heads,
            mlp_hidden,
            no_stabilizer,
            predict_pelvis,
            no_fk_loss,
        } => {
            let s = load_skeleton(&skeleton)?;
            let mut model_cfg = ModelConfig::default();
            let mut train_cfg = TrainConfig::default();
            if let Some(cfg_path) = config {
                apply_config_file(&cfg_path, &mut model_cfg, &mut train_cfg)?;
            }
            if let Some(v) = embed_dim {
                model_cfg.embed_dim = v;
            }
            if let Some(v) = layers {
                model_cfg.num_layers = v;
            }
            if let Some(v) = heads {
                model_cfg.num_heads = v;
            }
            if let Some(v) = mlp_hidden {
                model_cfg.mlp_hidden = v;
            }
            if let Some(v) = iters {
                train_cfg.max_iters = v;
            }
            if let Some(v) = batch {
                train_cfg.batch = v;
            }
            if let Some(v) = window {
                train_cfg.window = v;
            }
            if let Some(v) = lr {
                train_cfg.lr = v;
            }
            if let Some(v) = seed {
                train_cfg.seed = v;
            }
            if let Some(v) = checkpoint_every {
                train_cfg.checkpoint_every = v;
            }
            train_cfg.no_stabilizer |= no_stabilizer;
            train_cfg.predict_pelvis |= predict_pelvis;
            train_cfg.no_fk_loss |= no_fk_loss;

            let clips = collect_clips(&[data], &s)?;
            let resume_ck = resume.as_deref().map(Checkpoint::load).transpose()?;
            let t0 = std::time::Instant::now();
            let result = train(&clips, &s, &model_cfg, &train_cfg, resume_ck, Some(&out))?;
            let history_path = history.unwrap_or_else(|| {
                let mut p = out.as_os_str().to_owned();
                p.push(".losses.txt");
                PathBuf::from(p)
            });
            write_history(&result.history, &history_path)?;
            let last = result.history.last();
            println!(
                "trained {} iterations on {} clips in {:.1}s ({} parameters)",
                result.checkpoint.iteration,
                clips.len(),
                t0.elapsed().as_secs_f64(),
                result.checkpoint.weights.param_count()
            );
            if let Some(r) = last {
                println!(
                    "final loss {:.6} (ori {:.6} rot {:.6} fk {:.6})",
                    r.total, r.ori, r.rot, r.fk
                );
            }
            println!("wrote {}", out.display());
            println!("wrote {}", history_path.display());
            Ok(())
        }
        Command::Eval {
            checkpoint,
            clips,
            out_dir,
            no_ik,
            no_stabilizer,
            ik_iters,
            ik_lr,
            ik_gd,
            threads,
            skeleton,
        } => {
            let s = load_skeleton(&skeleton)?;
            let ck = Checkpoint::load(&checkpoint)?;
            let clips = collect_clips(&clips, &s)?;
            let cfg = PipelineConfig {
                ik: IkConfig {
                    lr: ik_lr,
                    iters: ik_iters,
                    optimizer: if ik_gd {
                        IkOptimizer::GradientDescent
                    } else {
                        IkOptimizer::Adam
                    },
                },
                use_ik: !no_ik,
                no_stabilizer,
                threads: threads_from(threads),
            };
            let report = evaluate_clips(&ck.weights, &s, &clips, &cfg)?;
            std::fs::create_dir_all(&out_dir)?;
            let table_path = out_dir.join("report.txt");
            let kv_path = out_dir.join("report.kv");
            report.write_files(&table_path, &kv_path)?;
            print!("{}", report.to_table());
            println!("wrote {}", table_path.display());
            println!("wrote {}", kv_path.display());
            Ok(())
        }
        Command::Infer {
            checkpoint,
            input,
            out,
            no_ik,
            no_stabilizer,
            ik_iters,
            ik_lr,
            skeleton,
        } => {
            let s = load_skeleton(&skeleton)?;
            let ck = Checkpoint::load(&checkpoint)?;
            let (fps, hash, stream) = load_stream(&input, &s)?;
            if hash != s.hash() {
                return Err(Error::ConfigMismatch(
                    "input was recorded against a different skeleton".into(),
                ));
            }
            let cfg = PipelineConfig {
                ik: IkConfig {
                    lr: ik_lr,
                    iters: ik_iters,
                    optimizer: IkOptimizer::Adam,
                },
                use_ik: !no_ik,
                no_stabilizer,
                threads: 1,
            };
            let poses = infer_stream(&ck.weights, &s, &stream, &cfg)?;
            let clip = MotionClip {
                fps,
                skeleton_hash: hash,
                frames: poses
                    .iter()
                    .map(|p| sparsepose::data::ClipFrame {
                        root_pos: p.root_pos,
                        global_orient: matrix_to_axis_angle(&p.global_orient),
                        local_rot: p.local_rot.iter().map(matrix_to_axis_angle).collect(),
                    })
                    .collect(),
            };
            write_clip(&clip, &out)?;
            println!(
                "wrote {} ({} predicted frames from {} input frames)",
                out.display(),
                clip.len(),
                stream.len()
            );
            Ok(())
        }
        Command::Bench {
            checkpoint,
            frames,
            ik_iters,
            skeleton,
        } => {
            let s = load_skeleton(&skeleton)?;
            let ck = Checkpoint::load(&checkpoint)?;
            let ik = IkConfig {
                iters: ik_iters.max(1),
                ..IkConfig::default()
            };
            let report = bench(&ck.weights, &s, frames, &ik)?;
            print!("{}", report.to_table());
            Ok(())
        }
    }
}

/// Loads tracked observations from either container kind (detected by magic).
fn load_stream(
    path: &Path,
    s: &Skeleton,
) -> Result<(f64, u64, Vec<Vec<sparsepose::features::TrackerFrame>>)> {
    let mut magic = [0u8; 8];
    {
        use std::io::Read;
        let mut f = std::fs::File::open(path)?;
        f.read_exact(&mut magic)
            .map_err(|_| Error::Parse(format!("{} is too short", path.display())))?;
    }
    if &magic == b"SPTS0001" {
        let ts = read_tracker_stream(path)?;
        Ok((ts.fps, ts.skeleton_hash, ts.frames))
    } else {
        let clip = read_clip(path)?;
        let frames = extract_trackers(&clip, s)?;
        Ok((clip.fps, clip.skeleton_hash, frames))
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
