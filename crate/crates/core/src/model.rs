//! The pose network: linear embedding, transformer encoder, a 2-layer MLP
//! head for global orientation (the stabilizer) and a 2-layer MLP head for
//! the 21 local joint rotations, all emitting 6D rotation codes.
//!
//! The forward pass is expressed on an autodiff [`Tape`] so training and the
//! position loss can backpropagate through it; inference runs the same code
//! and simply never calls backward.

use std::io::{Read, Write};
use std::path::Path;

use crate::autodiff::{AdamState, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::features::{TrackerFrame, Window};
use crate::rng::Rng64;
use crate::rotations::{recover_6d, RotMatrix, Rotation6D};
use crate::skeleton::{root_from_head, PoseOutput, Skeleton, LOCAL_JOINT_COUNT};
use crate::vec3::Vec3;
use crate::wire::Cursor;

/// Network hyperparameters. The defaults mirror the full-scale setting
/// (embedding 256, 3 self-attention layers, 8 heads, 40-frame windows);
/// tests use smaller instances of the same architecture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub num_layers: usize,
    pub num_heads: usize,
    pub mlp_hidden: usize,
    pub window: usize,
    pub input_dim: usize,
    pub output_local: usize,
    pub output_global: usize,
    /// Drop the stabilizer head; global orientation is then derived from the
    /// tracked head orientation through the kinematic chain.
    pub no_stabilizer: bool,
    /// Add a head that regresses root translation directly instead of
    /// recovering it from the tracked head position.
    pub predict_pelvis: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 256,
            num_layers: 3,
            num_heads: 8,
            mlp_hidden: 256,
            window: 40,
            input_dim: crate::features::FEATURE_DIM,
            output_local: LOCAL_JOINT_COUNT * 6,
            output_global: 6,
            no_stabilizer: false,
            predict_pelvis: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.num_heads == 0 || self.embed_dim % self.num_heads != 0 {
            return Err(Error::InvalidArgument(format!(
                "embed_dim {} must be a positive multiple of num_heads {}",
                self.embed_dim, self.num_heads
            )));
        }
        if self.window == 0 || self.num_layers == 0 || self.mlp_hidden == 0 {
            return Err(Error::InvalidArgument(
                "window, num_layers and mlp_hidden must be positive".into(),
            ));
        }
        if self.output_local != LOCAL_JOINT_COUNT * 6 || self.output_global != 6 {
            return Err(Error::InvalidArgument(format!(
                "output dims {}+{} do not describe 22 joints",
                self.output_local, self.output_global
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    fn init(rng: &mut Rng64, fan_in: usize, fan_out: usize) -> Linear {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| rng.uniform(-bound, bound))
            .collect();
        Linear {
            w: Tensor::from_vec(&[fan_in, fan_out], data),
            b: Tensor::zeros(&[fan_out]),
        }
    }

    /// Zero weights with an explicit bias: the output heads start at the
    /// identity 6D code so the untrained network emits valid rotations.
    fn zero_with_bias(fan_in: usize, bias: Vec<f64>) -> Linear {
        let fan_out = bias.len();
        Linear {
            w: Tensor::zeros(&[fan_in, fan_out]),
            b: Tensor::from_vec(&[fan_out], bias),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
    pub ln1_gain: Tensor,
    pub ln1_bias: Tensor,
    pub ff1: Linear,
    pub ff2: Linear,
    pub ln2_gain: Tensor,
    pub ln2_bias: Tensor,
}

#[derive(Debug, Clone)]
pub struct ModelWeights {
    pub cfg: ModelConfig,
    pub embed: Linear,
    pub layers: Vec<EncoderLayer>,
    /// Stabilizer MLP, absent under the no-stabilizer ablation.
    pub stab1: Option<Linear>,
    pub stab2: Option<Linear>,
    pub pose1: Linear,
    pub pose2: Linear,
    /// Direct root-translation head, present under the predict-pelvis ablation.
    pub pelvis1: Option<Linear>,
    pub pelvis2: Option<Linear>,
}

const LN_EPS: f64 = 1e-5;

fn identity_bias(blocks: usize) -> Vec<f64> {
    Rotation6D::IDENTITY
        .r
        .iter()
        .cloned()
        .cycle()
        .take(blocks * 6)
        .collect()
}

impl ModelWeights {
    pub fn init(cfg: &ModelConfig, seed: u64) -> Result<ModelWeights> {
        cfg.validate()?;
        let mut rng = Rng64::new(seed);
        let d = cfg.embed_dim;
        let layers = (0..cfg.num_layers)
            .map(|_| EncoderLayer {
                wq: Linear::init(&mut rng, d, d),
                wk: Linear::init(&mut rng, d, d),
                wv: Linear::init(&mut rng, d, d),
                wo: Linear::init(&mut rng, d, d),
                ln1_gain: Tensor::from_vec(&[d], vec![1.0; d]),
                ln1_bias: Tensor::zeros(&[d]),
                ff1: Linear::init(&mut rng, d, cfg.mlp_hidden),
                ff2: Linear::init(&mut rng, cfg.mlp_hidden, d),
                ln2_gain: Tensor::from_vec(&[d], vec![1.0; d]),
                ln2_bias: Tensor::zeros(&[d]),
            })
            .collect();
        let (stab1, stab2) = if cfg.no_stabilizer {
            (None, None)
        } else {
            (
                Some(Linear::init(&mut rng, d, cfg.mlp_hidden)),
                Some(Linear::zero_with_bias(cfg.mlp_hidden, identity_bias(1))),
            )
        };
        let (pelvis1, pelvis2) = if cfg.predict_pelvis {
            (
                Some(Linear::init(&mut rng, d, cfg.mlp_hidden)),
                Some(Linear::zero_with_bias(cfg.mlp_hidden, vec![0.0; 3])),
            )
        } else {
            (None, None)
        };
        Ok(ModelWeights {
            cfg: cfg.clone(),
            embed: Linear::init(&mut rng, cfg.input_dim, d),
            layers,
            stab1,
            stab2,
            pose1: Linear::init(&mut rng, d, cfg.mlp_hidden),
            pose2: Linear::zero_with_bias(cfg.mlp_hidden, identity_bias(LOCAL_JOINT_COUNT)),
            pelvis1,
            pelvis2,
        })
    }

    /// Tensors in canonical (serialization) order.
    pub fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out: Vec<(String, &Tensor)> = Vec::new();
        fn lin<'a>(out: &mut Vec<(String, &'a Tensor)>, name: &str, l: &'a Linear) {
            out.push((format!("{name}.w"), &l.w));
            out.push((format!("{name}.b"), &l.b));
        }
        lin(&mut out, "embed", &self.embed);
        for (i, layer) in self.layers.iter().enumerate() {
            lin(&mut out, &format!("layer{i}.q"), &layer.wq);
            lin(&mut out, &format!("layer{i}.k"), &layer.wk);
            lin(&mut out, &format!("layer{i}.v"), &layer.wv);
            lin(&mut out, &format!("layer{i}.o"), &layer.wo);
            out.push((format!("layer{i}.ln1.gain"), &layer.ln1_gain));
            out.push((format!("layer{i}.ln1.bias"), &layer.ln1_bias));
            lin(&mut out, &format!("layer{i}.ff1"), &layer.ff1);
            lin(&mut out, &format!("layer{i}.ff2"), &layer.ff2);
            out.push((format!("layer{i}.ln2.gain"), &layer.ln2_gain));
            out.push((format!("layer{i}.ln2.bias"), &layer.ln2_bias));
        }
        if let (Some(s1), Some(s2)) = (&self.stab1, &self.stab2) {
            lin(&mut out, "stab1", s1);
            lin(&mut out, "stab2", s2);
        }
        lin(&mut out, "pose1", &self.pose1);
        lin(&mut out, "pose2", &self.pose2);
        if let (Some(p1), Some(p2)) = (&self.pelvis1, &self.pelvis2) {
            lin(&mut out, "pelvis1", p1);
            lin(&mut out, "pelvis2", p2);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out: Vec<(String, &mut Tensor)> = Vec::new();
        fn lin<'a>(out: &mut Vec<(String, &'a mut Tensor)>, name: &str, l: &'a mut Linear) {
            out.push((format!("{name}.w"), &mut l.w));
            out.push((format!("{name}.b"), &mut l.b));
        }
        lin(&mut out, "embed", &mut self.embed);
        for (i, layer) in self.layers.iter_mut().enumerate() {
            lin(&mut out, &format!("layer{i}.q"), &mut layer.wq);
            lin(&mut out, &format!("layer{i}.k"), &mut layer.wk);
            lin(&mut out, &format!("layer{i}.v"), &mut layer.wv);
            lin(&mut out, &format!("layer{i}.o"), &mut layer.wo);
            out.push((format!("layer{i}.ln1.gain"), &mut layer.ln1_gain));
            out.push((format!("layer{i}.ln1.bias"), &mut layer.ln1_bias));
            lin(&mut out, &format!("layer{i}.ff1"), &mut layer.ff1);
            lin(&mut out, &format!("layer{i}.ff2"), &mut layer.ff2);
            out.push((format!("layer{i}.ln2.gain"), &mut layer.ln2_gain));
            out.push((format!("layer{i}.ln2.bias"), &mut layer.ln2_bias));
        }
        if let (Some(s1), Some(s2)) = (&mut self.stab1, &mut self.stab2) {
            lin(&mut out, "stab1", s1);
            lin(&mut out, "stab2", s2);
        }
        lin(&mut out, "pose1", &mut self.pose1);
        lin(&mut out, "pose2", &mut self.pose2);
        if let (Some(p1), Some(p2)) = (&mut self.pelvis1, &mut self.pelvis2) {
            lin(&mut out, "pelvis1", p1);
            lin(&mut out, "pelvis2", p2);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Copies every tensor onto the tape as a differentiable leaf.
    pub fn bind(&self, tape: &mut Tape) -> BoundWeights {
        let vars = self.tensors().iter().map(|(_, t)| tape.leaf(t)).collect();
        BoundWeights { vars }
    }

    /// Runs the forward pass on an existing tape with bound weights.
    pub fn forward_tape(
        &self,
        tape: &mut Tape,
        bound: &BoundWeights,
        window: &Window,
    ) -> Result<ForwardVars> {
        if window.frames.len() != self.cfg.window {
            return Err(Error::ShapeMismatch {
                op: "forward",
                lhs: vec![window.frames.len()],
                rhs: vec![self.cfg.window],
            });
        }
        for f in &window.frames {
            if f.x.len() != self.cfg.input_dim {
                return Err(Error::ShapeMismatch {
                    op: "forward",
                    lhs: vec![f.x.len()],
                    rhs: vec![self.cfg.input_dim],
                });
            }
        }
        let n = self.cfg.window;
        let d = self.cfg.embed_dim;
        let mut flat = Vec::with_capacity(n * self.cfg.input_dim);
        for f in &window.frames {
            flat.extend_from_slice(&f.x);
        }
        let x = tape.constant(&[n, self.cfg.input_dim], flat);

        let mut cursor = BindCursor::new(bound);
        let (ew, eb) = cursor.linear();
        let mut h = tape.linear(x, ew, eb)?;
        let pe = tape.constant(&[n, d], positional_encoding(n, d));
        h = tape.add(h, pe)?;

        let head_dim = d / self.cfg.num_heads;
        let scale = 1.0 / (head_dim as f64).sqrt();
        for _ in 0..self.cfg.num_layers {
            let (qw, qb) = cursor.linear();
            let (kw, kb) = cursor.linear();
            let (vw, vb) = cursor.linear();
            let (ow, ob) = cursor.linear();
            let ln1_gain = cursor.tensor();
            let ln1_bias = cursor.tensor();
            let (f1w, f1b) = cursor.linear();
            let (f2w, f2b) = cursor.linear();
            let ln2_gain = cursor.tensor();
            let ln2_bias = cursor.tensor();

            let q = tape.linear(h, qw, qb)?;
            let k = tape.linear(h, kw, kb)?;
            let v = tape.linear(h, vw, vb)?;
            let mut heads = Vec::with_capacity(self.cfg.num_heads);
            for hi in 0..self.cfg.num_heads {
                let qh = tape.slice(q, 1, hi * head_dim, head_dim)?;
                let kh = tape.slice(k, 1, hi * head_dim, head_dim)?;
                let vh = tape.slice(v, 1, hi * head_dim, head_dim)?;
                let kt = tape.transpose(kh)?;
                let scores = tape.matmul(qh, kt)?;
                let scaled = tape.scale(scores, scale);
                let attn = tape.softmax(scaled)?;
                heads.push(tape.matmul(attn, vh)?);
            }
            let ctx = tape.concat(&heads, 1)?;
            let attn_out = tape.linear(ctx, ow, ob)?;
            let res1 = tape.add(h, attn_out)?;
            h = tape.layer_norm(res1, ln1_gain, ln1_bias, LN_EPS)?;

            let ff_in = tape.linear(h, f1w, f1b)?;
            let ff_act = tape.gelu(ff_in);
            let ff_out = tape.linear(ff_act, f2w, f2b)?;
            let res2 = tape.add(h, ff_out)?;
            h = tape.layer_norm(res2, ln2_gain, ln2_bias, LN_EPS)?;
        }

        // one pose per window: read out the current (last) timestep
        let last = tape.slice(h, 0, n - 1, 1)?;

        let mlp = |tape: &mut Tape, x: Var, l1: (Var, Var), l2: (Var, Var)| -> Result<Var> {
            let hid = tape.linear(x, l1.0, l1.1)?;
            let act = tape.relu(hid);
            tape.linear(act, l2.0, l2.1)
        };

        let global6d = if self.cfg.no_stabilizer {
            None
        } else {
            let l1 = cursor.linear();
            let l2 = cursor.linear();
            let out = mlp(tape, last, l1, l2)?;
            Some(tape.reshape(out, &[6])?)
        };
        let p1 = cursor.linear();
        let p2 = cursor.linear();
        let local_flat = mlp(tape, last, p1, p2)?;
        let local6d = tape.reshape(local_flat, &[self.cfg.output_local])?;
        let root_delta = if self.cfg.predict_pelvis {
            let l1 = cursor.linear();
            let l2 = cursor.linear();
            let out = mlp(tape, last, l1, l2)?;
            Some(tape.reshape(out, &[3])?)
        } else {
            None
        };
        Ok(ForwardVars {
            global6d,
            local6d,
            root_delta,
        })
    }

    /// Convenience forward on a throwaway tape, returning plain values.
    pub fn forward(&self, window: &Window) -> Result<RawPrediction> {
        let mut tape = Tape::new();
        let bound = self.bind_frozen(&mut tape);
        let out = self.forward_tape(&mut tape, &bound, window)?;
        Ok(RawPrediction::from_vars(&tape, &out))
    }

    /// Binds weights as constants (inference: no gradient bookkeeping).
    pub fn bind_frozen(&self, tape: &mut Tape) -> BoundWeights {
        let vars = self
            .tensors()
            .iter()
            .map(|(_, t)| tape.constant(&t.shape, t.data.clone()))
            .collect();
        BoundWeights { vars }
    }
}

/// Tape handles for the weight tensors, in canonical order.
pub struct BoundWeights {
    vars: Vec<Var>,
}

impl BoundWeights {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

struct BindCursor<'a> {
    vars: &'a [Var],
    next: usize,
}

impl<'a> BindCursor<'a> {
    fn new(bound: &'a BoundWeights) -> Self {
        BindCursor {
            vars: &bound.vars,
            next: 0,
        }
    }

    fn tensor(&mut self) -> Var {
        let v = self.vars[self.next];
        self.next += 1;
        v
    }

    fn linear(&mut self) -> (Var, Var) {
        (self.tensor(), self.tensor())
    }
}

/// Network outputs still on the tape (training keeps differentiating through
/// these).
pub struct ForwardVars {
    pub global6d: Option<Var>,
    pub local6d: Var,
    pub root_delta: Option<Var>,
}

/// Network outputs as plain values. `root_delta` is the direct-regression
/// head's output, a root position relative to the tracked head (the only
/// world anchor among the inputs).
#[derive(Debug, Clone)]
pub struct RawPrediction {
    pub global6d: Option<Rotation6D>,
    pub local6d: Vec<Rotation6D>,
    pub root_delta: Option<Vec3>,
}

impl RawPrediction {
    pub fn from_vars(tape: &Tape, vars: &ForwardVars) -> RawPrediction {
        let global6d = vars.global6d.map(|v| {
            let mut r = [0.0; 6];
            r.copy_from_slice(tape.value(v));
            Rotation6D::new(r)
        });
        let flat = tape.value(vars.local6d);
        let local6d = flat
            .chunks_exact(6)
            .map(|c| {
                let mut r = [0.0; 6];
                r.copy_from_slice(c);
                Rotation6D::new(r)
            })
            .collect();
        let root_delta = vars.root_delta.map(|v| {
            let d = tape.value(v);
            [d[0], d[1], d[2]]
        });
        RawPrediction {
            global6d,
            local6d,
            root_delta,
        }
    }
}

/// Fixed sinusoidal positional encoding over the window index.
pub fn positional_encoding(n: usize, d: usize) -> Vec<f64> {
    let mut pe = vec![0.0; n * d];
    for pos in 0..n {
        for i in 0..d {
            let exponent = (2 * (i / 2)) as f64 / d as f64;
            let rate = 10000f64.powf(exponent);
            let angle = pos as f64 / rate;
            pe[pos * d + i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    pe
}

/// Global orientation derived from the tracked head: the head's world
/// orientation with the predicted pelvis-to-head rotation chain removed.
pub fn global_from_head_chain(
    s: &Skeleton,
    head_orient: &RotMatrix,
    local_rot: &[RotMatrix],
) -> RotMatrix {
    let mut chain = RotMatrix::IDENTITY;
    for j in s.chain_to(s.head_index) {
        chain = chain.mul(&local_rot[j - 1]);
    }
    head_orient.mul(&chain.transpose())
}

/// Recovers a full pose from raw network outputs and the tracked head frame.
///
/// Global orientation comes from the stabilizer output when present and is
/// otherwise derived through the chain from the tracked head orientation;
/// root translation comes from the direct regression head when present and
/// is otherwise recovered from the tracked head position.
pub fn decode(pred: &RawPrediction, head_frame: &TrackerFrame, s: &Skeleton) -> Result<PoseOutput> {
    if pred.local6d.len() != LOCAL_JOINT_COUNT {
        return Err(Error::InvalidArgument(format!(
            "expected {LOCAL_JOINT_COUNT} local rotation codes, got {}",
            pred.local6d.len()
        )));
    }
    let local_rot: Vec<RotMatrix> = pred.local6d.iter().map(recover_6d).collect::<Result<_>>()?;
    let global_orient = match &pred.global6d {
        Some(code) => recover_6d(code)?,
        None => global_from_head_chain(s, &head_frame.orient, &local_rot),
    };
    let root_pos = match pred.root_delta {
        Some(delta) => crate::vec3::add(head_frame.pos, delta),
        None => root_from_head(s, &global_orient, &local_rot, head_frame.pos),
    };
    Ok(PoseOutput {
        global_orient,
        local_rot,
        root_pos,
    })
}

// ---------------------------------------------------------------------------
// Checkpoint container: magic, config header, named tensors, optional
// optimizer state. Little-endian throughout.
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 8] = b"SPCK0001";

/// A serializable training snapshot.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub weights: ModelWeights,
    pub iteration: u64,
    pub adam: Option<Vec<AdamState>>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        let cfg = &self.weights.cfg;
        for v in [
            cfg.embed_dim,
            cfg.num_layers,
            cfg.num_heads,
            cfg.mlp_hidden,
            cfg.window,
            cfg.input_dim,
            cfg.output_local,
            cfg.output_global,
        ] {
            buf.extend_from_slice(&(v as u32).to_le_bytes());
        }
        let flags = (cfg.no_stabilizer as u32) | ((cfg.predict_pelvis as u32) << 1);
        buf.extend_from_slice(&flags.to_le_bytes());
        buf.extend_from_slice(&self.iteration.to_le_bytes());
        let tensors = self.weights.tensors();
        buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (name, t) in &tensors {
            let nb = name.as_bytes();
            buf.extend_from_slice(&(nb.len() as u16).to_le_bytes());
            buf.extend_from_slice(nb);
            buf.push(t.shape.len() as u8);
            for d in &t.shape {
                buf.extend_from_slice(&(*d as u32).to_le_bytes());
            }
            for x in &t.data {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        match &self.adam {
            Some(states) => {
                buf.push(1);
                buf.extend_from_slice(&states[0].step.to_le_bytes());
                for st in states {
                    for x in st.m.iter().chain(st.v.iter()) {
                        buf.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
            None => buf.push(0),
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Cursor::new(&bytes);
        let magic = r.take_n(8)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::Parse(format!(
                "{} is not a checkpoint (bad magic)",
                path.display()
            )));
        }
        let mut u32s = [0usize; 8];
        for v in u32s.iter_mut() {
            *v = r.u32()? as usize;
        }
        let flags = r.u32()?;
        let cfg = ModelConfig {
            embed_dim: u32s[0],
            num_layers: u32s[1],
            num_heads: u32s[2],
            mlp_hidden: u32s[3],
            window: u32s[4],
            input_dim: u32s[5],
            output_local: u32s[6],
            output_global: u32s[7],
            no_stabilizer: flags & 1 != 0,
            predict_pelvis: flags & 2 != 0,
        };
        let iteration = r.u64()?;
        let count = r.u32()? as usize;
        // Build the expected structure, then overwrite tensor data so any
        // disagreement between header and payload surfaces as ConfigMismatch.
        let mut weights = ModelWeights::init(&cfg, 0)?;
        let mut expected = weights.tensors_mut();
        if expected.len() != count {
            return Err(Error::ConfigMismatch(format!(
                "checkpoint has {count} tensors, config implies {}",
                expected.len()
            )));
        }
        for (name, tensor) in expected.iter_mut() {
            let nlen = r.u16()? as usize;
            let got_name = std::str::from_utf8(r.take_n(nlen)?)
                .map_err(|_| Error::Parse("tensor name is not utf-8".into()))?;
            if got_name != name {
                return Err(Error::ConfigMismatch(format!(
                    "tensor '{got_name}' where '{name}' was expected"
                )));
            }
            let rank = r.u8()? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32()? as usize);
            }
            if shape != tensor.shape {
                return Err(Error::ConfigMismatch(format!(
                    "tensor '{name}': shape {shape:?} does not match config shape {:?}",
                    tensor.shape
                )));
            }
            for x in tensor.data.iter_mut() {
                *x = r.f64()?;
            }
        }
        let lens: Vec<usize> = weights.tensors().iter().map(|(_, t)| t.len()).collect();
        let adam = if r.u8()? == 1 {
            let step = r.u64()?;
            let mut states = Vec::with_capacity(lens.len());
            for len in lens {
                let mut st = AdamState::new(len);
                st.step = step;
                for x in st.m.iter_mut() {
                    *x = r.f64()?;
                }
                for x in st.v.iter_mut() {
                    *x = r.f64()?;
                }
                states.push(st);
            }
            Some(states)
        } else {
            None
        };
        Ok(Checkpoint {
            weights,
            iteration,
            adam,
        })
    }
}
