//! Minimal reverse-mode differentiation engine.
//!
//! A [`Tape`] records tensor operations during a forward pass; [`Tape::backward`]
//! replays them in reverse, accumulating vector-Jacobian products into per-node
//! gradient buffers. Nodes are addressed by plain indices ([`Var`]), which keeps
//! the graph a flat `Vec` in topological order, so the reverse sweep is just
//! a reverse iteration, single-threaded and bit-deterministic.
//!
//! Tensors are rank-1 or rank-2, row-major, f64. The op set is exactly what the
//! pose model, the kinematics losses, and the arm refinement need; there is no
//! general broadcasting.

mod adam;

pub use adam::{adam_step, AdamConfig, AdamState};

use crate::error::{Error, Result};

/// Owned tensor value with an optional gradient accumulator. Parameters live
/// outside any tape as `Tensor`s and are bound to a tape per forward pass.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub requires_grad: bool,
    pub grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
            requires_grad: true,
            grad: None,
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Tensor {
        assert_eq!(shape.iter().product::<usize>(), data.len());
        Tensor {
            shape: shape.to_vec(),
            data,
            requires_grad: true,
            grad: None,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn zero_grad(&mut self) {
        match &mut self.grad {
            Some(g) => g.iter_mut().for_each(|x| *x = 0.0),
            None => self.grad = Some(vec![0.0; self.data.len()]),
        }
    }

    /// Adds `delta` into the gradient accumulator.
    pub fn accumulate_grad(&mut self, delta: &[f64]) {
        assert_eq!(delta.len(), self.data.len());
        let g = self.grad.get_or_insert_with(|| vec![0.0; self.data.len()]);
        for (gi, di) in g.iter_mut().zip(delta) {
            *gi += di;
        }
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Constant,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// Elementwise multiply by a single-element node.
    MulScalar(Var, Var),
    Scale(Var, f64),
    Neg(Var),
    Matmul(Var, Var),
    Transpose(Var),
    Concat {
        parts: Vec<Var>,
        axis: usize,
    },
    Slice {
        input: Var,
        axis: usize,
        start: usize,
    },
    Softmax(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        eps: f64,
    },
    Relu(Var),
    Gelu(Var),
    Sum(Var),
    Mean(Var),
    L1Loss(Var, Var),
    L2Loss(Var, Var),
    Cross(Var, Var),
    Dot(Var, Var),
    Normalize(Var),
    Reshape(Var),
    AddBias(Var, Var),
}

struct Node {
    shape: Vec<usize>,
    value: Vec<f64>,
    op: Op,
    needs_grad: bool,
}

/// Records a single forward computation; one backward pass per tape.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
}

fn rows_cols(shape: &[usize]) -> (usize, usize) {
    match shape.len() {
        1 => (1, shape[0]),
        2 => (shape[0], shape[1]),
        _ => unreachable!("tensors are rank-1 or rank-2"),
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<f64>, op: Op, needs_grad: bool) -> Var {
        debug_assert_eq!(shape.iter().product::<usize>(), value.len());
        debug_assert!(shape.len() <= 2);
        self.nodes.push(Node {
            shape,
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Binds an off-tape tensor as a differentiable leaf (copies the data).
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(t.shape.clone(), t.data.clone(), Op::Leaf, t.requires_grad)
    }

    pub fn constant(&mut self, shape: &[usize], data: Vec<f64>) -> Var {
        assert_eq!(shape.iter().product::<usize>(), data.len());
        self.push(shape.to_vec(), data, Op::Constant, false)
    }

    pub fn scalar(&mut self, x: f64) -> Var {
        self.constant(&[1], vec![x])
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// Gradient buffer of `v` after [`Tape::backward`]; `None` if the node was
    /// unreachable from the loss or does not require gradients.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Adds the gradient of `v` (if any) into `t.grad`.
    pub fn write_grad(&self, v: Var, t: &mut Tensor) {
        if let Some(g) = self.grad(v) {
            t.accumulate_grad(g);
        } else {
            t.zero_grad();
        }
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.nodes[a.0].shape != self.nodes[b.0].shape {
            return Err(Error::ShapeMismatch {
                op,
                lhs: self.nodes[a.0].shape.clone(),
                rhs: self.nodes[b.0].shape.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x + y)
            .collect();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(self.nodes[a.0].shape.clone(), value, Op::Add(a, b), needs))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x - y)
            .collect();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(self.nodes[a.0].shape.clone(), value, Op::Sub(a, b), needs))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .collect();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(self.nodes[a.0].shape.clone(), value, Op::Mul(a, b), needs))
    }

    /// Multiplies every element of `a` by the single-element node `s`.
    pub fn mul_scalar(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.nodes[s.0].value.len() != 1 {
            return Err(Error::ShapeMismatch {
                op: "mul_scalar",
                lhs: self.nodes[a.0].shape.clone(),
                rhs: self.nodes[s.0].shape.clone(),
            });
        }
        let sv = self.nodes[s.0].value[0];
        let value = self.nodes[a.0].value.iter().map(|x| x * sv).collect();
        let needs = self.needs(a) || self.needs(s);
        Ok(self.push(
            self.nodes[a.0].shape.clone(),
            value,
            Op::MulScalar(a, s),
            needs,
        ))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.nodes[a.0].value.iter().map(|x| x * c).collect();
        let needs = self.needs(a);
        self.push(self.nodes[a.0].shape.clone(), value, Op::Scale(a, c), needs)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.iter().map(|x| -x).collect();
        let needs = self.needs(a);
        self.push(self.nodes[a.0].shape.clone(), value, Op::Neg(a), needs)
    }

    /// Matrix product. Accepts `[m,k]x[k,n] -> [m,n]`, `[m,k]x[k] -> [m]`,
    /// and `[k]x[k,n] -> [n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0].shape, &self.nodes[b.0].shape);
        let mismatch = || Error::ShapeMismatch {
            op: "matmul",
            lhs: sa.clone(),
            rhs: sb.clone(),
        };
        let (m, k1) = match sa.len() {
            1 => (1, sa[0]),
            2 => (sa[0], sa[1]),
            _ => return Err(mismatch()),
        };
        let (k2, n) = match sb.len() {
            1 => (sb[0], 1),
            2 => (sb[0], sb[1]),
            _ => return Err(mismatch()),
        };
        if k1 != k2 {
            return Err(mismatch());
        }
        let out_shape = match (sa.len(), sb.len()) {
            (2, 2) => vec![m, n],
            (2, 1) => vec![m],
            (1, 2) => vec![n],
            (1, 1) => return Err(mismatch()),
            _ => unreachable!(),
        };
        let value = matmul_kernel(&self.nodes[a.0].value, &self.nodes[b.0].value, m, k1, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(out_shape, value, Op::Matmul(a, b), needs))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let s = &self.nodes[a.0].shape;
        if s.len() != 2 {
            return Err(Error::ShapeMismatch {
                op: "transpose",
                lhs: s.clone(),
                rhs: vec![],
            });
        }
        let (m, n) = (s[0], s[1]);
        let v = &self.nodes[a.0].value;
        let mut out = vec![0.0; v.len()];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = v[i * n + j];
            }
        }
        let needs = self.needs(a);
        Ok(self.push(vec![n, m], out, Op::Transpose(a), needs))
    }

    /// Concatenation along `axis` (0 for rank-1 inputs, 0 or 1 for rank-2).
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        assert!(!parts.is_empty());
        let first = self.nodes[parts[0].0].shape.clone();
        let rank = first.len();
        if axis >= rank {
            return Err(Error::ShapeMismatch {
                op: "concat",
                lhs: first,
                rhs: vec![axis],
            });
        }
        for p in parts {
            let s = &self.nodes[p.0].shape;
            if s.len() != rank || (0..rank).any(|d| d != axis && s[d] != first[d]) {
                return Err(Error::ShapeMismatch {
                    op: "concat",
                    lhs: first,
                    rhs: s.clone(),
                });
            }
        }
        let total: usize = parts.iter().map(|p| self.nodes[p.0].shape[axis]).sum();
        let mut shape = first.clone();
        shape[axis] = total;
        let value = if rank == 1 || axis == 0 {
            let mut v = Vec::with_capacity(shape.iter().product());
            for p in parts {
                v.extend_from_slice(&self.nodes[p.0].value);
            }
            v
        } else {
            // column concat of row-major matrices
            let rows = first[0];
            let mut v = Vec::with_capacity(shape.iter().product());
            for i in 0..rows {
                for p in parts {
                    let cols = self.nodes[p.0].shape[1];
                    let pv = &self.nodes[p.0].value;
                    v.extend_from_slice(&pv[i * cols..(i + 1) * cols]);
                }
            }
            v
        };
        let needs = parts.iter().any(|p| self.needs(*p));
        Ok(self.push(
            shape,
            value,
            Op::Concat {
                parts: parts.to_vec(),
                axis,
            },
            needs,
        ))
    }

    /// Contiguous slice of `len` indices starting at `start` along `axis`.
    pub fn slice(&mut self, a: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let s = self.nodes[a.0].shape.clone();
        if axis >= s.len() || start + len > s[axis] {
            return Err(Error::ShapeMismatch {
                op: "slice",
                lhs: s,
                rhs: vec![axis, start, len],
            });
        }
        let v = &self.nodes[a.0].value;
        let (shape, value) = if s.len() == 1 || axis == 0 {
            let width: usize = s.iter().skip(1).product::<usize>().max(1);
            let mut shape = s.clone();
            shape[0] = len;
            (shape, v[start * width..(start + len) * width].to_vec())
        } else {
            let (rows, cols) = (s[0], s[1]);
            let mut out = Vec::with_capacity(rows * len);
            for i in 0..rows {
                out.extend_from_slice(&v[i * cols + start..i * cols + start + len]);
            }
            (vec![rows, len], out)
        };
        let needs = self.needs(a);
        Ok(self.push(
            shape,
            value,
            Op::Slice {
                input: a,
                axis,
                start,
            },
            needs,
        ))
    }

    /// Row-wise softmax of a rank-2 tensor.
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let s = &self.nodes[a.0].shape;
        if s.len() != 2 {
            return Err(Error::ShapeMismatch {
                op: "softmax",
                lhs: s.clone(),
                rhs: vec![],
            });
        }
        let (rows, cols) = (s[0], s[1]);
        let v = &self.nodes[a.0].value;
        let mut out = vec![0.0; v.len()];
        for i in 0..rows {
            let row = &v[i * cols..(i + 1) * cols];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for j in 0..cols {
                let e = (row[j] - max).exp();
                out[i * cols + j] = e;
                denom += e;
            }
            for j in 0..cols {
                out[i * cols + j] /= denom;
            }
        }
        let needs = self.needs(a);
        Ok(self.push(s.clone(), out, Op::Softmax(a), needs))
    }

    /// Row-wise layer normalization with learned gain and bias.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let s = self.nodes[x.0].shape.clone();
        if s.len() != 2 {
            return Err(Error::ShapeMismatch {
                op: "layer_norm",
                lhs: s,
                rhs: vec![],
            });
        }
        let (rows, cols) = (s[0], s[1]);
        for p in [gain, bias] {
            if self.nodes[p.0].shape != [cols] {
                return Err(Error::ShapeMismatch {
                    op: "layer_norm",
                    lhs: s,
                    rhs: self.nodes[p.0].shape.clone(),
                });
            }
        }
        let v = &self.nodes[x.0].value;
        let g = &self.nodes[gain.0].value;
        let b = &self.nodes[bias.0].value;
        let mut out = vec![0.0; v.len()];
        for i in 0..rows {
            let row = &v[i * cols..(i + 1) * cols];
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / cols as f64;
            let rstd = 1.0 / (var + eps).sqrt();
            for j in 0..cols {
                out[i * cols + j] = g[j] * (row[j] - mean) * rstd + b[j];
            }
        }
        let needs = self.needs(x) || self.needs(gain) || self.needs(bias);
        Ok(self.push(s, out, Op::LayerNorm { x, gain, bias, eps }, needs))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.iter().map(|x| x.max(0.0)).collect();
        let needs = self.needs(a);
        self.push(self.nodes[a.0].shape.clone(), value, Op::Relu(a), needs)
    }

    /// GELU, tanh approximation.
    pub fn gelu(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.iter().map(|&x| gelu_fwd(x)).collect();
        let needs = self.needs(a);
        self.push(self.nodes[a.0].shape.clone(), value, Op::Gelu(a), needs)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.iter().sum();
        let needs = self.needs(a);
        self.push(vec![1], vec![v], Op::Sum(a), needs)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.nodes[a.0].value.len().max(1);
        let v = self.nodes[a.0].value.iter().sum::<f64>() / n as f64;
        let needs = self.needs(a);
        self.push(vec![1], vec![v], Op::Mean(a), needs)
    }

    /// Mean absolute difference (scalar).
    pub fn l1_loss(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("l1_loss", a, b)?;
        let n = self.nodes[a.0].value.len().max(1);
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / n as f64;
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(vec![1], vec![v], Op::L1Loss(a, b), needs))
    }

    /// Unreduced squared norm of the difference (scalar).
    pub fn l2_loss(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("l2_loss", a, b)?;
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(vec![1], vec![v], Op::L2Loss(a, b), needs))
    }

    /// Cross product of two 3-vectors.
    pub fn cross(&mut self, a: Var, b: Var) -> Result<Var> {
        for v in [a, b] {
            if self.nodes[v.0].shape != [3] {
                return Err(Error::ShapeMismatch {
                    op: "cross",
                    lhs: self.nodes[a.0].shape.clone(),
                    rhs: self.nodes[b.0].shape.clone(),
                });
            }
        }
        let x = &self.nodes[a.0].value;
        let y = &self.nodes[b.0].value;
        let value = vec![
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(vec![3], value, Op::Cross(a, b), needs))
    }

    /// Inner product of two same-length rank-1 tensors (scalar).
    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("dot", a, b)?;
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .sum();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(vec![1], vec![v], Op::Dot(a, b), needs))
    }

    /// Scales a rank-1 tensor to unit Euclidean norm.
    pub fn normalize(&mut self, a: Var) -> Result<Var> {
        let v = &self.nodes[a.0].value;
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-12 || !n.is_finite() {
            return Err(Error::DegenerateRotation(
                "cannot normalize a near-zero vector".into(),
            ));
        }
        let value = v.iter().map(|x| x / n).collect();
        let needs = self.needs(a);
        Ok(self.push(
            self.nodes[a.0].shape.clone(),
            value,
            Op::Normalize(a),
            needs,
        ))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        if shape.iter().product::<usize>() != self.nodes[a.0].value.len() || shape.len() > 2 {
            return Err(Error::ShapeMismatch {
                op: "reshape",
                lhs: self.nodes[a.0].shape.clone(),
                rhs: shape.to_vec(),
            });
        }
        let value = self.nodes[a.0].value.clone();
        let needs = self.needs(a);
        Ok(self.push(shape.to_vec(), value, Op::Reshape(a), needs))
    }

    /// Adds a rank-1 bias to every row of a rank-2 tensor.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let s = self.nodes[x.0].shape.clone();
        let bs = self.nodes[bias.0].shape.clone();
        let (rows, cols) = rows_cols(&s);
        if bs != [cols] {
            return Err(Error::ShapeMismatch {
                op: "add_bias",
                lhs: s,
                rhs: bs,
            });
        }
        let mut value = self.nodes[x.0].value.clone();
        let b = &self.nodes[bias.0].value;
        for i in 0..rows {
            for j in 0..cols {
                value[i * cols + j] += b[j];
            }
        }
        let needs = self.needs(x) || self.needs(bias);
        Ok(self.push(s, value, Op::AddBias(x, bias), needs))
    }

    /// Linear layer: `x @ w + b`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let y = self.matmul(x, w)?;
        if self.nodes[y.0].shape.len() == 1 {
            // rank-1 result: bias add is a plain add
            self.add(y, b)
        } else {
            self.add_bias(y, b)
        }
    }

    /// Reverse sweep from a scalar loss; fills the per-node gradient buffers
    /// readable through [`Tape::grad`].
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss.0].shape
            )));
        }
        self.grads = vec![None; self.nodes.len()];
        self.grads[loss.0] = Some(vec![1.0]);
        for id in (0..=loss.0).rev() {
            if !self.nodes[id].needs_grad || self.grads[id].is_none() {
                continue;
            }
            let dz = self.grads[id].clone().unwrap();
            self.backprop_node(id, &dz);
        }
        Ok(())
    }

    fn acc(&mut self, v: Var, idx: usize, amount: f64) {
        if !self.nodes[v.0].needs_grad {
            return;
        }
        let len = self.nodes[v.0].value.len();
        let g = self.grads[v.0].get_or_insert_with(|| vec![0.0; len]);
        g[idx] += amount;
    }

    fn acc_all(&mut self, v: Var, amounts: &[f64]) {
        if !self.nodes[v.0].needs_grad {
            return;
        }
        let len = self.nodes[v.0].value.len();
        let g = self.grads[v.0].get_or_insert_with(|| vec![0.0; len]);
        for (gi, ai) in g.iter_mut().zip(amounts) {
            *gi += ai;
        }
    }

    fn backprop_node(&mut self, id: usize, dz: &[f64]) {
        let op = self.nodes[id].op.clone();
        match op {
            Op::Leaf | Op::Constant => {}
            Op::Add(a, b) => {
                self.acc_all(a, dz);
                self.acc_all(b, dz);
            }
            Op::Sub(a, b) => {
                self.acc_all(a, dz);
                let neg: Vec<f64> = dz.iter().map(|x| -x).collect();
                self.acc_all(b, &neg);
            }
            Op::Mul(a, b) => {
                let da: Vec<f64> = dz
                    .iter()
                    .zip(&self.nodes[b.0].value)
                    .map(|(d, y)| d * y)
                    .collect();
                let db: Vec<f64> = dz
                    .iter()
                    .zip(&self.nodes[a.0].value)
                    .map(|(d, x)| d * x)
                    .collect();
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::MulScalar(a, s) => {
                let sv = self.nodes[s.0].value[0];
                let da: Vec<f64> = dz.iter().map(|d| d * sv).collect();
                let ds: f64 = dz
                    .iter()
                    .zip(&self.nodes[a.0].value)
                    .map(|(d, x)| d * x)
                    .sum();
                self.acc_all(a, &da);
                self.acc(s, 0, ds);
            }
            Op::Scale(a, c) => {
                let da: Vec<f64> = dz.iter().map(|d| d * c).collect();
                self.acc_all(a, &da);
            }
            Op::Neg(a) => {
                let da: Vec<f64> = dz.iter().map(|d| -d).collect();
                self.acc_all(a, &da);
            }
            Op::Matmul(a, b) => {
                let (sa, sb) = (&self.nodes[a.0].shape, &self.nodes[b.0].shape);
                let (m, k) = match sa.len() {
                    1 => (1, sa[0]),
                    _ => (sa[0], sa[1]),
                };
                let n = match sb.len() {
                    1 => 1,
                    _ => sb[1],
                };
                let av = &self.nodes[a.0].value;
                let bv = &self.nodes[b.0].value;
                // da = dz @ b^T
                let mut da = vec![0.0; m * k];
                for i in 0..m {
                    for j in 0..n {
                        let d = dz[i * n + j];
                        if d != 0.0 {
                            for l in 0..k {
                                da[i * k + l] += d * bv[l * n + j];
                            }
                        }
                    }
                }
                // db = a^T @ dz
                let mut db = vec![0.0; k * n];
                for i in 0..m {
                    for l in 0..k {
                        let x = av[i * k + l];
                        if x != 0.0 {
                            for j in 0..n {
                                db[l * n + j] += x * dz[i * n + j];
                            }
                        }
                    }
                }
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::Transpose(a) => {
                let s = &self.nodes[a.0].shape;
                let (m, n) = (s[0], s[1]);
                let mut da = vec![0.0; m * n];
                for i in 0..m {
                    for j in 0..n {
                        da[i * n + j] = dz[j * m + i];
                    }
                }
                self.acc_all(a, &da);
            }
            Op::Concat { parts, axis } => {
                let rank = self.nodes[parts[0].0].shape.len();
                if rank == 1 || axis == 0 {
                    let mut off = 0;
                    for p in parts {
                        let len = self.nodes[p.0].value.len();
                        let chunk = dz[off..off + len].to_vec();
                        self.acc_all(p, &chunk);
                        off += len;
                    }
                } else {
                    let rows = self.nodes[parts[0].0].shape[0];
                    let total_cols: usize = parts.iter().map(|p| self.nodes[p.0].shape[1]).sum();
                    let mut col_off = 0;
                    for p in parts {
                        let cols = self.nodes[p.0].shape[1];
                        let mut dp = vec![0.0; rows * cols];
                        for i in 0..rows {
                            for j in 0..cols {
                                dp[i * cols + j] = dz[i * total_cols + col_off + j];
                            }
                        }
                        self.acc_all(p, &dp);
                        col_off += cols;
                    }
                }
            }
            Op::Slice { input, axis, start } => {
                if !self.nodes[input.0].needs_grad {
                    return;
                }
                let s = self.nodes[input.0].shape.clone();
                let out_shape = self.nodes[id].shape.clone();
                let len_in = self.nodes[input.0].value.len();
                let g = self.grads[input.0].get_or_insert_with(|| vec![0.0; len_in]);
                if s.len() == 1 || axis == 0 {
                    let width: usize = s.iter().skip(1).product::<usize>().max(1);
                    for (i, d) in dz.iter().enumerate() {
                        g[start * width + i] += d;
                    }
                } else {
                    let cols = s[1];
                    let out_cols = out_shape[1];
                    for i in 0..out_shape[0] {
                        for j in 0..out_cols {
                            g[i * cols + start + j] += dz[i * out_cols + j];
                        }
                    }
                }
            }
            Op::Softmax(a) => {
                let s = &self.nodes[id].shape;
                let (rows, cols) = (s[0], s[1]);
                let out = &self.nodes[id].value;
                let mut da = vec![0.0; out.len()];
                for i in 0..rows {
                    let srow = &out[i * cols..(i + 1) * cols];
                    let drow = &dz[i * cols..(i + 1) * cols];
                    let inner: f64 = srow.iter().zip(drow).map(|(s, d)| s * d).sum();
                    for j in 0..cols {
                        da[i * cols + j] = srow[j] * (drow[j] - inner);
                    }
                }
                self.acc_all(a, &da);
            }
            Op::LayerNorm { x, gain, bias, eps } => {
                let s = &self.nodes[x.0].shape;
                let (rows, cols) = (s[0], s[1]);
                let xv = self.nodes[x.0].value.clone();
                let gv = self.nodes[gain.0].value.clone();
                let mut dx = vec![0.0; xv.len()];
                let mut dg = vec![0.0; cols];
                let mut db = vec![0.0; cols];
                for i in 0..rows {
                    let row = &xv[i * cols..(i + 1) * cols];
                    let drow = &dz[i * cols..(i + 1) * cols];
                    let mean = row.iter().sum::<f64>() / cols as f64;
                    let var =
                        row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / cols as f64;
                    let rstd = 1.0 / (var + eps).sqrt();
                    let xhat: Vec<f64> = row.iter().map(|x| (x - mean) * rstd).collect();
                    let dxhat: Vec<f64> = drow.iter().zip(&gv).map(|(d, g)| d * g).collect();
                    let mean_dxhat = dxhat.iter().sum::<f64>() / cols as f64;
                    let mean_dxhat_xhat =
                        dxhat.iter().zip(&xhat).map(|(a, b)| a * b).sum::<f64>() / cols as f64;
                    for j in 0..cols {
                        dx[i * cols + j] =
                            rstd * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
                        dg[j] += drow[j] * xhat[j];
                        db[j] += drow[j];
                    }
                }
                self.acc_all(x, &dx);
                self.acc_all(gain, &dg);
                self.acc_all(bias, &db);
            }
            Op::Relu(a) => {
                let da: Vec<f64> = dz
                    .iter()
                    .zip(&self.nodes[a.0].value)
                    .map(|(d, x)| if *x > 0.0 { *d } else { 0.0 })
                    .collect();
                self.acc_all(a, &da);
            }
            Op::Gelu(a) => {
                let da: Vec<f64> = dz
                    .iter()
                    .zip(&self.nodes[a.0].value)
                    .map(|(d, x)| d * gelu_bwd(*x))
                    .collect();
                self.acc_all(a, &da);
            }
            Op::Sum(a) => {
                let d = dz[0];
                let da = vec![d; self.nodes[a.0].value.len()];
                self.acc_all(a, &da);
            }
            Op::Mean(a) => {
                let n = self.nodes[a.0].value.len().max(1);
                let d = dz[0] / n as f64;
                let da = vec![d; self.nodes[a.0].value.len()];
                self.acc_all(a, &da);
            }
            Op::L1Loss(a, b) => {
                let n = self.nodes[a.0].value.len().max(1);
                let d = dz[0] / n as f64;
                let da: Vec<f64> = self.nodes[a.0]
                    .value
                    .iter()
                    .zip(&self.nodes[b.0].value)
                    .map(|(x, y)| d * (x - y).signum_or_zero())
                    .collect();
                let db: Vec<f64> = da.iter().map(|x| -x).collect();
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::L2Loss(a, b) => {
                let d = dz[0];
                let da: Vec<f64> = self.nodes[a.0]
                    .value
                    .iter()
                    .zip(&self.nodes[b.0].value)
                    .map(|(x, y)| d * 2.0 * (x - y))
                    .collect();
                let db: Vec<f64> = da.iter().map(|x| -x).collect();
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::Cross(a, b) => {
                let x = self.nodes[a.0].value.clone();
                let y = self.nodes[b.0].value.clone();
                // d/da (a x b) applied to dz is b x dz; d/db is dz x a.
                let da = [
                    y[1] * dz[2] - y[2] * dz[1],
                    y[2] * dz[0] - y[0] * dz[2],
                    y[0] * dz[1] - y[1] * dz[0],
                ];
                let db = [
                    dz[1] * x[2] - dz[2] * x[1],
                    dz[2] * x[0] - dz[0] * x[2],
                    dz[0] * x[1] - dz[1] * x[0],
                ];
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::Dot(a, b) => {
                let d = dz[0];
                let da: Vec<f64> = self.nodes[b.0].value.iter().map(|y| d * y).collect();
                let db: Vec<f64> = self.nodes[a.0].value.iter().map(|x| d * x).collect();
                self.acc_all(a, &da);
                self.acc_all(b, &db);
            }
            Op::Normalize(a) => {
                let x = &self.nodes[a.0].value;
                let n = x.iter().map(|x| x * x).sum::<f64>().sqrt();
                let z = &self.nodes[id].value;
                let zdz: f64 = z.iter().zip(dz).map(|(zi, di)| zi * di).sum();
                let da: Vec<f64> = z
                    .iter()
                    .zip(dz)
                    .map(|(zi, di)| (di - zi * zdz) / n)
                    .collect();
                self.acc_all(a, &da);
            }
            Op::Reshape(a) => {
                self.acc_all(a, dz);
            }
            Op::AddBias(x, bias) => {
                self.acc_all(x, dz);
                if self.nodes[bias.0].needs_grad {
                    let cols = self.nodes[bias.0].value.len();
                    let rows = dz.len() / cols;
                    let mut db = vec![0.0; cols];
                    for i in 0..rows {
                        for j in 0..cols {
                            db[j] += dz[i * cols + j];
                        }
                    }
                    self.acc_all(bias, &db);
                }
            }
        }
    }
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> f64 {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

fn matmul_kernel(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for l in 0..k {
            let x = a[i * k + l];
            if x != 0.0 {
                let brow = &b[l * n..(l + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, bv) in orow.iter_mut().zip(brow) {
                    *o += x * bv;
                }
            }
        }
    }
    out
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

fn gelu_fwd(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_bwd(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    let sech2 = 1.0 - t * t;
    0.5 * (1.0 + t) + 0.5 * x * sech2 * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}
