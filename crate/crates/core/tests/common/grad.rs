//! Gradient-check suites shared by the gradcheck tests and the acceptance
//! gate: every tape primitive against central finite differences, the
//! differentiable kinematics chain, and the full composite loss.

use super::{check_graph_gradients, random_data, COMPOSITE_TOL, FD_EPS, PRIMITIVE_TOL};
use sparsepose::autodiff::{Tape, Var};
use sparsepose::data::{synth_motion, MotionKind};
use sparsepose::model::{ModelConfig, ModelWeights};
use sparsepose::rng::Rng64;
use sparsepose::skeleton::Skeleton;
use sparsepose::training::{frame_loss, LossWeights, PreparedClip};

/// Projects a tensor to a scalar with fixed random weights so every output
/// component receives a distinct adjoint.
fn project(tape: &mut Tape, v: Var, weights: &[f64]) -> Var {
    let shape = tape.shape(v).to_vec();
    let w = tape.constant(&shape, weights.to_vec());
    let prod = tape.mul(v, w).unwrap();
    tape.sum(prod)
}

pub fn check_elementwise() {
    let mut rng = Rng64::new(101);
    let a = random_data(&mut rng, 6, -2.0, 2.0);
    let b = random_data(&mut rng, 6, -2.0, 2.0);
    let w = random_data(&mut rng, 6, -1.0, 1.0);
    for (name, op) in [
        ("add", 0usize),
        ("sub", 1),
        ("mul", 2),
        ("neg", 3),
        ("scale", 4),
    ] {
        let w = w.clone();
        check_graph_gradients(
            name,
            &[(vec![2, 3], a.clone()), (vec![2, 3], b.clone())],
            &move |tape, vars| {
                let y = match op {
                    0 => tape.add(vars[0], vars[1]).unwrap(),
                    1 => tape.sub(vars[0], vars[1]).unwrap(),
                    2 => tape.mul(vars[0], vars[1]).unwrap(),
                    3 => tape.neg(vars[0]),
                    _ => tape.scale(vars[0], -1.3),
                };
                project(tape, y, &w)
            },
            PRIMITIVE_TOL,
        );
    }
}

pub fn check_mul_scalar() {
    let mut rng = Rng64::new(102);
    let a = random_data(&mut rng, 5, -2.0, 2.0);
    let w = random_data(&mut rng, 5, -1.0, 1.0);
    check_graph_gradients(
        "mul_scalar",
        &[(vec![5], a), (vec![1], vec![0.7])],
        &move |tape, vars| {
            let y = tape.mul_scalar(vars[0], vars[1]).unwrap();
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_matmul() {
    let mut rng = Rng64::new(103);
    let a = random_data(&mut rng, 6, -1.5, 1.5);
    let b = random_data(&mut rng, 12, -1.5, 1.5);
    let w = random_data(&mut rng, 8, -1.0, 1.0);
    check_graph_gradients(
        "matmul 2d*2d",
        &[(vec![2, 3], a.clone()), (vec![3, 4], b)],
        &move |tape, vars| {
            let y = tape.matmul(vars[0], vars[1]).unwrap();
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
    let v = random_data(&mut rng, 3, -1.5, 1.5);
    let w2 = random_data(&mut rng, 2, -1.0, 1.0);
    check_graph_gradients(
        "matmul 2d*1d",
        &[(vec![2, 3], a.clone()), (vec![3], v)],
        &move |tape, vars| {
            let y = tape.matmul(vars[0], vars[1]).unwrap();
            project(tape, y, &w2)
        },
        PRIMITIVE_TOL,
    );
    let u = random_data(&mut rng, 2, -1.5, 1.5);
    let w3 = random_data(&mut rng, 3, -1.0, 1.0);
    check_graph_gradients(
        "matmul 1d*2d",
        &[(vec![2], u), (vec![2, 3], a)],
        &move |tape, vars| {
            let y = tape.matmul(vars[0], vars[1]).unwrap();
            project(tape, y, &w3)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_shape_ops() {
    let mut rng = Rng64::new(104);
    let a = random_data(&mut rng, 6, -2.0, 2.0);
    let b = random_data(&mut rng, 6, -2.0, 2.0);
    let w6 = random_data(&mut rng, 6, -1.0, 1.0);
    let w12 = random_data(&mut rng, 12, -1.0, 1.0);
    let w4 = random_data(&mut rng, 4, -1.0, 1.0);
    {
        let w6 = w6.clone();
        check_graph_gradients(
            "transpose",
            &[(vec![2, 3], a.clone())],
            &move |tape, vars| {
                let y = tape.transpose(vars[0]).unwrap();
                project(tape, y, &w6)
            },
            PRIMITIVE_TOL,
        );
    }
    {
        let w6 = w6.clone();
        check_graph_gradients(
            "reshape",
            &[(vec![2, 3], a.clone())],
            &move |tape, vars| {
                let y = tape.reshape(vars[0], &[6]).unwrap();
                project(tape, y, &w6)
            },
            PRIMITIVE_TOL,
        );
    }
    check_graph_gradients(
        "slice rows+cols",
        &[(vec![2, 3], a.clone())],
        &move |tape, vars| {
            let rows = tape.slice(vars[0], 0, 1, 1).unwrap();
            let cols = tape.slice(rows, 1, 1, 2).unwrap();
            let flat = tape.reshape(cols, &[2]).unwrap();
            let s = tape.sum(flat);
            let sq = tape.mul(s, s).unwrap();
            tape.sum(sq)
        },
        PRIMITIVE_TOL,
    );
    {
        let w12 = w12.clone();
        check_graph_gradients(
            "concat axis0",
            &[(vec![2, 3], a.clone()), (vec![2, 3], b.clone())],
            &move |tape, vars| {
                let y = tape.concat(&[vars[0], vars[1]], 0).unwrap();
                project(tape, y, &w12)
            },
            PRIMITIVE_TOL,
        );
    }
    check_graph_gradients(
        "concat axis1",
        &[(vec![2, 3], a.clone()), (vec![2, 3], b)],
        &move |tape, vars| {
            let y = tape.concat(&[vars[0], vars[1]], 1).unwrap();
            project(tape, y, &w12)
        },
        PRIMITIVE_TOL,
    );
    check_graph_gradients(
        "concat 1d",
        &[(vec![2], a[..2].to_vec()), (vec![2], a[2..4].to_vec())],
        &move |tape, vars| {
            let y = tape.concat(&[vars[0], vars[1]], 0).unwrap();
            project(tape, y, &w4)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_softmax_layer_norm() {
    let mut rng = Rng64::new(105);
    let x = random_data(&mut rng, 8, -2.0, 2.0);
    let w = random_data(&mut rng, 8, -1.0, 1.0);
    {
        let w = w.clone();
        check_graph_gradients(
            "softmax",
            &[(vec![2, 4], x.clone())],
            &move |tape, vars| {
                let y = tape.softmax(vars[0]).unwrap();
                project(tape, y, &w)
            },
            PRIMITIVE_TOL,
        );
    }
    let gain = random_data(&mut rng, 4, 0.5, 1.5);
    let bias = random_data(&mut rng, 4, -0.5, 0.5);
    check_graph_gradients(
        "layer_norm",
        &[(vec![2, 4], x), (vec![4], gain), (vec![4], bias)],
        &move |tape, vars| {
            let y = tape.layer_norm(vars[0], vars[1], vars[2], 1e-5).unwrap();
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_activations() {
    let mut rng = Rng64::new(106);
    // keep relu inputs away from the kink
    let x: Vec<f64> = (0..6)
        .map(|_| {
            let v = rng.uniform(0.1, 2.0);
            if rng.next_f64() < 0.5 {
                -v
            } else {
                v
            }
        })
        .collect();
    let w = random_data(&mut rng, 6, -1.0, 1.0);
    {
        let w = w.clone();
        check_graph_gradients(
            "relu",
            &[(vec![6], x.clone())],
            &move |tape, vars| {
                let y = tape.relu(vars[0]);
                project(tape, y, &w)
            },
            PRIMITIVE_TOL,
        );
    }
    check_graph_gradients(
        "gelu",
        &[(vec![6], x)],
        &move |tape, vars| {
            let y = tape.gelu(vars[0]);
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_reductions_losses() {
    let mut rng = Rng64::new(107);
    let a = random_data(&mut rng, 6, -2.0, 2.0);
    // keep |a - b| bounded away from the L1 kink
    let b: Vec<f64> = a.iter().map(|x| x + 0.5 + rng.uniform(0.0, 1.0)).collect();
    check_graph_gradients(
        "sum",
        &[(vec![6], a.clone())],
        &|tape, vars| tape.sum(vars[0]),
        PRIMITIVE_TOL,
    );
    check_graph_gradients(
        "mean",
        &[(vec![6], a.clone())],
        &|tape, vars| tape.mean(vars[0]),
        PRIMITIVE_TOL,
    );
    check_graph_gradients(
        "l1_loss",
        &[(vec![6], a.clone()), (vec![6], b.clone())],
        &|tape, vars| tape.l1_loss(vars[0], vars[1]).unwrap(),
        PRIMITIVE_TOL,
    );
    check_graph_gradients(
        "l2_loss",
        &[(vec![6], a.clone()), (vec![6], b)],
        &|tape, vars| tape.l2_loss(vars[0], vars[1]).unwrap(),
        PRIMITIVE_TOL,
    );
}

pub fn check_vector_ops() {
    let mut rng = Rng64::new(108);
    let a = random_data(&mut rng, 3, -2.0, 2.0);
    let b = random_data(&mut rng, 3, -2.0, 2.0);
    let w = random_data(&mut rng, 3, -1.0, 1.0);
    {
        let w = w.clone();
        check_graph_gradients(
            "cross",
            &[(vec![3], a.clone()), (vec![3], b.clone())],
            &move |tape, vars| {
                let y = tape.cross(vars[0], vars[1]).unwrap();
                project(tape, y, &w)
            },
            PRIMITIVE_TOL,
        );
    }
    check_graph_gradients(
        "dot",
        &[(vec![3], a.clone()), (vec![3], b)],
        &|tape, vars| tape.dot(vars[0], vars[1]).unwrap(),
        PRIMITIVE_TOL,
    );
    check_graph_gradients(
        "normalize",
        &[(vec![3], a.clone())],
        &move |tape, vars| {
            let y = tape.normalize(vars[0]).unwrap();
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_linear() {
    let mut rng = Rng64::new(109);
    let x = random_data(&mut rng, 6, -2.0, 2.0);
    let wm = random_data(&mut rng, 12, -1.0, 1.0);
    let bias = random_data(&mut rng, 4, -1.0, 1.0);
    let w = random_data(&mut rng, 8, -1.0, 1.0);
    check_graph_gradients(
        "linear (matmul + add_bias)",
        &[(vec![2, 3], x), (vec![3, 4], wm), (vec![4], bias)],
        &move |tape, vars| {
            let y = tape.linear(vars[0], vars[1], vars[2]).unwrap();
            project(tape, y, &w)
        },
        PRIMITIVE_TOL,
    );
}

pub fn check_diffkin_chain() {
    // recover_6d composed with FK to the left wrist, the exact graph the arm
    // refinement differentiates
    let s = Skeleton::default_rig();
    let mut rng = Rng64::new(110);
    let mut code = random_data(&mut rng, 6, -1.0, 1.0);
    code[0] += 1.5;
    code[4] += 1.5;
    check_graph_gradients(
        "recover_6d -> fk -> hand error",
        &[(vec![6], code)],
        &move |tape, vars| {
            let m = sparsepose::diffkin::recover_6d_var(tape, vars[0]).unwrap();
            let id9: Vec<f64> = vec![1., 0., 0., 0., 1., 0., 0., 0., 1.];
            let global = tape.constant(&[3, 3], id9.clone());
            let locals: Vec<Var> = (1..s.joint_count())
                .map(|j| {
                    if j == 18 {
                        m
                    } else {
                        tape.constant(&[3, 3], id9.clone())
                    }
                })
                .collect();
            let root = tape.constant(&[3], vec![0.0; 3]);
            let pos =
                sparsepose::diffkin::fk_positions_var(tape, &s, global, &locals, root).unwrap();
            let target = tape.constant(&[3], vec![0.4, 0.3, 0.2]);
            tape.l2_loss(pos[s.left_hand_index], target).unwrap()
        },
        PRIMITIVE_TOL,
    );
}

/// Every primitive once.
pub fn run_primitive_suite() {
    check_elementwise();
    check_mul_scalar();
    check_matmul();
    check_shape_ops();
    check_softmax_layer_norm();
    check_activations();
    check_reductions_losses();
    check_vector_ops();
    check_linear();
    check_diffkin_chain();
}

/// Finite-difference check of the full training loss over every parameter of
/// the given model configuration.
pub fn composite_loss_check(cfg: &ModelConfig, tol: f64) {
    let s = Skeleton::default_rig();
    let clip = synth_motion(MotionKind::Composite, 1.0, 42, 60.0, &s).unwrap();
    let prepared = PreparedClip::prepare(&clip, &s).unwrap();
    let target_frame = cfg.window + 3;
    let window = prepared.window_at(target_frame, cfg.window);
    let target = &prepared.targets[target_frame];
    let lw = LossWeights::default();

    let mut weights = ModelWeights::init(cfg, 5).unwrap();
    // move the zero-initialized output heads off their saddle so their
    // gradients are informative
    let mut jitter = Rng64::new(99);
    for (_, t) in weights.tensors_mut() {
        for x in t.data.iter_mut() {
            *x += jitter.uniform(-0.05, 0.05);
        }
    }

    let eval = |w: &ModelWeights| -> f64 {
        let mut tape = Tape::new();
        let bound = w.bind(&mut tape);
        let fwd = w.forward_tape(&mut tape, &bound, &window).unwrap();
        let lv = frame_loss(&mut tape, &s, &fwd, target, &lw, false).unwrap();
        tape.value(lv.total)[0]
    };

    let mut tape = Tape::new();
    let bound = weights.bind(&mut tape);
    let fwd = weights.forward_tape(&mut tape, &bound, &window).unwrap();
    let lv = frame_loss(&mut tape, &s, &fwd, target, &lw, false).unwrap();
    tape.backward(lv.total).unwrap();
    let analytic: Vec<Vec<f64>> = bound
        .vars()
        .iter()
        .zip(weights.tensors())
        .map(|(v, (_, t))| {
            tape.grad(*v)
                .map(|g| g.to_vec())
                .unwrap_or_else(|| vec![0.0; t.len()])
        })
        .collect();

    let names: Vec<String> = weights.tensors().iter().map(|(n, _)| n.clone()).collect();
    for k in 0..names.len() {
        let len = weights.tensors()[k].1.len();
        let base: Vec<f64> = weights.tensors()[k].1.data.clone();
        let mut fd = vec![0.0; len];
        for i in 0..len {
            {
                let mut ts = weights.tensors_mut();
                ts[k].1.data[i] = base[i] + FD_EPS;
            }
            let up = eval(&weights);
            {
                let mut ts = weights.tensors_mut();
                ts[k].1.data[i] = base[i] - FD_EPS;
            }
            let down = eval(&weights);
            {
                let mut ts = weights.tensors_mut();
                ts[k].1.data[i] = base[i];
            }
            fd[i] = (up - down) / (2.0 * FD_EPS);
        }
        super::assert_grad_close(&analytic[k], &fd, tol, &names[k]);
    }
}

/// The two downsized configurations used for composite checks.
pub fn toy_config() -> ModelConfig {
    ModelConfig {
        embed_dim: 4,
        num_layers: 1,
        num_heads: 1,
        mlp_hidden: 4,
        window: 2,
        ..ModelConfig::default()
    }
}

pub fn downsized_config() -> ModelConfig {
    ModelConfig {
        embed_dim: 16,
        num_layers: 1,
        num_heads: 2,
        mlp_hidden: 16,
        window: 4,
        ..ModelConfig::default()
    }
}

/// Toy configuration with both structural ablations, exercising the
/// chain-derived global orientation and the direct root head in the loss.
pub fn ablated_config() -> ModelConfig {
    ModelConfig {
        no_stabilizer: true,
        predict_pelvis: true,
        ..toy_config()
    }
}

pub fn run_composite_checks() {
    composite_loss_check(&toy_config(), COMPOSITE_TOL);
    composite_loss_check(&downsized_config(), COMPOSITE_TOL);
    composite_loss_check(&ablated_config(), COMPOSITE_TOL);
}
