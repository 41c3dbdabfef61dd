//! Soft-arm task: dataset generation, the three trainers over the mesh-pose
//! surrogate, per-goal direct optimization, and the fixed-seed evaluation
//! goals.
//!
//! Normalization: the decoder maps (ratios - 1) to vertex displacements from
//! the rest pose; design networks read goal features scaled by the arm
//! length and emit ratios as 1 plus a bounded output in (-0.2, 0.2).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{
    split_dataset, ArmDataset, Dataset, RobotDesign, RobotGoal, RobotRealization, Sample,
    ROBOT_DESIGN_DIM, STRETCH_MAX, STRETCH_MIN,
};
use crate::losses::{robot_cost, stretch_reg, RobotCostConfig};
use crate::nn::{backward_input, backward_into, Mlp, MlpSpec, OutputMap};
use crate::optim::{bfgs_minimize, BfgsConfig, Termination};
use crate::sim::{arm_goal_of, arm_realize, sample_obstacle, ArmConfig};
use crate::{Error, Result};

use super::{check_finite, TrainConfig, TrainResult, Trainer};

/// Goal features: target (2) plus obstacle center (2).
pub const ARM_GOAL_DIM: usize = 4;

const RATIO_HALF_RANGE: f64 = (STRETCH_MAX - STRETCH_MIN) / 2.0;
/// Rest arm length; scales goal coordinates into roughly [-1, 1].
const GOAL_SCALE: f64 = 10.0;

fn vertex_dim(cfg: &ArmConfig) -> usize {
    2 * cfg.n_vertices()
}

fn decoder_layers(hidden: &Option<Vec<usize>>, cfg: &ArmConfig) -> Vec<usize> {
    let mut v = vec![ROBOT_DESIGN_DIM];
    match hidden {
        Some(h) => v.extend(h.iter().copied()),
        None => v.extend([128, 256, 128]),
    }
    v.push(vertex_dim(cfg));
    v
}

fn design_layers(hidden: &Option<Vec<usize>>) -> Vec<usize> {
    let mut v = vec![ARM_GOAL_DIM];
    match hidden {
        Some(h) => v.extend(h.iter().copied()),
        None => v.extend([128, 256, 128]),
    }
    v.push(ROBOT_DESIGN_DIM);
    v
}

fn rest_vertices(cfg: &ArmConfig) -> Vec<[f64; 2]> {
    let rest = RobotDesign::new(vec![1.0; ROBOT_DESIGN_DIM]).expect("rest design is valid");
    arm_realize(&rest, cfg).expect("rest pose realizes").vertices
}

fn goal_features(goal: &RobotGoal) -> [f64; ARM_GOAL_DIM] {
    [
        goal.target[0] / GOAL_SCALE,
        goal.target[1] / GOAL_SCALE,
        goal.obstacle_center[0] / GOAL_SCALE,
        goal.obstacle_center[1] / GOAL_SCALE,
    ]
}

/// Generate an arm dataset: ratios i.i.d. uniform in [0.8, 1.2], realized
/// pose, goal = (top midpoint, obstacle sampled clear of the realization).
/// Split 85/10/5.
pub fn gen_arm(count: usize, seed: u64) -> Result<ArmDataset> {
    let cfg = ArmConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let ratios: Vec<f64> = (0..ROBOT_DESIGN_DIM)
            .map(|_| rng.gen_range(STRETCH_MIN..=STRETCH_MAX))
            .collect();
        let design = RobotDesign::new(ratios)?;
        let realization = arm_realize(&design, &cfg)?;
        let (center, _) = sample_obstacle(&mut rng, Some(&realization))?;
        let goal = arm_goal_of(&realization, center)?;
        samples.push(Sample { design, realization, goal });
    }
    split_dataset(Dataset::new(samples, seed), (0.85, 0.10, 0.05), seed)
}

/// Surrogate pose: rest vertices plus the decoder's predicted displacements.
pub fn arm_surrogate_vertices(decoder: &Mlp, design: &RobotDesign) -> Result<RobotRealization> {
    let cfg = ArmConfig::default();
    let input: Vec<f64> = design.ratios().iter().map(|r| r - 1.0).collect();
    let disp = decoder.forward_value(&input)?;
    let rest = rest_vertices(&cfg);
    let vertices: Vec<[f64; 2]> = rest
        .iter()
        .enumerate()
        .map(|(i, v)| [v[0] + disp[2 * i], v[1] + disp[2 * i + 1]])
        .collect();
    RobotRealization::new(vertices, cfg.top_mid_index())
}

/// Train the arm decoder: (ratios - 1) -> vertex displacements from rest,
/// mean squared error per coordinate.
pub fn train_arm_decoder(data: &ArmDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let train: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.val_samples().collect();
    let arm_cfg = ArmConfig::default();
    let rest = rest_vertices(&arm_cfg);
    let out_dim = vertex_dim(&arm_cfg);

    let spec = MlpSpec::new(decoder_layers(&cfg.hidden, &arm_cfg), OutputMap::Identity)?;
    let mut model = Mlp::init(spec, cfg.seed);
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let row_loss = |model: &Mlp, s: &Sample<RobotDesign, RobotRealization, RobotGoal>| -> Result<f64> {
        let input: Vec<f64> = s.design.ratios().iter().map(|r| r - 1.0).collect();
        let out = model.forward_value(&input)?;
        let mut sum = 0.0;
        for (i, v) in s.realization.vertices.iter().enumerate() {
            let dx = out[2 * i] - (v[0] - rest[i][0]);
            let dy = out[2 * i + 1] - (v[1] - rest[i][1]);
            sum += dx * dx + dy * dy;
        }
        Ok(sum / out_dim as f64)
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &si in &order {
            let s = train[si];
            let input: Vec<f64> = s.design.ratios().iter().map(|r| r - 1.0).collect();
            let (out, cache) = model.forward(&input)?;
            let mut grad = vec![0.0f64; out_dim];
            let mut sum = 0.0;
            for (i, v) in s.realization.vertices.iter().enumerate() {
                let dx = out[2 * i] - (v[0] - rest[i][0]);
                let dy = out[2 * i + 1] - (v[1] - rest[i][1]);
                sum += dx * dx + dy * dy;
                grad[2 * i] = 2.0 * dx / out_dim as f64;
                grad[2 * i + 1] = 2.0 * dy / out_dim as f64;
            }
            loss_sum += sum / out_dim as f64;
            backward_into(&model.spec, &model.params, &cache, &grad, Some(&mut trainer.grad_acc))?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "arm decoder")?);
        let mut vsum = 0.0;
        for s in &val {
            vsum += row_loss(&model, s)?;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

fn ratios_from_output(out: &[f64]) -> Result<RobotDesign> {
    RobotDesign::new(out.iter().map(|o| 1.0 + o).collect())
}

/// Design predicted by a trained design network (encoder or direct learning).
pub fn arm_encoder_design(net: &Mlp, goal: &RobotGoal) -> Result<RobotDesign> {
    let out = net.forward_value(&goal_features(goal))?;
    ratios_from_output(&out)
}

/// Composed per-sample robot cost for a design network through the frozen
/// decoder, with encoder-parameter gradient accumulation.
fn composed_arm_loss(
    net: &Mlp,
    decoder: &Mlp,
    goal: &RobotGoal,
    cost_cfg: &RobotCostConfig,
    rest: &[[f64; 2]],
    trainer: Option<&mut Trainer>,
) -> Result<f64> {
    let cfg = ArmConfig::default();
    let (out, net_cache) = net.forward(&goal_features(goal))?;
    let design = ratios_from_output(&out)?;
    let dec_input: Vec<f64> = design.ratios().iter().map(|r| r - 1.0).collect();
    let (disp, dec_cache) = decoder.forward(&dec_input)?;
    let vertices: Vec<[f64; 2]> = rest
        .iter()
        .enumerate()
        .map(|(i, v)| [v[0] + disp[2 * i], v[1] + disp[2 * i + 1]])
        .collect();
    let u = RobotRealization::new(vertices, cfg.top_mid_index())?;
    let (value, grad_ratios, grad_vertices) = robot_cost(&design, &u, goal, cost_cfg)?;

    if let Some(trainer) = trainer {
        let flat: Vec<f64> = grad_vertices.iter().flat_map(|g| [g[0], g[1]]).collect();
        let through_dec = backward_input(&decoder.spec, &decoder.params, &dec_cache, &flat)?;
        let upstream: Vec<f64> = grad_ratios
            .iter()
            .zip(&through_dec)
            .map(|(a, b)| a + b)
            .collect();
        backward_into(&net.spec, &net.params, &net_cache, &upstream, Some(&mut trainer.grad_acc))?;
    }
    Ok(value)
}

/// Train the encoder through the frozen decoder, minimizing the full robot
/// cost (target distance, obstacle barrier, stretch regularizer weighted by
/// the config lambda).
pub fn train_arm_encoder(data: &ArmDataset, decoder: &Mlp, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let arm_cfg = ArmConfig::default();
    if decoder.spec.input_dim() != ROBOT_DESIGN_DIM
        || decoder.spec.output_dim() != vertex_dim(&arm_cfg)
    {
        return Err(Error::ShapeMismatch("decoder does not fit the arm task".into()));
    }
    let train: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.val_samples().collect();
    let rest = rest_vertices(&arm_cfg);
    let cost_cfg = RobotCostConfig { lambda2: cfg.lambda, ..RobotCostConfig::default() };

    let spec = MlpSpec::new(design_layers(&cfg.hidden), OutputMap::Bounded(RATIO_HALF_RANGE))?;
    let mut model = Mlp::init(spec, cfg.seed.wrapping_add(1));
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &si in &order {
            loss_sum += composed_arm_loss(
                &model,
                decoder,
                &train[si].goal,
                &cost_cfg,
                &rest,
                Some(&mut trainer),
            )?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "arm encoder")?);
        let mut vsum = 0.0;
        for s in &val {
            vsum += composed_arm_loss(&model, decoder, &s.goal, &cost_cfg, &rest, None)?;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

/// Train the direct-learning baseline: goal features -> ratios, supervised
/// against the stored design plus the lambda-weighted stretch regularizer.
pub fn train_arm_direct(data: &ArmDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let train: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<RobotDesign, RobotRealization, RobotGoal>> = data.val_samples().collect();

    let spec = MlpSpec::new(design_layers(&cfg.hidden), OutputMap::Bounded(RATIO_HALF_RANGE))?;
    let mut model = Mlp::init(spec, cfg.seed.wrapping_add(2));
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));

    let sample_loss = |net: &Mlp,
                       s: &Sample<RobotDesign, RobotRealization, RobotGoal>,
                       trainer: Option<&mut Trainer>|
     -> Result<f64> {
        let (out, cache) = net.forward(&goal_features(&s.goal))?;
        let design = ratios_from_output(&out)?;
        let mut loss = 0.0;
        let mut grad = vec![0.0f64; ROBOT_DESIGN_DIM];
        for (i, (p, t)) in design.ratios().iter().zip(s.design.ratios()).enumerate() {
            let d = p - t;
            loss += d * d / ROBOT_DESIGN_DIM as f64;
            grad[i] = 2.0 * d / ROBOT_DESIGN_DIM as f64;
        }
        let (reg, reg_grad) = stretch_reg(&design);
        loss += cfg.lambda * reg;
        for (g, r) in grad.iter_mut().zip(&reg_grad) {
            *g += cfg.lambda * r;
        }
        if let Some(trainer) = trainer {
            backward_into(&net.spec, &net.params, &cache, &grad, Some(&mut trainer.grad_acc))?;
        }
        Ok(loss)
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &si in &order {
            loss_sum += sample_loss(&model, train[si], Some(&mut trainer))?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "arm direct learning")?);
        let mut vsum = 0.0;
        for s in &val {
            vsum += sample_loss(&model, s, None)?;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

/// Per-goal direct optimization: BFGS over 40 pre-sigmoid variables z with
/// ratios = 1 + 0.2 (2 sigmoid(z) - 1), initialized at rest (z = 0),
/// minimizing the robot cost of the surrogate pose.
///
/// Returns the optimized design and a line-search warning flag.
pub fn arm_direct_optimize(
    goal: &RobotGoal,
    decoder: &Mlp,
    cost_cfg: &RobotCostConfig,
    bfgs: &BfgsConfig,
) -> Result<(RobotDesign, bool)> {
    let cfg = ArmConfig::default();
    let rest = rest_vertices(&cfg);
    let n = ROBOT_DESIGN_DIM;

    let to_design = |x: &[f64]| -> (RobotDesign, Vec<f64>) {
        let mut dsig = Vec::with_capacity(n);
        let ratios: Vec<f64> = x
            .iter()
            .map(|&z| {
                let s = 1.0 / (1.0 + (-z).exp());
                dsig.push(2.0 * RATIO_HALF_RANGE * s * (1.0 - s));
                1.0 + RATIO_HALF_RANGE * (2.0 * s - 1.0)
            })
            .collect();
        (RobotDesign::new(ratios).expect("bounded ratios are valid"), dsig)
    };

    let result = bfgs_minimize(
        |x: &[f64]| -> (f64, Vec<f64>) {
            let (design, dsig) = to_design(x);
            let fail = || (f64::INFINITY, vec![0.0; n]);
            let input: Vec<f64> = design.ratios().iter().map(|r| r - 1.0).collect();
            let (disp, cache) = match decoder.forward(&input) {
                Ok(v) => v,
                Err(_) => return fail(),
            };
            let vertices: Vec<[f64; 2]> = rest
                .iter()
                .enumerate()
                .map(|(i, v)| [v[0] + disp[2 * i], v[1] + disp[2 * i + 1]])
                .collect();
            let u = match RobotRealization::new(vertices, cfg.top_mid_index()) {
                Ok(u) => u,
                Err(_) => return fail(),
            };
            let (value, grad_ratios, grad_vertices) = match robot_cost(&design, &u, goal, cost_cfg) {
                Ok(v) => v,
                Err(_) => return fail(),
            };
            let flat: Vec<f64> = grad_vertices.iter().flat_map(|g| [g[0], g[1]]).collect();
            let through_dec = match backward_input(&decoder.spec, &decoder.params, &cache, &flat) {
                Ok(g) => g,
                Err(_) => return fail(),
            };
            let grad: Vec<f64> = (0..n)
                .map(|i| (grad_ratios[i] + through_dec[i]) * dsig[i])
                .collect();
            (value, grad)
        },
        &vec![0.0; n],
        bfgs,
    )?;
    let (design, _) = to_design(&result.x_opt);
    Ok((design, result.termination == Termination::LineSearchFailed))
}

/// Fixed-seed evaluation goals for the test split: for every test sample, an
/// obstacle is drawn with seed 0 (cleared against the stored realization) and
/// paired with the stored target, so every method sees identical goals.
pub fn robot_eval_goals(data: &ArmDataset) -> Result<Vec<RobotGoal>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut goals = Vec::with_capacity(data.split.test.len());
    for &i in &data.split.test {
        let s = &data.samples[i];
        let (center, _) = sample_obstacle(&mut rng, Some(&s.realization))?;
        goals.push(arm_goal_of(&s.realization, center)?);
    }
    Ok(goals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ModelKind, Task};
    use crate::sim::OBSTACLE_MARGIN;

    fn small_dataset(count: usize, seed: u64) -> ArmDataset {
        gen_arm(count, seed).unwrap()
    }

    #[test]
    fn gen_arm_properties() {
        let ds = small_dataset(50, 3);
        assert_eq!(ds.len(), 50);
        let min_clear = crate::data::OBSTACLE_RADIUS + OBSTACLE_MARGIN;
        for s in &ds.samples {
            // Goal target is the realization's top midpoint.
            let tm = s.realization.top_mid();
            assert_eq!(s.goal.target, tm);
            // Obstacle clear of every vertex.
            for v in &s.realization.vertices {
                assert!(crate::geometry::dist(*v, s.goal.obstacle_center) >= min_clear);
            }
        }
        assert_eq!(ds, small_dataset(50, 3));
    }

    #[test]
    fn decoder_learns_pose_at_small_scale() {
        // Accuracy here is data-limited (the full corpus is 8000 samples);
        // this checks the training loop converges, not final fidelity.
        let ds = small_dataset(1000, 5);
        let mut cfg = TrainConfig::defaults(Task::Arm, ModelKind::Decoder);
        cfg.epochs = 60;
        let r = train_arm_decoder(&ds, &cfg).unwrap();
        let rmse = r.val_loss.last().unwrap().sqrt();
        assert!(rmse < 0.25, "val per-coordinate RMSE {rmse}");
        // Surrogate pose roughly matches the simulator on a val sample.
        let s = ds.val_samples().next().unwrap();
        let u_hat = arm_surrogate_vertices(&r.model, &s.design).unwrap();
        let err: f64 = u_hat
            .vertices
            .iter()
            .zip(&s.realization.vertices)
            .map(|(a, b)| crate::geometry::dist(*a, *b))
            .fold(0.0, f64::max);
        assert!(err < 1.5, "worst vertex error {err}");
    }

    #[test]
    fn encoder_outputs_stay_in_bounds_and_decoder_stays_frozen() {
        let ds = small_dataset(200, 7);
        let mut dcfg = TrainConfig::defaults(Task::Arm, ModelKind::Decoder);
        dcfg.epochs = 20;
        let dec = train_arm_decoder(&ds, &dcfg).unwrap().model;
        let dec_before = dec.params.clone();
        let mut ecfg = TrainConfig::defaults(Task::Arm, ModelKind::Encoder);
        ecfg.epochs = 5;
        let enc = train_arm_encoder(&ds, &dec, &ecfg).unwrap();
        assert_eq!(dec.params, dec_before);
        assert!(enc.train_loss.last().unwrap() < &enc.train_loss[0]);
        for s in ds.test_samples() {
            let d = arm_encoder_design(&enc.model, &s.goal).unwrap();
            for r in d.ratios() {
                assert!((STRETCH_MIN..=STRETCH_MAX).contains(r));
            }
        }
    }

    #[test]
    fn direct_optimize_descends_and_reaches_target() {
        let ds = small_dataset(800, 11);
        let mut dcfg = TrainConfig::defaults(Task::Arm, ModelKind::Decoder);
        dcfg.epochs = 60;
        let dec = train_arm_decoder(&ds, &dcfg).unwrap().model;
        let goal = &ds.samples[ds.split.test[0]].goal;
        let cost_cfg = RobotCostConfig::default();
        let bfgs = BfgsConfig { max_iterations: 200, ..BfgsConfig::default() };
        let (design, _) = arm_direct_optimize(goal, &dec, &cost_cfg, &bfgs).unwrap();

        // Objective at the optimum is no worse than at the rest init.
        let rest = RobotDesign::new(vec![1.0; ROBOT_DESIGN_DIM]).unwrap();
        let cfg = ArmConfig::default();
        let obj = |d: &RobotDesign| {
            let u = arm_surrogate_vertices(&dec, d).unwrap();
            robot_cost(d, &u, goal, &cost_cfg).unwrap().0
        };
        assert!(obj(&design) <= obj(&rest) + 1e-12);

        // True realization of the optimized design lands much closer to the
        // target than the rest pose does (absolute accuracy is limited by
        // the small decoder corpus here).
        let u = arm_realize(&design, &cfg).unwrap();
        let err = crate::geometry::dist(u.top_mid(), goal.target);
        let rest_u = arm_realize(&rest, &cfg).unwrap();
        let rest_err = crate::geometry::dist(rest_u.top_mid(), goal.target);
        assert!(err < 1.0, "top-mid error {err}");
        assert!(err < 0.5 * rest_err, "err {err} vs rest {rest_err}");
    }

    #[test]
    fn eval_goals_are_deterministic_and_clear() {
        let ds = small_dataset(60, 13);
        let a = robot_eval_goals(&ds).unwrap();
        let b = robot_eval_goals(&ds).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), ds.split.test.len());
        for (g, &i) in a.iter().zip(&ds.split.test) {
            assert_eq!(g.target, ds.samples[i].realization.top_mid());
        }
    }
}
