//! Ballistic toy task: a 1-D design (launch angle) with a two-branch inverse,
//! small enough to exercise every training procedure in seconds and to
//! demonstrate the averaging failure of direct supervised learning.
//!
//! Normalization: realized distances are divided by the maximum range so the
//! decoder regresses values in [0, 1]; design networks emit an angle as
//! pi/4 plus a bounded output in (-pi/4, pi/4), keeping predictions strictly
//! inside (0, pi/2).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{split_dataset, BallisticDataset, Dataset, Sample};
use crate::nn::{backward_input, backward_into, Mlp, MlpSpec, OutputMap};
use crate::optim::{bfgs_minimize, BfgsConfig, Termination};
use crate::sim::{ballistic_realize, BallisticConfig};
use crate::{Error, Result};

use super::{check_finite, TrainConfig, TrainResult, Trainer};

const ANGLE_HALF_RANGE: f64 = std::f64::consts::FRAC_PI_4;

fn layer_sizes(hidden: &Option<Vec<usize>>) -> Vec<usize> {
    let mut v = vec![1];
    match hidden {
        Some(h) => v.extend(h.iter().copied()),
        None => v.extend([64, 64]),
    }
    v.push(1);
    v
}

/// Generate a ballistic dataset: angles uniform on [0, pi/2], goals equal to
/// the realized distances. Split 80/10/10.
pub fn gen_ballistic(count: usize, seed: u64) -> Result<BallisticDataset> {
    let cfg = BallisticConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let theta = rng.gen_range(0.0..=std::f64::consts::FRAC_PI_2);
        let u = ballistic_realize(theta, &cfg)?;
        samples.push(Sample { design: theta, realization: u, goal: u });
    }
    split_dataset(Dataset::new(samples, seed), (0.8, 0.1, 0.1), seed)
}

/// Train the ballistic decoder: angle -> normalized distance, MSE.
pub fn train_ballistic_decoder(data: &BallisticDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let train: Vec<&Sample<f64, f64, f64>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<f64, f64, f64>> = data.val_samples().collect();
    let max_range = BallisticConfig::default().max_range();

    let spec = MlpSpec::new(layer_sizes(&cfg.hidden), OutputMap::Identity)?;
    let mut model = Mlp::init(spec, cfg.seed);
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &i in &order {
            let s = train[i];
            let (out, cache) = model.forward(&[s.design])?;
            let d = out[0] - s.realization / max_range;
            loss_sum += d * d;
            backward_into(&model.spec, &model.params, &cache, &[2.0 * d], Some(&mut trainer.grad_acc))?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "ballistic decoder")?);
        let mut vsum = 0.0;
        for s in &val {
            let d = model.forward_value(&[s.design])?[0] - s.realization / max_range;
            vsum += d * d;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

/// Angle predicted by a design network (encoder or direct learning) for a
/// goal distance.
pub fn ballistic_encoder_design(net: &Mlp, goal: f64) -> Result<f64> {
    let max_range = BallisticConfig::default().max_range();
    Ok(ANGLE_HALF_RANGE + net.forward_value(&[goal / max_range])?[0])
}

fn design_spec(hidden: &Option<Vec<usize>>) -> Result<MlpSpec> {
    MlpSpec::new(layer_sizes(hidden), OutputMap::Bounded(ANGLE_HALF_RANGE))
}

/// Train the encoder through the frozen decoder: the composed loss is the
/// squared normalized distance error of the surrogate realization.
pub fn train_ballistic_encoder(
    data: &BallisticDataset,
    decoder: &Mlp,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    if decoder.spec.input_dim() != 1 || decoder.spec.output_dim() != 1 {
        return Err(Error::ShapeMismatch("decoder does not fit the ballistic task".into()));
    }
    let train: Vec<&Sample<f64, f64, f64>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<f64, f64, f64>> = data.val_samples().collect();
    let max_range = BallisticConfig::default().max_range();

    let mut model = Mlp::init(design_spec(&cfg.hidden)?, cfg.seed.wrapping_add(1));
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    let composed = |net: &Mlp, g: f64| -> Result<(f64, f64, crate::nn::ForwardCache)> {
        let gn = g / max_range;
        let (out, cache) = net.forward(&[gn])?;
        let theta = ANGLE_HALF_RANGE + out[0];
        let (dec_out, dec_cache) = decoder.forward(&[theta])?;
        let d = dec_out[0] - gn;
        let dtheta = backward_input(&decoder.spec, &decoder.params, &dec_cache, &[2.0 * d])?[0];
        Ok((d * d, dtheta, cache))
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &i in &order {
            let (loss, dtheta, cache) = composed(&model, train[i].goal)?;
            loss_sum += loss;
            backward_into(&model.spec, &model.params, &cache, &[dtheta], Some(&mut trainer.grad_acc))?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "ballistic encoder")?);
        let mut vsum = 0.0;
        for s in &val {
            vsum += composed(&model, s.goal)?.0;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

/// Train the direct-learning baseline: goal -> angle, supervised against the
/// stored design angle. With a two-branch dataset the regression target is
/// bimodal, which is exactly the averaging failure the toy demonstrates.
pub fn train_ballistic_direct(data: &BallisticDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let train: Vec<&Sample<f64, f64, f64>> = data.train_samples().collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val: Vec<&Sample<f64, f64, f64>> = data.val_samples().collect();
    let max_range = BallisticConfig::default().max_range();

    let mut model = Mlp::init(design_spec(&cfg.hidden)?, cfg.seed.wrapping_add(2));
    let mut trainer = Trainer::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_curve = Vec::new();
    let mut val_curve = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &i in &order {
            let s = train[i];
            let (out, cache) = model.forward(&[s.goal / max_range])?;
            let d = ANGLE_HALF_RANGE + out[0] - s.design;
            loss_sum += d * d;
            backward_into(&model.spec, &model.params, &cache, &[2.0 * d], Some(&mut trainer.grad_acc))?;
            trainer.example_done(&mut model)?;
        }
        trainer.end_epoch(&mut model, epoch)?;
        train_curve.push(check_finite(loss_sum / train.len() as f64, "ballistic direct learning")?);
        let mut vsum = 0.0;
        for s in &val {
            let d = ANGLE_HALF_RANGE + model.forward_value(&[s.goal / max_range])?[0] - s.design;
            vsum += d * d;
        }
        val_curve.push(if val.is_empty() { f64::NAN } else { vsum / val.len() as f64 });
    }
    Ok(TrainResult { model, train_loss: train_curve, val_loss: val_curve })
}

/// Per-goal direct optimization: BFGS over one pre-sigmoid variable z with
/// theta = pi/4 + (pi/4)(2 sigmoid(z) - 1), initialized at z = 0 (theta =
/// pi/4), minimizing the squared normalized surrogate distance error.
///
/// Returns the optimized angle and a line-search warning flag.
pub fn ballistic_direct_optimize(goal: f64, decoder: &Mlp, bfgs: &BfgsConfig) -> Result<(f64, bool)> {
    let max_range = BallisticConfig::default().max_range();
    let gn = goal / max_range;
    let result = bfgs_minimize(
        |x: &[f64]| -> (f64, Vec<f64>) {
            let sig = 1.0 / (1.0 + (-x[0]).exp());
            let theta = ANGLE_HALF_RANGE + ANGLE_HALF_RANGE * (2.0 * sig - 1.0);
            let (out, cache) = match decoder.forward(&[theta]) {
                Ok(v) => v,
                Err(_) => return (f64::INFINITY, vec![0.0]),
            };
            let d = out[0] - gn;
            let dtheta = match backward_input(&decoder.spec, &decoder.params, &cache, &[2.0 * d]) {
                Ok(g) => g[0],
                Err(_) => return (f64::INFINITY, vec![0.0]),
            };
            let dz = dtheta * 2.0 * ANGLE_HALF_RANGE * sig * (1.0 - sig);
            (d * d, vec![dz])
        },
        &[0.0],
        bfgs,
    )?;
    let sig = 1.0 / (1.0 + (-result.x_opt[0]).exp());
    let theta = ANGLE_HALF_RANGE + ANGLE_HALF_RANGE * (2.0 * sig - 1.0);
    Ok((theta, result.termination == Termination::LineSearchFailed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ModelKind, Task};

    fn decoder_for(ds: &BallisticDataset) -> Mlp {
        let cfg = TrainConfig::defaults(Task::Ballistic, ModelKind::Decoder);
        train_ballistic_decoder(ds, &cfg).unwrap().model
    }

    #[test]
    fn gen_deterministic_and_in_range() {
        let a = gen_ballistic(200, 7).unwrap();
        let b = gen_ballistic(200, 7).unwrap();
        assert_eq!(a, b);
        let cfg = BallisticConfig::default();
        for s in &a.samples {
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&s.design));
            assert!((s.realization - ballistic_realize(s.design, &cfg).unwrap()).abs() < 1e-15);
            assert_eq!(s.goal, s.realization);
        }
    }

    #[test]
    fn decoder_fits_the_sine() {
        let ds = gen_ballistic(1000, 1).unwrap();
        let dec = decoder_for(&ds);
        let cfg = BallisticConfig::default();
        // Normalized squared error against the closed form, on a grid.
        let mut worst = 0.0f64;
        for i in 1..40 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 40.0;
            let pred = dec.forward_value(&[theta]).unwrap()[0];
            let truth = ballistic_realize(theta, &cfg).unwrap() / cfg.max_range();
            worst = worst.max((pred - truth).abs());
        }
        assert!(worst < 0.05, "worst decoder error {worst}");
    }

    #[test]
    fn encoder_inverts_while_direct_learning_averages() {
        let ds = gen_ballistic(1000, 1).unwrap();
        let dec = decoder_for(&ds);
        let cfg = BallisticConfig::default();

        let ecfg = TrainConfig::defaults(Task::Ballistic, ModelKind::Encoder);
        let enc = train_ballistic_encoder(&ds, &dec, &ecfg).unwrap().model;
        // Frozen-decoder contract.
        assert_eq!(dec.params, decoder_for(&ds).params);

        let dcfg = TrainConfig::defaults(Task::Ballistic, ModelKind::DirectLearning);
        let dl = train_ballistic_direct(&ds, &dcfg).unwrap().model;

        let goal = 0.9 * cfg.max_range();
        let enc_theta = ballistic_encoder_design(&enc, goal).unwrap();
        let enc_u = ballistic_realize(enc_theta, &cfg).unwrap();
        assert!((enc_u - goal).abs() < 0.05 * cfg.max_range(), "encoder err {}", (enc_u - goal).abs());

        // Direct learning averages the two branches: the predicted angle sits
        // near pi/4 so the realized distance lands near max range, an error
        // of nearly 10% of max range at this goal (the averaging failure).
        let dl_theta = ballistic_encoder_design(&dl, goal).unwrap();
        assert!(
            (dl_theta - std::f64::consts::FRAC_PI_4).abs() < 0.15,
            "direct learning did not average: angle {dl_theta}"
        );
        let dl_u = ballistic_realize(dl_theta, &cfg).unwrap();
        assert!(
            (dl_u - goal).abs() > 0.08 * cfg.max_range(),
            "direct learning unexpectedly accurate: err {}",
            (dl_u - goal).abs()
        );
    }

    #[test]
    fn direct_optimize_matches_closed_form_inverse() {
        let ds = gen_ballistic(1000, 2).unwrap();
        let dec = decoder_for(&ds);
        let cfg = BallisticConfig::default();
        let bfgs = BfgsConfig::default();
        for frac in [0.2, 0.5, 0.8] {
            let goal = frac * cfg.max_range();
            let (theta, _) = ballistic_direct_optimize(goal, &dec, &bfgs).unwrap();
            let u = ballistic_realize(theta, &cfg).unwrap();
            // Limited by decoder fidelity, not the optimizer.
            assert!((u - goal).abs() < 0.02 * cfg.max_range(), "frac {frac}: err {}", (u - goal).abs());
        }
    }
}
