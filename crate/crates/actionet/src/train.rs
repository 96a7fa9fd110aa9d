//! Training loop: MSE loss on min-max-normalized scores, minibatch
//! SGD with momentum and weight decay, per-group learning rates, and
//! stepwise decay.
//!
//! Determinism contract: every random draw comes from a named stream
//! of the run seed, per-sample streams are derived from (seed, epoch,
//! sample index), and per-sample gradients are merged in fixed sample
//! order. Two runs with the same seed and configuration produce
//! bit-identical parameters, losses, and reports. Samples within a
//! batch may be evaluated concurrently; merging stays ordered.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::attention::{InstanceSet, StreamKind};
use crate::data::{augment_window, AugmentPolicy, LoadedDataset, ScoreNormalizer, Split, WindowMode};
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{
    build_forward, init_params, ModelConfig, ModelParams, ParamGroup, Phase,
};
use crate::rng;
use crate::tensor::Tensor2D;

/// Samples evaluated concurrently per slice; bounds peak memory
/// (each in-flight sample holds a full gradient vector).
const PARALLEL_CHUNK: usize = 4;

/// Squared error of one prediction.
pub fn mse(pred: f64, target: f64) -> f64 {
    (pred - target) * (pred - target)
}

/// SGD hyperparameters: momentum 0.9, weight decay 1e-4, and the
/// per-group base learning rates (attention 0.01, prediction 0.05).
#[derive(Copy, Clone, Debug)]
pub struct OptimizerHyper {
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr_attention: f64,
    pub lr_prediction: f64,
}

impl Default for OptimizerHyper {
    fn default() -> Self {
        OptimizerHyper {
            momentum: 0.9,
            weight_decay: 1e-4,
            lr_attention: 0.01,
            lr_prediction: 0.05,
        }
    }
}

impl OptimizerHyper {
    pub fn base_lr(&self, group: ParamGroup) -> f64 {
        match group {
            ParamGroup::Attention => self.lr_attention,
            ParamGroup::Prediction => self.lr_prediction,
        }
    }
}

/// Momentum buffers mirroring the parameter tensors in canonical order.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub hyper: OptimizerHyper,
    velocities: Vec<Tensor2D>,
    groups: Vec<ParamGroup>,
}

impl OptimizerState {
    pub fn new(params: &ModelParams, hyper: OptimizerHyper) -> Self {
        let mut velocities = Vec::new();
        let mut groups = Vec::new();
        for (name, t) in params.named_tensors() {
            velocities.push(Tensor2D::zeros(t.rows(), t.cols()));
            groups.push(ParamGroup::of(&name));
        }
        OptimizerState {
            hyper,
            velocities,
            groups,
        }
    }
}

/// One SGD-with-momentum update of a single tensor:
/// `g' = g + wd * theta; v = mu * v + g'; theta -= lr * v`.
pub fn sgd_update_tensor(
    theta: &mut Tensor2D,
    grad: &Tensor2D,
    velocity: &mut Tensor2D,
    lr: f64,
    momentum: f64,
    weight_decay: f64,
) -> Result<()> {
    if !theta.same_shape(grad) || !theta.same_shape(velocity) {
        return Err(Error::shape(
            "sgd_update_tensor",
            format!(
                "theta {:?}, grad {:?}, velocity {:?}",
                theta.shape(),
                grad.shape(),
                velocity.shape()
            ),
        ));
    }
    let t = theta.data_mut();
    let v = velocity.data_mut();
    let g = grad.data();
    for k in 0..t.len() {
        let decayed = g[k] + weight_decay * t[k];
        v[k] = momentum * v[k] + decayed;
        t[k] -= lr * v[k];
    }
    Ok(())
}

/// Applies one optimizer step to every parameter tensor; `lr_scale` is
/// the current schedule factor multiplying each group's base rate.
pub fn sgd_step(
    params: &mut ModelParams,
    grads: &[Tensor2D],
    state: &mut OptimizerState,
    lr_scale: f64,
) -> Result<()> {
    let named = params.named_tensors_mut();
    if named.len() != grads.len() || named.len() != state.velocities.len() {
        return Err(Error::shape(
            "sgd_step",
            format!(
                "{} tensors vs {} grads vs {} velocities",
                named.len(),
                grads.len(),
                state.velocities.len()
            ),
        ));
    }
    let hyper = state.hyper;
    for (i, (_, theta)) in named.into_iter().enumerate() {
        let lr = hyper.base_lr(state.groups[i]) * lr_scale;
        sgd_update_tensor(
            theta,
            &grads[i],
            &mut state.velocities[i],
            lr,
            hyper.momentum,
            hyper.weight_decay,
        )?;
    }
    Ok(())
}

/// Epoch plan: total epochs, decay points, decay factor, batch size.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub total_epochs: usize,
    pub decay_epochs: Vec<usize>,
    pub decay_rate: f64,
    pub batch_size: usize,
}

impl Schedule {
    pub fn new(total_epochs: usize, decay_epochs: Vec<usize>, batch_size: usize) -> Self {
        Schedule {
            total_epochs,
            decay_epochs,
            decay_rate: 0.1,
            batch_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_epochs == 0 {
            return Err(Error::InvalidArgument("schedule needs at least one epoch".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if !self.decay_epochs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "decay epochs must be strictly increasing, got {:?}",
                self.decay_epochs
            )));
        }
        if let Some(&last) = self.decay_epochs.last() {
            if last >= self.total_epochs {
                return Err(Error::InvalidArgument(format!(
                    "decay epoch {last} is not below total {}",
                    self.total_epochs
                )));
            }
        }
        Ok(())
    }
}

/// Learning-rate scale at `epoch`: `decay_rate^(#decay epochs <= epoch)`.
pub fn lr_at(schedule: &Schedule, epoch: usize) -> Result<f64> {
    if epoch >= schedule.total_epochs {
        return Err(Error::InvalidArgument(format!(
            "epoch {epoch} out of range (total {})",
            schedule.total_epochs
        )));
    }
    let crossed = schedule.decay_epochs.iter().filter(|&&d| d <= epoch).count();
    Ok(schedule.decay_rate.powi(crossed as i32))
}

/// Per-epoch training record. Correlations are `None` when undefined
/// (constant series or a split smaller than two videos).
#[derive(Clone, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_rho: Option<f64>,
    pub test_rho: Option<f64>,
    pub lr_attention: f64,
    pub lr_prediction: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub wall_time: Duration,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,train_rho,test_rho,lr_attention,lr_prediction\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epoch,
                e.mean_loss,
                fmt_rho(e.train_rho),
                fmt_rho(e.test_rho),
                e.lr_attention,
                e.lr_prediction
            ));
        }
        out
    }

    pub fn final_test_rho(&self) -> Option<f64> {
        self.epochs.last().and_then(|e| e.test_rho)
    }

    pub fn best_train_rho(&self) -> Option<f64> {
        self.epochs
            .iter()
            .filter_map(|e| e.train_rho)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

fn fmt_rho(rho: Option<f64>) -> String {
    match rho {
        Some(r) => format!("{r}"),
        None => "nan".to_string(),
    }
}

/// Loss and canonical-order gradients of one sample.
pub struct SampleGradient {
    pub score: f64,
    pub loss: f64,
    pub grads: Vec<Tensor2D>,
}

/// Runs one recorded forward pass, applies the squared-error loss
/// against `target`, and backpropagates. Gradients come back in
/// canonical parameter order (zeros for parameters the root does not
/// reach).
pub fn sample_loss_and_grads(
    params: &ModelParams,
    config: &ModelConfig,
    dynamic: Option<&InstanceSet>,
    static_: Option<&InstanceSet>,
    target: f64,
    phase: &mut Phase<'_>,
) -> Result<SampleGradient> {
    let mut pass = build_forward(params, config, dynamic, static_, phase)?;
    let score = pass.score_value();
    let target_node = pass.graph.constant(Tensor2D::scalar(target));
    let diff = pass.graph.sub(pass.score, target_node)?;
    let loss_node = pass.graph.mul(diff, diff)?;
    let loss = pass.graph.value(loss_node).get(0, 0);
    pass.graph.backward(loss_node)?;

    let named = params.named_tensors();
    let mut grads = Vec::with_capacity(pass.param_ids.len());
    for (id, (_, t)) in pass.param_ids.iter().zip(&named) {
        grads.push(match pass.graph.grad(*id) {
            Some(g) => g.clone(),
            None => Tensor2D::zeros(t.rows(), t.cols()),
        });
    }
    Ok(SampleGradient { score, loss, grads })
}

fn windowed_sets(
    video: &crate::data::LoadedVideo,
    config: &ModelConfig,
    policy: &AugmentPolicy,
    seed: u64,
    epoch: u64,
    index: usize,
) -> Result<(Option<InstanceSet>, Option<InstanceSet>)> {
    let mut aug_rng = rng::stream_indexed(seed, "augment", epoch, index as u64);
    let id = video.record.video_id.clone();
    let dynamic = if config.streams.uses_dynamic() {
        let w = augment_window(&video.dynamic, policy.window_dynamic, policy.mode, &mut aug_rng);
        Some(InstanceSet::new(w, StreamKind::Dynamic, id.clone())?)
    } else {
        None
    };
    let static_ = if config.streams.uses_static() {
        let w = augment_window(&video.static_, policy.window_static, policy.mode, &mut aug_rng);
        Some(InstanceSet::new(w, StreamKind::Static, id)?)
    } else {
        None
    };
    Ok((dynamic, static_))
}

/// Eval-mode predictions for the given dataset indices, using
/// start-mode windows of the policy's sizes (the metric convention:
/// deterministic windows, dropout off).
pub fn predict(
    dataset: &LoadedDataset,
    indices: &[usize],
    params: &ModelParams,
    config: &ModelConfig,
    policy: &AugmentPolicy,
) -> Result<Vec<f64>> {
    let start_policy = policy.with_mode(WindowMode::Start);
    let mut out = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(PARALLEL_CHUNK.max(1)) {
        let scores: Result<Vec<f64>> = chunk
            .par_iter()
            .map(|&idx| {
                let (d, s) = windowed_sets(&dataset.videos[idx], config, &start_policy, 0, 0, idx)?;
                let pass = build_forward(params, config, d.as_ref(), s.as_ref(), &mut Phase::Eval)?;
                Ok(pass.score_value())
            })
            .collect();
        out.extend(scores?);
    }
    Ok(out)
}

fn split_rho(predicted: &[f64], actual: &[f64]) -> Option<f64> {
    if predicted.len() < 2 {
        return None;
    }
    metrics::spearman(predicted, actual).ok()
}

/// Trains from a fresh initialization and returns the final parameters
/// plus the per-epoch report. `config.seed` drives initialization,
/// shuffling, window augmentation, and dropout.
pub fn train(
    dataset: &LoadedDataset,
    config: &ModelConfig,
    schedule: &Schedule,
    policy: &AugmentPolicy,
    hyper: OptimizerHyper,
) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    schedule.validate()?;
    let started = Instant::now();
    let seed = config.seed;

    let train_indices = dataset.split_indices(Split::Train);
    let test_indices = dataset.split_indices(Split::Test);
    if train_indices.is_empty() {
        return Err(Error::InvalidArgument("training split is empty".into()));
    }
    let train_targets: Vec<f64> = train_indices
        .iter()
        .map(|&i| dataset.videos[i].record.total)
        .collect();
    let test_targets: Vec<f64> = test_indices
        .iter()
        .map(|&i| dataset.videos[i].record.total)
        .collect();
    let normalizer = ScoreNormalizer::fit(&train_targets)?;

    let mut params = init_params(config)?;
    let mut state = OptimizerState::new(&params, hyper);
    let mut report = TrainReport::default();

    for epoch in 0..schedule.total_epochs {
        let lr_scale = lr_at(schedule, epoch)?;

        let mut order = train_indices.clone();
        order.shuffle(&mut rng::stream_indexed(seed, "shuffle", epoch as u64, 0));

        let mut loss_sum = 0.0;
        for batch in order.chunks(schedule.batch_size) {
            let mut batch_grads: Option<Vec<Tensor2D>> = None;
            for chunk in batch.chunks(PARALLEL_CHUNK) {
                let results: Result<Vec<SampleGradient>> = chunk
                    .par_iter()
                    .map(|&idx| {
                        let (d, s) =
                            windowed_sets(&dataset.videos[idx], config, policy, seed, epoch as u64, idx)?;
                        let target = normalizer.normalize(dataset.videos[idx].record.total);
                        let mut dropout_rng =
                            rng::stream_indexed(seed, "dropout", epoch as u64, idx as u64);
                        sample_loss_and_grads(
                            &params,
                            config,
                            d.as_ref(),
                            s.as_ref(),
                            target,
                            &mut Phase::Train {
                                dropout_rng: &mut dropout_rng,
                            },
                        )
                    })
                    .collect();
                // merge in fixed sample order
                for sample in results? {
                    loss_sum += sample.loss;
                    match &mut batch_grads {
                        None => batch_grads = Some(sample.grads),
                        Some(acc) => {
                            for (a, g) in acc.iter_mut().zip(&sample.grads) {
                                a.add_scaled_assign(g, 1.0)?;
                            }
                        }
                    }
                }
            }
            let mut grads = batch_grads.expect("non-empty batch");
            let inv = 1.0 / batch.len() as f64;
            for g in &mut grads {
                for v in g.data_mut() {
                    *v *= inv;
                }
            }
            sgd_step(&mut params, &grads, &mut state, lr_scale)?;
        }

        let train_preds = predict(dataset, &train_indices, &params, config, policy)?;
        let train_rho = split_rho(&train_preds, &train_targets);
        let test_rho = if test_indices.is_empty() {
            None
        } else {
            let test_preds = predict(dataset, &test_indices, &params, config, policy)?;
            split_rho(&test_preds, &test_targets)
        };

        report.epochs.push(EpochStats {
            epoch,
            mean_loss: loss_sum / train_indices.len() as f64,
            train_rho,
            test_rho,
            lr_attention: hyper.lr_attention * lr_scale,
            lr_prediction: hyper.lr_prediction * lr_scale,
        });
    }

    report.wall_time = started.elapsed();
    Ok((params, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Graph;
    use crate::synth::{make_synthetic_dataset, SyntheticSpec};

    #[test]
    fn mse_examples() {
        assert_eq!(mse(0.7, 0.7), 0.0);
        assert_eq!(mse(0.5, 0.0), 0.25);
    }

    #[test]
    fn mse_gradient_is_two_residual() {
        let h = 1e-5;
        let loss_at = |p: f64| -> f64 {
            let t = Tensor2D::scalar(p);
            let mut g = Graph::new();
            let ip = g.param(&t);
            let target = g.constant(Tensor2D::scalar(0.3));
            let d = g.sub(ip, target).unwrap();
            let l = g.mul(d, d).unwrap();
            g.value(l).get(0, 0)
        };
        let pred = Tensor2D::scalar(0.8);
        let mut g = Graph::new();
        let ip = g.param(&pred);
        let target = g.constant(Tensor2D::scalar(0.3));
        let d = g.sub(ip, target).unwrap();
        let l = g.mul(d, d).unwrap();
        g.backward(l).unwrap();
        let analytic = g.grad(ip).unwrap().get(0, 0);
        assert!((analytic - 2.0 * (0.8 - 0.3)).abs() < 1e-12);
        let fd = (loss_at(0.8 + h) - loss_at(0.8 - h)) / (2.0 * h);
        assert!((analytic - fd).abs() / (analytic.abs() + 1e-8) < 1e-6);
    }

    #[test]
    fn sgd_zero_grad_zero_velocity_is_fixed_point() {
        let mut theta = Tensor2D::row_vec(vec![1.0, -2.0, 3.0]);
        let before = theta.clone();
        let grad = Tensor2D::zeros(1, 3);
        let mut vel = Tensor2D::zeros(1, 3);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.9, 0.0).unwrap();
        assert_eq!(theta, before);
    }

    #[test]
    fn sgd_single_step_arithmetic() {
        let mut theta = Tensor2D::scalar(1.0);
        let grad = Tensor2D::scalar(1.0);
        let mut vel = Tensor2D::scalar(0.0);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.0, 0.0).unwrap();
        assert!((theta.get(0, 0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn sgd_two_step_momentum_matches_hand_unroll() {
        // theta0=1, constant g=0.5, mu=0.9, wd=0, lr=0.1:
        // v1=0.5,  theta1=1-0.05=0.95
        // v2=0.95, theta2=0.95-0.095=0.855
        let mut theta = Tensor2D::scalar(1.0);
        let grad = Tensor2D::scalar(0.5);
        let mut vel = Tensor2D::scalar(0.0);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.9, 0.0).unwrap();
        assert!((theta.get(0, 0) - 0.95).abs() < 1e-15);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.9, 0.0).unwrap();
        assert!((theta.get(0, 0) - 0.855).abs() < 1e-15);
    }

    #[test]
    fn sgd_weight_decay_enters_gradient() {
        let mut theta = Tensor2D::scalar(2.0);
        let grad = Tensor2D::scalar(0.0);
        let mut vel = Tensor2D::scalar(0.0);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.0, 0.5).unwrap();
        // g' = 0 + 0.5*2 = 1; theta = 2 - 0.1 = 1.9
        assert!((theta.get(0, 0) - 1.9).abs() < 1e-15);
    }

    #[test]
    fn sgd_without_momentum_or_decay_is_vanilla() {
        let mut r = rng::stream(17, "vanilla");
        use rand::Rng;
        let theta0 = Tensor2D::from_fn(3, 4, |_, _| r.random_range(-1.0..1.0));
        let grad = Tensor2D::from_fn(3, 4, |_, _| r.random_range(-1.0..1.0));
        let mut theta = theta0.clone();
        let mut vel = Tensor2D::zeros(3, 4);
        sgd_update_tensor(&mut theta, &grad, &mut vel, 0.07, 0.0, 0.0).unwrap();
        let mut expected = theta0;
        expected.add_scaled_assign(&grad, -0.07).unwrap();
        assert_eq!(theta, expected);
    }

    #[test]
    fn sgd_rejects_shape_mismatch() {
        let mut theta = Tensor2D::zeros(2, 2);
        let grad = Tensor2D::zeros(2, 3);
        let mut vel = Tensor2D::zeros(2, 2);
        assert!(sgd_update_tensor(&mut theta, &grad, &mut vel, 0.1, 0.9, 0.0).is_err());
    }

    #[test]
    fn lr_schedule_examples() {
        // decay after 150 and 180 epochs, 200 total
        let s = Schedule::new(200, vec![150, 180], 16);
        s.validate().unwrap();
        assert_eq!(lr_at(&s, 100).unwrap(), 1.0);
        assert!((lr_at(&s, 160).unwrap() - 0.1).abs() < 1e-15);
        assert!((lr_at(&s, 190).unwrap() - 0.01).abs() < 1e-15);
        assert!(lr_at(&s, 200).is_err());

        let empty = Schedule::new(10, vec![], 4);
        assert_eq!(lr_at(&empty, 9).unwrap(), 1.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(10, vec![5, 5], 4).validate().is_err());
        assert!(Schedule::new(10, vec![8, 3], 4).validate().is_err());
        assert!(Schedule::new(10, vec![10], 4).validate().is_err());
        assert!(Schedule::new(0, vec![], 4).validate().is_err());
        assert!(Schedule::new(10, vec![], 0).validate().is_err());
        assert!(Schedule::new(10, vec![3, 7], 4).validate().is_ok());
    }

    fn tiny_dataset(noise: f64, seed: u64) -> crate::synth::SyntheticDataset {
        make_synthetic_dataset(&SyntheticSpec {
            n_videos: 6,
            n_train: 4,
            n_dynamic: 4,
            n_static: 5,
            key_count: 2,
            noise_sigma: noise,
            seed,
        })
        .unwrap()
    }

    fn tiny_policy() -> AugmentPolicy {
        AugmentPolicy {
            window_dynamic: 4,
            window_static: 5,
            mode: WindowMode::RandomShift,
        }
    }

    #[test]
    fn zero_lr_leaves_parameters_at_init() {
        let data = tiny_dataset(0.0, 21);
        let config = ModelConfig { seed: 21, ..ModelConfig::default() };
        let schedule = Schedule::new(1, vec![], 2);
        let hyper = OptimizerHyper {
            lr_attention: 0.0,
            lr_prediction: 0.0,
            weight_decay: 0.0,
            ..OptimizerHyper::default()
        };
        let (params, _) = train(&data.dataset, &config, &schedule, &tiny_policy(), hyper).unwrap();
        assert_eq!(params, init_params(&config).unwrap());
    }

    #[test]
    fn same_seed_gives_identical_trajectories() {
        let data = tiny_dataset(0.01, 22);
        let config = ModelConfig { seed: 7, ..ModelConfig::default() };
        let schedule = Schedule::new(3, vec![2], 2);
        let run = || train(&data.dataset, &config, &schedule, &tiny_policy(), OptimizerHyper::default()).unwrap();
        let (pa, ra) = run();
        let (pb, rb) = run();
        assert_eq!(pa, pb);
        let losses_a: Vec<f64> = ra.epochs.iter().map(|e| e.mean_loss).collect();
        let losses_b: Vec<f64> = rb.epochs.iter().map(|e| e.mean_loss).collect();
        assert_eq!(losses_a, losses_b);
        assert_eq!(ra.to_csv(), rb.to_csv());
    }

    #[test]
    fn zero_prediction_lr_freezes_head_only() {
        let data = tiny_dataset(0.0, 23);
        let config = ModelConfig { seed: 11, ..ModelConfig::default() };
        let schedule = Schedule::new(2, vec![], 2);
        let hyper = OptimizerHyper {
            lr_prediction: 0.0,
            weight_decay: 0.0,
            ..OptimizerHyper::default()
        };
        let (params, _) = train(&data.dataset, &config, &schedule, &tiny_policy(), hyper).unwrap();
        let init = init_params(&config).unwrap();
        assert_eq!(params.head, init.head);
        assert_ne!(
            params.dynamic_branch.as_ref().unwrap().embed.fc1.weight,
            init.dynamic_branch.as_ref().unwrap().embed.fc1.weight
        );
    }

    #[test]
    fn empty_train_split_is_rejected() {
        let mut data = tiny_dataset(0.0, 24);
        for v in &mut data.dataset.videos {
            v.record.split = Split::Test;
        }
        let config = ModelConfig::default();
        let schedule = Schedule::new(1, vec![], 2);
        assert!(train(&data.dataset, &config, &schedule, &tiny_policy(), OptimizerHyper::default()).is_err());
    }

    #[test]
    fn batch_loss_is_order_invariant() {
        // mean reduction: reordering per-sample losses moves the mean
        // by at most f64 rounding
        let losses = [0.12, 0.07, 0.31, 0.002, 0.19, 0.08];
        let forward: f64 = losses.iter().sum::<f64>() / losses.len() as f64;
        let mut rev = losses;
        rev.reverse();
        let backward: f64 = rev.iter().sum::<f64>() / rev.len() as f64;
        assert!((forward - backward).abs() < 1e-12);
    }
}
