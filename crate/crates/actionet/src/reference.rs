//! Straight-line re-evaluation of the model without the autodiff tape.
//!
//! This is the slow, obvious path: plain matrix products and loops,
//! no gradient bookkeeping. Tests and the acceptance suite use it two
//! ways: to check that the recorded forward pass computes the same
//! function, and as the loss evaluator for finite-difference gradient
//! checks (perturb a parameter, re-run this, difference the losses).

use crate::attention::{
    build_adjacency, AttentionNorm, AttentionVariant, BranchParams, InstanceSet, Linear,
};
use crate::autodiff::sigmoid;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, ModelParams};
use crate::tensor::Tensor2D;

fn relu(t: &Tensor2D) -> Tensor2D {
    t.map(|x| if x > 0.0 { x } else { 0.0 })
}

fn add_row(t: &Tensor2D, row: &Tensor2D) -> Tensor2D {
    Tensor2D::from_fn(t.rows(), t.cols(), |r, c| t.get(r, c) + row.get(0, c))
}

fn linear(x: &Tensor2D, l: &Linear) -> Result<Tensor2D> {
    Ok(add_row(&x.matmul(&l.weight)?, &l.bias))
}

fn concat_cols(a: &Tensor2D, b: &Tensor2D) -> Tensor2D {
    Tensor2D::from_fn(a.rows(), a.cols() + b.cols(), |r, c| {
        if c < a.cols() {
            a.get(r, c)
        } else {
            b.get(r, c - a.cols())
        }
    })
}

fn softmax_vec(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// One branch, returning the 1x512 stream feature.
pub fn branch_stream_feature(
    set: &InstanceSet,
    branch: &BranchParams,
    kernel_scale: f64,
    variant: AttentionVariant,
    norm: AttentionNorm,
) -> Result<Tensor2D> {
    let embedded = relu(&linear(
        &relu(&linear(set.features(), &branch.embed.fc1)?),
        &branch.embed.fc2,
    )?);

    let adjacency = build_adjacency(&embedded, kernel_scale)?;
    let h1 = relu(&adjacency.normalized.matmul(&embedded)?.matmul(&branch.gcn.w1)?);
    let context = relu(&adjacency.normalized.matmul(&h1)?.matmul(&branch.gcn.w2)?);

    let fused = match variant {
        AttentionVariant::Caa | AttentionVariant::Avg => concat_cols(&embedded, &context),
        AttentionVariant::Sau => concat_cols(&embedded, &embedded),
    };

    let n = fused.rows();
    let weights: Vec<f64> = match variant {
        AttentionVariant::Avg => vec![1.0 / n as f64; n],
        AttentionVariant::Caa | AttentionVariant::Sau => {
            let att = branch
                .att
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("missing attention parameters".into()))?;
            let scores = linear(&relu(&linear(&fused, &att.fc1)?), &att.fc2)?;
            let raw: Vec<f64> = (0..n).map(|i| scores.get(i, 0)).collect();
            match norm {
                AttentionNorm::Softmax => softmax_vec(&raw),
                AttentionNorm::Sigmoid => raw.into_iter().map(sigmoid).collect(),
            }
        }
    };

    let mut pooled = Tensor2D::zeros(1, fused.cols());
    for (i, &w) in weights.iter().enumerate() {
        for c in 0..fused.cols() {
            pooled.set(0, c, pooled.get(0, c) + w * fused.get(i, c));
        }
    }
    Ok(pooled)
}

/// Eval-mode forward pass (dropout off), returning the score.
pub fn forward(
    params: &ModelParams,
    config: &ModelConfig,
    dynamic: Option<&InstanceSet>,
    static_: Option<&InstanceSet>,
) -> Result<f64> {
    let mut features: Vec<Tensor2D> = Vec::new();
    if config.streams.uses_dynamic() {
        let set = dynamic
            .ok_or_else(|| Error::InvalidArgument("dynamic stream required".into()))?;
        let branch = params
            .dynamic_branch
            .as_ref()
            .ok_or_else(|| Error::CheckpointMismatch("no dynamic branch".into()))?;
        features.push(branch_stream_feature(
            set,
            branch,
            config.kernel_scale,
            config.attention,
            config.attention_norm,
        )?);
    }
    if config.streams.uses_static() {
        let set = static_
            .ok_or_else(|| Error::InvalidArgument("static stream required".into()))?;
        let branch = params
            .static_branch
            .as_ref()
            .ok_or_else(|| Error::CheckpointMismatch("no static branch".into()))?;
        features.push(branch_stream_feature(
            set,
            branch,
            config.kernel_scale,
            config.attention,
            config.attention_norm,
        )?);
    }

    let joined = match features.len() {
        1 => features.pop().expect("one feature"),
        2 => concat_cols(&features[0], &features[1]),
        _ => return Err(Error::InvalidArgument("no streams configured".into())),
    };
    let hidden = relu(&linear(&joined, &params.head.fc1)?);
    let logit = linear(&hidden, &params.head.fc2)?.get(0, 0);
    Ok(sigmoid(logit))
}

/// Eval-mode squared-error loss against a normalized target.
pub fn loss(
    params: &ModelParams,
    config: &ModelConfig,
    dynamic: Option<&InstanceSet>,
    static_: Option<&InstanceSet>,
    target: f64,
) -> Result<f64> {
    let s = forward(params, config, dynamic, static_)?;
    Ok((s - target) * (s - target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::StreamKind;
    use crate::model::{forward as graph_forward, init_params, Phase, Streams};
    use crate::rng;
    use rand::Rng;

    fn toy_sets(seed: u64, n_dyn: usize, n_stat: usize) -> (InstanceSet, InstanceSet) {
        let mut r = rng::stream(seed, "ref-sets");
        let dynamic = Tensor2D::from_fn(n_dyn, 1024, |_, _| r.random_range(-1.0..1.0));
        let static_ = Tensor2D::from_fn(n_stat, 2048, |_, _| r.random_range(-1.0..1.0));
        (
            InstanceSet::new(dynamic, StreamKind::Dynamic, "ref").unwrap(),
            InstanceSet::new(static_, StreamKind::Static, "ref").unwrap(),
        )
    }

    #[test]
    fn reference_matches_graph_forward() {
        for (streams, variant) in [
            (Streams::Ts, AttentionVariant::Caa),
            (Streams::Ts, AttentionVariant::Sau),
            (Streams::Ts, AttentionVariant::Avg),
            (Streams::Ds, AttentionVariant::Caa),
            (Streams::Ss, AttentionVariant::Caa),
        ] {
            let config = ModelConfig {
                streams,
                attention: variant,
                seed: 3,
                ..ModelConfig::default()
            };
            let params = init_params(&config).unwrap();
            let (d, s) = toy_sets(9, 4, 5);
            let dyn_opt = streams.uses_dynamic().then_some(&d);
            let stat_opt = streams.uses_static().then_some(&s);
            let graph_score = graph_forward(&params, &config, dyn_opt, stat_opt, &mut Phase::Eval)
                .unwrap()
                .score;
            let ref_score = forward(&params, &config, dyn_opt, stat_opt).unwrap();
            assert!(
                (graph_score - ref_score).abs() < 1e-12,
                "{streams:?} {variant:?}: {graph_score} vs {ref_score}"
            );
        }
    }
}
