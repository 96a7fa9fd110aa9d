//! The full assessment network: dynamic and static branches with
//! identical structure but unshared parameters, feature fusion, and
//! the score regression head.
//!
//! Branch parameters form the attention group and the head forms the
//! prediction group; the trainer applies a different base learning
//! rate to each group.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    self, AttParams, AttentionNorm, AttentionOutput, AttentionVariant, BranchIds, BranchNodes,
    BranchParams, EmbedParams, GcnParams, InstanceSet, Linear, LinearIds, StreamKind, ATT_HIDDEN_DIM,
    EMBED_DIM, FUSED_DIM,
};
use crate::autodiff::{Graph, Mode, NodeId};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor2D;

/// Regression head hidden width (1024->128->1 for two streams).
pub const HEAD_HIDDEN_DIM: usize = 128;
/// Reference parameter-count claim for the full two-stream model.
pub const CLAIMED_PARAM_COUNT: f64 = 3.54e6;

/// Which streams are wired into the model.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Streams {
    /// Dynamic stream only.
    Ds,
    /// Static stream only.
    Ss,
    /// Two streams (the full model).
    Ts,
}

impl Streams {
    pub fn label(self) -> &'static str {
        match self {
            Streams::Ds => "ds",
            Streams::Ss => "ss",
            Streams::Ts => "ts",
        }
    }

    pub fn uses_dynamic(self) -> bool {
        matches!(self, Streams::Ds | Streams::Ts)
    }

    pub fn uses_static(self) -> bool {
        matches!(self, Streams::Ss | Streams::Ts)
    }

    /// Head input width: both fused stream features for TS, one for
    /// the single-stream ablations.
    pub fn head_input_dim(self) -> usize {
        match self {
            Streams::Ts => 2 * FUSED_DIM,
            Streams::Ds | Streams::Ss => FUSED_DIM,
        }
    }
}

/// Static shape-and-variant configuration of a model.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub streams: Streams,
    pub attention: AttentionVariant,
    pub attention_norm: AttentionNorm,
    /// Kernel scale K of the exponential adjacency.
    pub kernel_scale: f64,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            streams: Streams::Ts,
            attention: AttentionVariant::Caa,
            attention_norm: AttentionNorm::Softmax,
            kernel_scale: 1.0,
            dropout_rate: 0.5,
            seed: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_scale <= 0.0 || !self.kernel_scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel scale must be positive, got {}",
                self.kernel_scale
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams {
    pub fc1: Linear,
    pub fc2: Linear,
}

/// Every trainable tensor of the model. The two branches share their
/// structure but never their storage.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub dynamic_branch: Option<BranchParams>,
    pub static_branch: Option<BranchParams>,
    pub head: HeadParams,
}

/// Learning-rate group of one parameter tensor.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ParamGroup {
    /// Branch parameters (embedding, context unit, attention unit).
    Attention,
    /// Regression head parameters.
    Prediction,
}

impl ParamGroup {
    pub fn of(name: &str) -> ParamGroup {
        if name.starts_with("head.") {
            ParamGroup::Prediction
        } else {
            ParamGroup::Attention
        }
    }
}

fn branch_names(prefix: &str, has_att: bool) -> Vec<String> {
    let mut names = vec![
        format!("{prefix}.embed.fc1.weight"),
        format!("{prefix}.embed.fc1.bias"),
        format!("{prefix}.embed.fc2.weight"),
        format!("{prefix}.embed.fc2.bias"),
        format!("{prefix}.gcn.w1"),
        format!("{prefix}.gcn.w2"),
    ];
    if has_att {
        names.extend([
            format!("{prefix}.att.fc1.weight"),
            format!("{prefix}.att.fc1.bias"),
            format!("{prefix}.att.fc2.weight"),
            format!("{prefix}.att.fc2.bias"),
        ]);
    }
    names
}

fn branch_tensors<'a>(b: &'a BranchParams) -> Vec<&'a Tensor2D> {
    let mut out = vec![
        &b.embed.fc1.weight,
        &b.embed.fc1.bias,
        &b.embed.fc2.weight,
        &b.embed.fc2.bias,
        &b.gcn.w1,
        &b.gcn.w2,
    ];
    if let Some(att) = &b.att {
        out.extend([&att.fc1.weight, &att.fc1.bias, &att.fc2.weight, &att.fc2.bias]);
    }
    out
}

fn branch_tensors_mut(b: &mut BranchParams) -> Vec<&mut Tensor2D> {
    let mut out = vec![
        &mut b.embed.fc1.weight,
        &mut b.embed.fc1.bias,
        &mut b.embed.fc2.weight,
        &mut b.embed.fc2.bias,
        &mut b.gcn.w1,
        &mut b.gcn.w2,
    ];
    if let Some(att) = &mut b.att {
        out.extend([
            &mut att.fc1.weight,
            &mut att.fc1.bias,
            &mut att.fc2.weight,
            &mut att.fc2.bias,
        ]);
    }
    out
}

impl ModelParams {
    /// All tensors in canonical order: dynamic branch, static branch,
    /// head. Checkpoints, optimizer state, and gradient vectors all
    /// share this order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor2D)> {
        let mut out = Vec::new();
        if let Some(b) = &self.dynamic_branch {
            out.extend(
                branch_names("dynamic", b.att.is_some())
                    .into_iter()
                    .zip(branch_tensors(b)),
            );
        }
        if let Some(b) = &self.static_branch {
            out.extend(
                branch_names("static", b.att.is_some())
                    .into_iter()
                    .zip(branch_tensors(b)),
            );
        }
        out.push(("head.fc1.weight".to_string(), &self.head.fc1.weight));
        out.push(("head.fc1.bias".to_string(), &self.head.fc1.bias));
        out.push(("head.fc2.weight".to_string(), &self.head.fc2.weight));
        out.push(("head.fc2.bias".to_string(), &self.head.fc2.bias));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor2D)> {
        let mut out: Vec<(String, &mut Tensor2D)> = Vec::new();
        if let Some(b) = &mut self.dynamic_branch {
            let names = branch_names("dynamic", b.att.is_some());
            out.extend(names.into_iter().zip(branch_tensors_mut(b)));
        }
        if let Some(b) = &mut self.static_branch {
            let names = branch_names("static", b.att.is_some());
            out.extend(names.into_iter().zip(branch_tensors_mut(b)));
        }
        out.push(("head.fc1.weight".to_string(), &mut self.head.fc1.weight));
        out.push(("head.fc1.bias".to_string(), &mut self.head.fc1.bias));
        out.push(("head.fc2.weight".to_string(), &mut self.head.fc2.weight));
        out.push(("head.fc2.bias".to_string(), &mut self.head.fc2.bias));
        out
    }

    pub fn tensor_count(&self) -> usize {
        self.named_tensors().len()
    }
}

fn init_linear(seed: u64, name: &str, fan_in: usize, fan_out: usize) -> Linear {
    Linear {
        weight: init_weight(seed, &format!("{name}.weight"), fan_in, fan_out),
        bias: Tensor2D::zeros(1, fan_out),
    }
}

/// Weights are uniform in (-sqrt(1/fan_in), +sqrt(1/fan_in)); biases
/// are zero. Each tensor draws from its own named stream, so the
/// result depends only on (seed, tensor name).
fn init_weight(seed: u64, name: &str, fan_in: usize, fan_out: usize) -> Tensor2D {
    let bound = (1.0 / fan_in as f64).sqrt();
    let mut r = rng::stream(seed, &format!("init/{name}"));
    Tensor2D::from_fn(fan_in, fan_out, |_, _| r.random_range(-bound..bound))
}

fn init_branch(seed: u64, prefix: &str, kind: StreamKind, variant: AttentionVariant) -> BranchParams {
    let input_dim = kind.feature_dim();
    let hidden = kind.embed_hidden_dim();
    BranchParams {
        embed: EmbedParams {
            fc1: init_linear(seed, &format!("{prefix}.embed.fc1"), input_dim, hidden),
            fc2: init_linear(seed, &format!("{prefix}.embed.fc2"), hidden, EMBED_DIM),
        },
        gcn: GcnParams {
            w1: init_weight(seed, &format!("{prefix}.gcn.w1"), EMBED_DIM, EMBED_DIM),
            w2: init_weight(seed, &format!("{prefix}.gcn.w2"), EMBED_DIM, EMBED_DIM),
        },
        att: variant.uses_att_params().then(|| AttParams {
            fc1: init_linear(seed, &format!("{prefix}.att.fc1"), FUSED_DIM, ATT_HIDDEN_DIM),
            fc2: init_linear(seed, &format!("{prefix}.att.fc2"), ATT_HIDDEN_DIM, 1),
        }),
    }
}

/// Fresh parameters for a configuration, deterministic in
/// `config.seed`.
pub fn init_params(config: &ModelConfig) -> Result<ModelParams> {
    config.validate()?;
    let seed = config.seed;
    Ok(ModelParams {
        dynamic_branch: config
            .streams
            .uses_dynamic()
            .then(|| init_branch(seed, "dynamic", StreamKind::Dynamic, config.attention)),
        static_branch: config
            .streams
            .uses_static()
            .then(|| init_branch(seed, "static", StreamKind::Static, config.attention)),
        head: HeadParams {
            fc1: init_linear(seed, "head.fc1", config.streams.head_input_dim(), HEAD_HIDDEN_DIM),
            fc2: init_linear(seed, "head.fc2", HEAD_HIDDEN_DIM, 1),
        },
    })
}

/// Per-tensor, per-group, and total parameter counts.
#[derive(Clone, Debug)]
pub struct ParamCount {
    pub per_tensor: Vec<(String, usize)>,
    pub attention: usize,
    pub prediction: usize,
    pub total: usize,
}

pub fn count_params(params: &ModelParams) -> ParamCount {
    let mut per_tensor = Vec::new();
    let mut attention = 0;
    let mut prediction = 0;
    for (name, t) in params.named_tensors() {
        let n = t.len();
        match ParamGroup::of(&name) {
            ParamGroup::Attention => attention += n,
            ParamGroup::Prediction => prediction += n,
        }
        per_tensor.push((name, n));
    }
    ParamCount {
        per_tensor,
        attention,
        prediction,
        total: attention + prediction,
    }
}

/// Total entry count of a tensor collection; zero tensors count zero.
pub fn count_tensors<'a>(tensors: impl IntoIterator<Item = &'a Tensor2D>) -> usize {
    tensors.into_iter().map(|t| t.len()).sum()
}

/// Forward mode plus the dropout RNG a training pass needs.
pub enum Phase<'r> {
    Train { dropout_rng: &'r mut ChaCha8Rng },
    Eval,
}

/// A recorded forward pass: the tape, the score node, and the
/// parameter nodes in canonical order (aligned with
/// [`ModelParams::named_tensors`]).
pub struct ForwardPass<'p> {
    pub graph: Graph<'p>,
    pub score: NodeId,
    pub param_ids: Vec<NodeId>,
    pub dynamic: Option<BranchNodes>,
    pub static_: Option<BranchNodes>,
}

impl ForwardPass<'_> {
    pub fn score_value(&self) -> f64 {
        self.graph.value(self.score).get(0, 0)
    }

    pub fn attention_output(&self, kind: StreamKind) -> Option<AttentionOutput> {
        let nodes = match kind {
            StreamKind::Dynamic => self.dynamic.as_ref()?,
            StreamKind::Static => self.static_.as_ref()?,
        };
        Some(AttentionOutput::from_nodes(&self.graph, nodes))
    }
}

struct RegisteredBranch {
    ids: BranchIds,
}

fn register_linear<'p>(g: &mut Graph<'p>, l: &'p Linear, param_ids: &mut Vec<NodeId>) -> LinearIds {
    let weight = g.param(&l.weight);
    let bias = g.param(&l.bias);
    param_ids.push(weight);
    param_ids.push(bias);
    LinearIds { weight, bias }
}

fn register_branch<'p>(
    g: &mut Graph<'p>,
    b: &'p BranchParams,
    param_ids: &mut Vec<NodeId>,
) -> RegisteredBranch {
    let embed_fc1 = register_linear(g, &b.embed.fc1, param_ids);
    let embed_fc2 = register_linear(g, &b.embed.fc2, param_ids);
    let gcn_w1 = g.param(&b.gcn.w1);
    let gcn_w2 = g.param(&b.gcn.w2);
    param_ids.push(gcn_w1);
    param_ids.push(gcn_w2);
    let (att_fc1, att_fc2) = match &b.att {
        Some(att) => (
            Some(register_linear(g, &att.fc1, param_ids)),
            Some(register_linear(g, &att.fc2, param_ids)),
        ),
        None => (None, None),
    };
    RegisteredBranch {
        ids: BranchIds {
            embed_fc1,
            embed_fc2,
            gcn_w1,
            gcn_w2,
            att_fc1,
            att_fc2,
        },
    }
}

fn check_stream<'p>(
    required: bool,
    provided: Option<&'p InstanceSet>,
    kind: StreamKind,
) -> Result<Option<&'p InstanceSet>> {
    match (required, provided) {
        (true, Some(set)) => {
            if set.kind() != kind {
                return Err(Error::shape(
                    "forward",
                    format!("expected a {} stream, got {}", kind.label(), set.kind().label()),
                ));
            }
            Ok(Some(set))
        }
        (true, None) => Err(Error::InvalidArgument(format!(
            "configuration requires the {} stream but none was provided",
            kind.label()
        ))),
        (false, _) => Ok(None),
    }
}

/// Records the full forward pass on a fresh tape. Parameters are
/// borrowed read-only, so many passes can run concurrently against
/// the same `ModelParams`.
pub fn build_forward<'p>(
    params: &'p ModelParams,
    config: &ModelConfig,
    dynamic: Option<&'p InstanceSet>,
    static_: Option<&'p InstanceSet>,
    phase: &mut Phase<'_>,
) -> Result<ForwardPass<'p>> {
    config.validate()?;
    let dynamic = check_stream(config.streams.uses_dynamic(), dynamic, StreamKind::Dynamic)?;
    let static_ = check_stream(config.streams.uses_static(), static_, StreamKind::Static)?;

    let mut g = Graph::new();
    let mut param_ids = Vec::with_capacity(params.tensor_count());

    let dyn_branch = match (&params.dynamic_branch, dynamic) {
        (Some(b), Some(_)) => Some(register_branch(&mut g, b, &mut param_ids)),
        (None, Some(_)) => {
            return Err(Error::CheckpointMismatch(
                "parameters lack a dynamic branch required by the configuration".into(),
            ))
        }
        _ => None,
    };
    let stat_branch = match (&params.static_branch, static_) {
        (Some(b), Some(_)) => Some(register_branch(&mut g, b, &mut param_ids)),
        (None, Some(_)) => {
            return Err(Error::CheckpointMismatch(
                "parameters lack a static branch required by the configuration".into(),
            ))
        }
        _ => None,
    };
    let head_fc1 = register_linear(&mut g, &params.head.fc1, &mut param_ids);
    let head_fc2 = register_linear(&mut g, &params.head.fc2, &mut param_ids);

    let run_branch = |g: &mut Graph<'p>, set: &'p InstanceSet, reg: &RegisteredBranch| -> Result<BranchNodes> {
        let features = g.input(set.features());
        let (nodes, _) = attention::branch_forward(
            g,
            features,
            &reg.ids,
            config.kernel_scale,
            config.attention,
            config.attention_norm,
        )?;
        Ok(nodes)
    };

    let dyn_nodes = match (dynamic, &dyn_branch) {
        (Some(set), Some(reg)) => Some(run_branch(&mut g, set, reg)?),
        _ => None,
    };
    let stat_nodes = match (static_, &stat_branch) {
        (Some(set), Some(reg)) => Some(run_branch(&mut g, set, reg)?),
        _ => None,
    };

    let head_input = match (dyn_nodes.as_ref(), stat_nodes.as_ref()) {
        (Some(d), Some(s)) => g.concat_cols(d.stream_feature, s.stream_feature)?,
        (Some(d), None) => d.stream_feature,
        (None, Some(s)) => s.stream_feature,
        (None, None) => unreachable!("at least one stream is always required"),
    };

    let h = attention::linear(&mut g, head_input, head_fc1)?;
    let h = g.relu(h);
    let h = match phase {
        Phase::Train { dropout_rng } => {
            g.dropout(h, config.dropout_rate, Mode::Train, *dropout_rng)?
        }
        Phase::Eval => h,
    };
    let logits = attention::linear(&mut g, h, head_fc2)?;
    let score = g.sigmoid(logits);

    Ok(ForwardPass {
        graph: g,
        score,
        param_ids,
        dynamic: dyn_nodes,
        static_: stat_nodes,
    })
}

/// Values produced by one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    /// Predicted score in (0, 1).
    pub score: f64,
    pub dynamic: Option<AttentionOutput>,
    pub static_: Option<AttentionOutput>,
}

/// Convenience forward returning extracted values only.
pub fn forward(
    params: &ModelParams,
    config: &ModelConfig,
    dynamic: Option<&InstanceSet>,
    static_: Option<&InstanceSet>,
    phase: &mut Phase<'_>,
) -> Result<ForwardOutput> {
    let pass = build_forward(params, config, dynamic, static_, phase)?;
    Ok(ForwardOutput {
        score: pass.score_value(),
        dynamic: pass.attention_output(StreamKind::Dynamic),
        static_: pass.attention_output(StreamKind::Static),
    })
}
