//! Context-aware attention over the instances of one stream.
//!
//! An instance is one video segment (dynamic stream, 1024-d features)
//! or one athlete crop (static stream, 2048-d). The module embeds the
//! instances to 256-d, builds an exponential-kernel graph over them,
//! runs two GCN layers to produce context-related features, fuses
//! instance and context features by concatenation, and pools the fused
//! rows with learned attention weights into a single 512-d stream
//! feature.
//!
//! The adjacency is built from the embedded features and treated as a
//! constant with respect to gradients: the graph is fixed per forward
//! pass and only the GCN weights learn through it.

use crate::autodiff::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

/// Which stream an instance set belongs to; fixes the feature width.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StreamKind {
    Dynamic,
    Static,
}

impl StreamKind {
    /// Width of the upstream backbone features for this stream.
    pub fn feature_dim(self) -> usize {
        match self {
            StreamKind::Dynamic => 1024,
            StreamKind::Static => 2048,
        }
    }

    /// First embedding layer width (1024->512 dynamic, 2048->1024 static).
    pub fn embed_hidden_dim(self) -> usize {
        match self {
            StreamKind::Dynamic => 512,
            StreamKind::Static => 1024,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StreamKind::Dynamic => "dynamic",
            StreamKind::Static => "static",
        }
    }
}

/// Embedded instance width shared by both streams.
pub const EMBED_DIM: usize = 256;
/// Fused local-context width (embedded + context).
pub const FUSED_DIM: usize = 2 * EMBED_DIM;
/// Hidden width of the attention unit.
pub const ATT_HIDDEN_DIM: usize = 256;

/// The NxD feature matrix of one stream of one video.
#[derive(Clone, Debug)]
pub struct InstanceSet {
    features: Tensor2D,
    kind: StreamKind,
    video_id: String,
}

impl InstanceSet {
    pub fn new(features: Tensor2D, kind: StreamKind, video_id: impl Into<String>) -> Result<Self> {
        let video_id = video_id.into();
        if features.rows() == 0 {
            return Err(Error::EmptyInstanceSet(video_id));
        }
        if features.cols() != kind.feature_dim() {
            return Err(Error::shape(
                "InstanceSet",
                format!(
                    "{} stream expects {} columns, got {} (video {})",
                    kind.label(),
                    kind.feature_dim(),
                    features.cols(),
                    video_id
                ),
            ));
        }
        Ok(InstanceSet {
            features,
            kind,
            video_id,
        })
    }

    pub fn features(&self) -> &Tensor2D {
        &self.features
    }

    pub fn kind(&self) -> StreamKind {
        self.kind
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn instance_count(&self) -> usize {
        self.features.rows()
    }
}

/// Raw and Kipf-normalized adjacency of the instance graph.
#[derive(Clone, Debug)]
pub struct AdjacencyPair {
    pub raw: Tensor2D,
    pub normalized: Tensor2D,
    pub kernel_scale: f64,
}

/// Builds the instance graph from embedded features.
///
/// `raw[i][j] = exp(-||f_i - f_j||_2 / K)`, then the self-looped matrix
/// `A + I` is normalized symmetrically by its degree matrix. The raw
/// matrix is exactly symmetric with a unit diagonal.
pub fn build_adjacency(embedded: &Tensor2D, kernel_scale: f64) -> Result<AdjacencyPair> {
    if kernel_scale <= 0.0 || !kernel_scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel scale must be positive, got {kernel_scale}"
        )));
    }
    let n = embedded.rows();
    if n == 0 {
        return Err(Error::EmptyInstanceSet("adjacency of zero instances".into()));
    }

    let mut raw = Tensor2D::zeros(n, n);
    for i in 0..n {
        raw.set(i, i, 1.0);
        for j in (i + 1)..n {
            let dist = row_distance(embedded, i, j);
            let a = (-dist / kernel_scale).exp();
            raw.set(i, j, a);
            raw.set(j, i, a);
        }
    }

    // A~ = A + I; D~ from its row sums; A^ = D~^(-1/2) A~ D~^(-1/2)
    let mut inv_sqrt_degree = vec![0.0; n];
    for i in 0..n {
        let degree: f64 = (0..n).map(|j| raw.get(i, j)).sum::<f64>() + 1.0;
        inv_sqrt_degree[i] = 1.0 / degree.sqrt();
    }
    let mut normalized = Tensor2D::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let tilde = raw.get(i, j) + if i == j { 1.0 } else { 0.0 };
            normalized.set(i, j, inv_sqrt_degree[i] * tilde * inv_sqrt_degree[j]);
        }
    }

    Ok(AdjacencyPair {
        raw,
        normalized,
        kernel_scale,
    })
}

fn row_distance(m: &Tensor2D, i: usize, j: usize) -> f64 {
    let (a, b) = (m.row(i), m.row(j));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Attention pooling variants.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AttentionVariant {
    /// Context-aware attention: fused = [embedded; context].
    Caa,
    /// Standard attention unit: the context half is replaced by the
    /// embedded features themselves, keeping the 512-d interface.
    Sau,
    /// Uniform pooling: every weight is exactly 1/N, no attention
    /// parameters are used.
    Avg,
}

impl AttentionVariant {
    pub fn label(self) -> &'static str {
        match self {
            AttentionVariant::Caa => "caa",
            AttentionVariant::Sau => "sau",
            AttentionVariant::Avg => "avg",
        }
    }

    pub fn uses_att_params(self) -> bool {
        !matches!(self, AttentionVariant::Avg)
    }
}

/// How the per-instance attention scores become weights.
///
/// The sum-to-one weight contract holds for `Softmax`; `Sigmoid`
/// applies a per-instance sigmoid with no normalization.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AttentionNorm {
    Softmax,
    Sigmoid,
}

/// One fully connected layer: `x * weight + bias` with `weight` stored
/// input-major (fan_in x fan_out) and `bias` as a 1 x fan_out row.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub weight: Tensor2D,
    pub bias: Tensor2D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbedParams {
    pub fc1: Linear,
    pub fc2: Linear,
}

/// GCN layer weights; per the layer rule there are no bias terms.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    pub w1: Tensor2D,
    pub w2: Tensor2D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttParams {
    pub fc1: Linear,
    pub fc2: Linear,
}

/// All trainable tensors of one stream branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchParams {
    pub embed: EmbedParams,
    pub gcn: GcnParams,
    /// `None` for the Avg pooling variant.
    pub att: Option<AttParams>,
}

/// Graph node ids of one registered linear layer.
#[derive(Copy, Clone, Debug)]
pub struct LinearIds {
    pub weight: NodeId,
    pub bias: NodeId,
}

/// Graph node ids of one registered branch.
#[derive(Copy, Clone, Debug)]
pub struct BranchIds {
    pub embed_fc1: LinearIds,
    pub embed_fc2: LinearIds,
    pub gcn_w1: NodeId,
    pub gcn_w2: NodeId,
    pub att_fc1: Option<LinearIds>,
    pub att_fc2: Option<LinearIds>,
}

/// Nodes produced by one branch forward pass.
#[derive(Copy, Clone, Debug)]
pub struct BranchNodes {
    pub embedded: NodeId,
    pub context: NodeId,
    pub fused: NodeId,
    pub weights: NodeId,
    pub stream_feature: NodeId,
}

/// Values extracted from a branch forward pass.
#[derive(Clone, Debug)]
pub struct AttentionOutput {
    /// 1 x 512 pooled stream feature.
    pub stream_feature: Tensor2D,
    /// N x 1 attention weights.
    pub weights: Tensor2D,
    /// N x 512 fused local-context features.
    pub fused: Tensor2D,
    /// N x 256 context-related features.
    pub context: Tensor2D,
    /// N x 256 embedded instance features.
    pub embedded: Tensor2D,
}

impl AttentionOutput {
    pub fn from_nodes(g: &Graph<'_>, nodes: &BranchNodes) -> Self {
        AttentionOutput {
            stream_feature: g.value(nodes.stream_feature).clone(),
            weights: g.value(nodes.weights).clone(),
            fused: g.value(nodes.fused).clone(),
            context: g.value(nodes.context).clone(),
            embedded: g.value(nodes.embedded).clone(),
        }
    }
}

pub fn linear(g: &mut Graph<'_>, x: NodeId, layer: LinearIds) -> Result<NodeId> {
    let prod = g.matmul(x, layer.weight)?;
    g.add(prod, layer.bias)
}

/// Two embedding layers with ReLU after each: 1024->512->256 for the
/// dynamic stream, 2048->1024->256 for the static stream.
pub fn embed(g: &mut Graph<'_>, x: NodeId, fc1: LinearIds, fc2: LinearIds) -> Result<NodeId> {
    if g.value(x).cols() != g.value(fc1.weight).rows() {
        return Err(Error::shape(
            "embed",
            format!(
                "input width {} does not match embedding fan-in {}",
                g.value(x).cols(),
                g.value(fc1.weight).rows()
            ),
        ));
    }
    let h = linear(g, x, fc1)?;
    let h = g.relu(h);
    let out = linear(g, h, fc2)?;
    Ok(g.relu(out))
}

/// Two GCN layers `H_{l+1} = ReLU(A^ H_l W_l)` over the normalized
/// adjacency; the output rows are the context-related features.
pub fn tcg_forward(
    g: &mut Graph<'_>,
    embedded: NodeId,
    normalized: &Tensor2D,
    w1: NodeId,
    w2: NodeId,
) -> Result<NodeId> {
    let n = g.value(embedded).rows();
    if normalized.shape() != (n, n) {
        return Err(Error::shape(
            "tcg_forward",
            format!("adjacency {:?} for {} instances", normalized.shape(), n),
        ));
    }
    let adj = g.constant(normalized.clone());
    let mixed = g.matmul(adj, embedded)?;
    let h1 = g.matmul(mixed, w1)?;
    let h1 = g.relu(h1);
    let mixed = g.matmul(adj, h1)?;
    let h2 = g.matmul(mixed, w2)?;
    Ok(g.relu(h2))
}

/// Fuses instance and context features and pools them into one stream
/// feature with per-instance weights.
pub fn attend_aggregate(
    g: &mut Graph<'_>,
    embedded: NodeId,
    context: NodeId,
    att: Option<(LinearIds, LinearIds)>,
    variant: AttentionVariant,
    norm: AttentionNorm,
) -> Result<BranchNodes> {
    let n = g.value(embedded).rows();
    if n == 0 {
        return Err(Error::EmptyInstanceSet("attend_aggregate".into()));
    }
    if g.value(context).shape() != g.value(embedded).shape() {
        return Err(Error::shape(
            "attend_aggregate",
            format!(
                "embedded {:?} vs context {:?}",
                g.value(embedded).shape(),
                g.value(context).shape()
            ),
        ));
    }

    let fused = match variant {
        AttentionVariant::Caa | AttentionVariant::Avg => g.concat_cols(embedded, context)?,
        AttentionVariant::Sau => g.concat_cols(embedded, embedded)?,
    };

    let weights = match variant {
        AttentionVariant::Avg => g.constant(Tensor2D::filled(n, 1, 1.0 / n as f64)),
        AttentionVariant::Caa | AttentionVariant::Sau => {
            let (fc1, fc2) = att.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "variant {} needs attention parameters",
                    variant.label()
                ))
            })?;
            let h = linear(g, fused, fc1)?;
            let h = g.relu(h);
            let scores = linear(g, h, fc2)?;
            match norm {
                AttentionNorm::Softmax => g.softmax(scores)?,
                AttentionNorm::Sigmoid => g.sigmoid(scores),
            }
        }
    };

    let stream_feature = g.weighted_row_sum(fused, weights)?;
    Ok(BranchNodes {
        embedded,
        context,
        fused,
        weights,
        stream_feature,
    })
}

/// Full branch: embed, build the instance graph from the embedded
/// values, run the context unit, and pool.
pub fn branch_forward(
    g: &mut Graph<'_>,
    features: NodeId,
    ids: &BranchIds,
    kernel_scale: f64,
    variant: AttentionVariant,
    norm: AttentionNorm,
) -> Result<(BranchNodes, AdjacencyPair)> {
    let embedded = embed(g, features, ids.embed_fc1, ids.embed_fc2)?;
    let adjacency = build_adjacency(g.value(embedded), kernel_scale)?;
    let context = tcg_forward(g, embedded, &adjacency.normalized, ids.gcn_w1, ids.gcn_w2)?;
    let att = match (ids.att_fc1, ids.att_fc2) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let nodes = attend_aggregate(g, embedded, context, att, variant, norm)?;
    Ok((nodes, adjacency))
}
