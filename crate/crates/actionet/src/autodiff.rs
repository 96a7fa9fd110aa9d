//! Reverse-mode automatic differentiation over [`Tensor2D`].
//!
//! A [`Graph`] is a tape: every operation appends one node, so node
//! indices are a topological order and iterating them in reverse is a
//! valid reverse-topological order. [`Graph::backward`] walks that
//! order once and accumulates each node's total derivative in creation
//! order, which makes gradient values deterministic bit-for-bit.
//!
//! One graph is single-threaded; many graphs (one per sample) may run
//! concurrently against the same borrowed parameter tensors.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

/// Forward-pass mode; only dropout distinguishes the two.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Handle to a node in one specific [`Graph`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

enum Value<'a> {
    Owned(Tensor2D),
    Borrowed(&'a Tensor2D),
}

impl Value<'_> {
    fn tensor(&self) -> &Tensor2D {
        match self {
            Value::Owned(t) => t,
            Value::Borrowed(t) => t,
        }
    }
}

/// How the right-hand operand of an elementwise op is expanded.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Broadcast {
    None,
    /// rhs is 1x1, applied to every entry.
    ScalarRhs,
    /// rhs is a 1xn row, applied to every row.
    RowRhs,
}

#[derive(Copy, Clone, Debug)]
enum BinaryKind {
    Add,
    Sub,
    Mul,
}

enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Binary(BinaryKind, NodeId, NodeId, Broadcast),
    Scale(NodeId, f64),
    Exp(NodeId),
    Relu(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    ConcatCols(NodeId, NodeId),
    Softmax(NodeId),
    Sum(NodeId),
    Mean(NodeId),
    WeightedRowSum { x: NodeId, w: NodeId },
    Dropout { x: NodeId, mask: Tensor2D },
}

struct Node<'a> {
    value: Value<'a>,
    op: Op,
    requires_grad: bool,
}

/// Tape of recorded operations plus gradient accumulators.
#[derive(Default)]
pub struct Graph<'a> {
    nodes: Vec<Node<'a>>,
    grads: Vec<Option<Tensor2D>>,
}

impl<'a> Graph<'a> {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            grads: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Non-trainable leaf borrowing caller data (e.g. input features).
    pub fn input(&mut self, t: &'a Tensor2D) -> NodeId {
        self.push(Value::Borrowed(t), Op::Leaf, false)
    }

    /// Trainable leaf borrowing caller data; receives a gradient.
    pub fn param(&mut self, t: &'a Tensor2D) -> NodeId {
        self.push(Value::Borrowed(t), Op::Leaf, true)
    }

    /// Non-trainable leaf owning its value (e.g. a normalized adjacency).
    pub fn constant(&mut self, t: Tensor2D) -> NodeId {
        self.push(Value::Owned(t), Op::Leaf, false)
    }

    pub fn value(&self, id: NodeId) -> &Tensor2D {
        self.nodes[id.0].value.tensor()
    }

    /// Accumulated gradient of the last [`Graph::backward`] root with
    /// respect to `id`; `None` if `id` is unreachable from the root or
    /// does not require gradients.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor2D> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    fn push(&mut self, value: Value<'a>, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor2D, op: Op, parents: &[NodeId]) -> NodeId {
        let rg = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        self.push(Value::Owned(value), op, rg)
    }

    /// `a * b` (matrix product).
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push_op(out, Op::MatMul(a, b), &[a, b]))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Add, a, b)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Sub, a, b)
    }

    /// Entrywise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Mul, a, b)
    }

    fn binary(&mut self, kind: BinaryKind, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        let bc = if av.same_shape(bv) {
            Broadcast::None
        } else if bv.is_scalar() {
            Broadcast::ScalarRhs
        } else if bv.rows() == 1 && bv.cols() == av.cols() {
            Broadcast::RowRhs
        } else {
            return Err(Error::shape(
                "elementwise",
                format!("{:?} vs {:?} not conformable", av.shape(), bv.shape()),
            ));
        };
        let f: fn(f64, f64) -> f64 = match kind {
            BinaryKind::Add => |x, y| x + y,
            BinaryKind::Sub => |x, y| x - y,
            BinaryKind::Mul => |x, y| x * y,
        };
        let out = broadcast_apply(av, bv, bc, f);
        Ok(self.push_op(out, Op::Binary(kind, a, b, bc), &[a, b]))
    }

    /// `k * a` for a plain scalar `k`.
    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let out = self.value(a).scale(k);
        self.push_op(out, Op::Scale(a, k), &[a])
    }

    /// Entrywise `e^x`. Finite only for inputs below ~709.
    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::exp);
        self.push_op(out, Op::Exp(a), &[a])
    }

    /// Entrywise `max(x, 0)`; the subgradient at 0 is taken as 0.
    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        self.push_op(out, Op::Relu(a), &[a])
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(sigmoid);
        self.push_op(out, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::tanh);
        self.push_op(out, Op::Tanh(a), &[a])
    }

    /// Columns of `a` followed by columns of `b`; row counts must agree.
    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.rows() != bv.rows() {
            return Err(Error::shape(
                "concat_cols",
                format!("{} rows vs {} rows", av.rows(), bv.rows()),
            ));
        }
        let (rows, p, q) = (av.rows(), av.cols(), bv.cols());
        let mut data = Vec::with_capacity(rows * (p + q));
        for r in 0..rows {
            data.extend_from_slice(av.row(r));
            data.extend_from_slice(bv.row(r));
        }
        let out = Tensor2D::new(rows, p + q, data)?;
        Ok(self.push_op(out, Op::ConcatCols(a, b), &[a, b]))
    }

    /// Softmax of a vector-shaped node (mx1 or 1xn), computed with
    /// max-subtraction so large inputs cannot overflow.
    pub fn softmax(&mut self, a: NodeId) -> Result<NodeId> {
        let av = self.value(a);
        if av.rows() != 1 && av.cols() != 1 {
            return Err(Error::shape(
                "softmax",
                format!("expected a vector, got {:?}", av.shape()),
            ));
        }
        let out = softmax_slice(av);
        Ok(self.push_op(out, Op::Softmax(a), &[a]))
    }

    /// Sum of all entries as a 1x1 node.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let out = Tensor2D::scalar(self.value(a).sum());
        self.push_op(out, Op::Sum(a), &[a])
    }

    /// Mean of all entries as a 1x1 node.
    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let out = Tensor2D::scalar(self.value(a).mean());
        self.push_op(out, Op::Mean(a), &[a])
    }

    /// `sum_i w_i * x_i` over rows: `x` is NxD, `w` is Nx1, result 1xD.
    pub fn weighted_row_sum(&mut self, x: NodeId, w: NodeId) -> Result<NodeId> {
        let (xv, wv) = (self.value(x), self.value(w));
        if wv.cols() != 1 || wv.rows() != xv.rows() {
            return Err(Error::shape(
                "weighted_row_sum",
                format!("x is {:?}, weights are {:?}", xv.shape(), wv.shape()),
            ));
        }
        let out = wv.t_matmul(xv)?;
        Ok(self.push_op(out, Op::WeightedRowSum { x, w }, &[x, w]))
    }

    /// Inverted dropout: in train mode each entry is zeroed with
    /// probability `rate` and survivors are scaled by `1/(1-rate)`; in
    /// eval mode (or at rate 0) the input node is returned unchanged
    /// and no random numbers are drawn.
    pub fn dropout<R: Rng>(&mut self, x: NodeId, rate: f64, mode: Mode, rng: &mut R) -> Result<NodeId> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate must be in [0, 1), got {rate}"
            )));
        }
        if mode == Mode::Eval || rate == 0.0 {
            return Ok(x);
        }
        let keep_scale = 1.0 / (1.0 - rate);
        let xv = self.value(x);
        let mask = Tensor2D::from_fn(xv.rows(), xv.cols(), |_, _| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep_scale
            }
        });
        let out = xv.hadamard(&mask)?;
        Ok(self.push_op(out, Op::Dropout { x, mask }, &[x]))
    }

    /// Accumulates `d root / d node` for every node reachable from the
    /// 1x1 `root`, walking the tape once in reverse creation order.
    pub fn backward(&mut self, root: NodeId) -> Result<()> {
        let rv = self.value(root);
        if !rv.is_scalar() {
            return Err(Error::shape(
                "backward",
                format!("root must be 1x1, got {:?}", rv.shape()),
            ));
        }
        let mut grads: Vec<Option<Tensor2D>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Tensor2D::scalar(1.0));
        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.dispatch(i, &g, &mut grads)?;
            grads[i] = Some(g);
        }
        self.grads = grads;
        Ok(())
    }

    fn dispatch(&self, i: usize, g: &Tensor2D, grads: &mut [Option<Tensor2D>]) -> Result<()> {
        let needs = |id: NodeId| self.nodes[id.0].requires_grad;
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if needs(*a) {
                    acc(grads, *a, g.matmul_t(self.value(*b))?)?;
                }
                if needs(*b) {
                    acc(grads, *b, self.value(*a).t_matmul(g)?)?;
                }
            }
            Op::Binary(kind, a, b, bc) => {
                let (sign, is_mul) = match kind {
                    BinaryKind::Add => (1.0, false),
                    BinaryKind::Sub => (-1.0, false),
                    BinaryKind::Mul => (1.0, true),
                };
                if needs(*a) {
                    let da = if is_mul {
                        broadcast_apply(g, self.value(*b), *bc, |x, y| x * y)
                    } else {
                        g.clone()
                    };
                    acc(grads, *a, da)?;
                }
                if needs(*b) {
                    let full = if is_mul {
                        g.hadamard(self.value(*a))?
                    } else {
                        g.scale(sign)
                    };
                    acc(grads, *b, reduce_broadcast(&full, *bc))?;
                }
            }
            Op::Scale(a, k) => {
                if needs(*a) {
                    acc(grads, *a, g.scale(*k))?;
                }
            }
            Op::Exp(a) => {
                if needs(*a) {
                    acc(grads, *a, g.hadamard(self.nodes[i].value.tensor())?)?;
                }
            }
            Op::Relu(a) => {
                if needs(*a) {
                    let mask = self.value(*a).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
                    acc(grads, *a, g.hadamard(&mask)?)?;
                }
            }
            Op::Sigmoid(a) => {
                if needs(*a) {
                    let y = self.nodes[i].value.tensor();
                    acc(grads, *a, g.zip_map(y, |gv, yv| gv * yv * (1.0 - yv))?)?;
                }
            }
            Op::Tanh(a) => {
                if needs(*a) {
                    let y = self.nodes[i].value.tensor();
                    acc(grads, *a, g.zip_map(y, |gv, yv| gv * (1.0 - yv * yv))?)?;
                }
            }
            Op::ConcatCols(a, b) => {
                let p = self.value(*a).cols();
                let q = self.value(*b).cols();
                let rows = g.rows();
                if needs(*a) {
                    let da = Tensor2D::from_fn(rows, p, |r, c| g.get(r, c));
                    acc(grads, *a, da)?;
                }
                if needs(*b) {
                    let db = Tensor2D::from_fn(rows, q, |r, c| g.get(r, p + c));
                    acc(grads, *b, db)?;
                }
            }
            Op::Softmax(a) => {
                if needs(*a) {
                    let y = self.nodes[i].value.tensor();
                    let dot: f64 = g.data().iter().zip(y.data()).map(|(gv, yv)| gv * yv).sum();
                    let da = g.zip_map(y, |gv, yv| yv * (gv - dot))?;
                    acc(grads, *a, da)?;
                }
            }
            Op::Sum(a) => {
                if needs(*a) {
                    let av = self.value(*a);
                    acc(grads, *a, Tensor2D::filled(av.rows(), av.cols(), g.get(0, 0)))?;
                }
            }
            Op::Mean(a) => {
                if needs(*a) {
                    let av = self.value(*a);
                    let k = g.get(0, 0) / av.len() as f64;
                    acc(grads, *a, Tensor2D::filled(av.rows(), av.cols(), k))?;
                }
            }
            Op::WeightedRowSum { x, w } => {
                // g is 1xD; d/dx_i = w_i * g, d/dw_i = <g, x_i>
                if needs(*x) {
                    acc(grads, *x, self.value(*w).matmul(g)?)?;
                }
                if needs(*w) {
                    acc(grads, *w, self.value(*x).matmul_t(g)?)?;
                }
            }
            Op::Dropout { x, mask } => {
                if needs(*x) {
                    acc(grads, *x, g.hadamard(mask)?)?;
                }
            }
        }
        Ok(())
    }
}

fn acc(grads: &mut [Option<Tensor2D>], id: NodeId, delta: Tensor2D) -> Result<()> {
    match &mut grads[id.0] {
        Some(t) => t.add_scaled_assign(&delta, 1.0),
        slot @ None => {
            *slot = Some(delta);
            Ok(())
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax_slice(v: &Tensor2D) -> Tensor2D {
    let max = v.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.data().iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let data = exps.into_iter().map(|e| e / total).collect();
    Tensor2D::new(v.rows(), v.cols(), data).expect("shape preserved")
}

fn broadcast_apply(a: &Tensor2D, b: &Tensor2D, bc: Broadcast, f: fn(f64, f64) -> f64) -> Tensor2D {
    match bc {
        Broadcast::None => a.zip_map(b, f).expect("checked same shape"),
        Broadcast::ScalarRhs => {
            let k = b.get(0, 0);
            a.map(|x| f(x, k))
        }
        Broadcast::RowRhs => Tensor2D::from_fn(a.rows(), a.cols(), |r, c| f(a.get(r, c), b.get(0, c))),
    }
}

/// Sums a full-shaped gradient back down to the broadcast operand's shape.
fn reduce_broadcast(full: &Tensor2D, bc: Broadcast) -> Tensor2D {
    match bc {
        Broadcast::None => full.clone(),
        Broadcast::ScalarRhs => Tensor2D::scalar(full.sum()),
        Broadcast::RowRhs => {
            let mut out = Tensor2D::zeros(1, full.cols());
            for r in 0..full.rows() {
                for c in 0..full.cols() {
                    out.set(0, c, out.get(0, c) + full.get(r, c));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    /// Central-difference check of every input coordinate, using the
    /// documented tolerance |analytic - fd| / (|analytic| + 1e-8) < 1e-4
    /// at h = 1e-5.
    fn fd_check(inputs: &[Tensor2D], build: &dyn Fn(&mut Graph, &[NodeId]) -> NodeId) {
        let h = 1e-5;
        let eval = |tensors: &[Tensor2D]| -> f64 {
            let mut g = Graph::new();
            let ids: Vec<NodeId> = tensors.iter().map(|t| g.param(t)).collect();
            let root = build(&mut g, &ids);
            g.value(root).get(0, 0)
        };

        let mut g = Graph::new();
        let ids: Vec<NodeId> = inputs.iter().map(|t| g.param(t)).collect();
        let root = build(&mut g, &ids);
        g.backward(root).unwrap();

        for (ti, t) in inputs.iter().enumerate() {
            let analytic = g.grad(ids[ti]).cloned().unwrap_or_else(|| Tensor2D::zeros(t.rows(), t.cols()));
            for k in 0..t.len() {
                let mut plus = inputs.to_vec();
                plus[ti].data_mut()[k] += h;
                let mut minus = inputs.to_vec();
                minus[ti].data_mut()[k] -= h;
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let a = analytic.data()[k];
                let rel = (a - fd).abs() / (a.abs() + 1e-8);
                assert!(
                    rel < 1e-4,
                    "input {ti} coord {k}: analytic {a} vs fd {fd} (rel {rel})"
                );
            }
        }
    }

    fn random_tensor(rows: usize, cols: usize, label: &str) -> Tensor2D {
        let mut r = rng::stream(42, label);
        Tensor2D::from_fn(rows, cols, |_, _| r.random_range(-2.0..2.0))
    }

    #[test]
    fn matmul_gradient_matches_finite_difference() {
        let a = random_tensor(3, 4, "mm-a");
        let b = random_tensor(4, 2, "mm-b");
        fd_check(&[a, b], &|g, ids| {
            let p = g.matmul(ids[0], ids[1]).unwrap();
            g.sum(p)
        });
    }

    #[test]
    fn relu_sign_cases() {
        let mut g = Graph::new();
        let x = g.constant(Tensor2D::row_vec(vec![-1.0, 0.0, 2.0]));
        let y = g.relu(x);
        assert_eq!(g.value(y).data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn sigmoid_at_zero_is_half() {
        let mut g = Graph::new();
        let x = g.constant(Tensor2D::scalar(0.0));
        let y = g.sigmoid(x);
        assert_eq!(g.value(y).get(0, 0), 0.5);
    }

    #[test]
    fn elementwise_gradients_match_finite_difference() {
        let x = random_tensor(3, 3, "elem-x");
        let y = random_tensor(3, 3, "elem-y");
        let row = random_tensor(1, 3, "elem-row");
        let scalar = random_tensor(1, 1, "elem-k");

        fd_check(&[x.clone()], &|g, ids| {
            let e = g.exp(ids[0]);
            g.sum(e)
        });
        fd_check(&[x.clone()], &|g, ids| {
            let e = g.tanh(ids[0]);
            g.sum(e)
        });
        fd_check(&[x.clone()], &|g, ids| {
            let e = g.sigmoid(ids[0]);
            g.sum(e)
        });
        fd_check(&[x.clone(), y], &|g, ids| {
            let m = g.mul(ids[0], ids[1]).unwrap();
            g.sum(m)
        });
        fd_check(&[x.clone(), row], &|g, ids| {
            let m = g.add(ids[0], ids[1]).unwrap();
            let m = g.mul(m, ids[0]).unwrap();
            g.sum(m)
        });
        fd_check(&[x.clone(), scalar], &|g, ids| {
            let m = g.sub(ids[0], ids[1]).unwrap();
            let m = g.mul(m, m).unwrap();
            g.sum(m)
        });
        fd_check(&[x], &|g, ids| {
            let s = g.scale(ids[0], -1.7);
            g.sum(s)
        });
    }

    #[test]
    fn elementwise_rejects_nonconformable() {
        let mut g = Graph::new();
        let a = g.constant(Tensor2D::zeros(2, 3));
        let b = g.constant(Tensor2D::zeros(3, 2));
        assert!(g.add(a, b).is_err());
    }

    #[test]
    fn concat_cols_basic_and_empty() {
        let mut g = Graph::new();
        let a = g.constant(Tensor2D::row_vec(vec![1.0, 2.0]));
        let b = g.constant(Tensor2D::row_vec(vec![3.0, 4.0, 5.0]));
        let c = g.concat_cols(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[1.0, 2.0, 3.0, 4.0, 5.0]);

        let empty = g.constant(Tensor2D::zeros(1, 0));
        let d = g.concat_cols(a, empty).unwrap();
        assert_eq!(g.value(d).data(), &[1.0, 2.0]);

        let tall = g.constant(Tensor2D::zeros(2, 1));
        assert!(g.concat_cols(a, tall).is_err());
    }

    #[test]
    fn concat_gradient_splits() {
        let a = random_tensor(2, 2, "cat-a");
        let b = random_tensor(2, 3, "cat-b");
        // d/da of sum(concat(a, b)) is all ones.
        let mut g = Graph::new();
        let ia = g.param(&a);
        let ib = g.param(&b);
        let c = g.concat_cols(ia, ib).unwrap();
        let s = g.sum(c);
        g.backward(s).unwrap();
        assert_eq!(g.grad(ia).unwrap(), &Tensor2D::filled(2, 2, 1.0));
        assert_eq!(g.grad(ib).unwrap(), &Tensor2D::filled(2, 3, 1.0));
        fd_check(&[a, b], &|g, ids| {
            let c = g.concat_cols(ids[0], ids[1]).unwrap();
            let sq = g.mul(c, c).unwrap();
            g.sum(sq)
        });
    }

    #[test]
    fn softmax_uniform_and_stability() {
        let mut g = Graph::new();
        let x = g.constant(Tensor2D::row_vec(vec![0.0, 0.0, 0.0]));
        let y = g.softmax(x).unwrap();
        for &v in g.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }

        let big = g.constant(Tensor2D::row_vec(vec![1000.0, 0.0]));
        let y = g.softmax(big).unwrap();
        let out = g.value(y);
        assert!(out.all_finite());
        assert!(out.get(0, 0) > 1.0 - 1e-12);
        assert!(out.get(0, 1) < 1e-12);
        assert!((out.sum() - 1.0).abs() < 1e-12);

        let mat = g.constant(Tensor2D::zeros(2, 2));
        assert!(g.softmax(mat).is_err());
    }

    #[test]
    fn softmax_gradient_matches_finite_difference() {
        let x = random_tensor(5, 1, "sm-x");
        let w = random_tensor(5, 1, "sm-w");
        fd_check(&[x, w], &|g, ids| {
            let y = g.softmax(ids[0]).unwrap();
            let p = g.mul(y, ids[1]).unwrap();
            g.sum(p)
        });
    }

    #[test]
    fn weighted_row_sum_uniform_is_column_mean() {
        let x = random_tensor(4, 3, "wrs-x");
        let mut g = Graph::new();
        let ix = g.input(&x);
        let w = g.constant(Tensor2D::filled(4, 1, 0.25));
        let out = g.weighted_row_sum(ix, w).unwrap();
        for c in 0..3 {
            let mean = (0..4).map(|r| x.get(r, c)).sum::<f64>() / 4.0;
            assert!((g.value(out).get(0, c) - mean).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_row_sum_one_hot_selects_row() {
        let x = random_tensor(4, 3, "wrs-sel");
        let mut g = Graph::new();
        let ix = g.input(&x);
        let w = g.constant(Tensor2D::col_vec(vec![0.0, 0.0, 1.0, 0.0]));
        let out = g.weighted_row_sum(ix, w).unwrap();
        assert_eq!(g.value(out).data(), x.row(2));

        let bad = g.constant(Tensor2D::col_vec(vec![1.0, 0.0]));
        assert!(g.weighted_row_sum(ix, bad).is_err());
    }

    #[test]
    fn weighted_row_sum_gradients_match_finite_difference() {
        let x = random_tensor(4, 3, "wrs-g-x");
        let w = random_tensor(4, 1, "wrs-g-w");
        fd_check(&[x, w], &|g, ids| {
            let out = g.weighted_row_sum(ids[0], ids[1]).unwrap();
            let sq = g.mul(out, out).unwrap();
            g.sum(sq)
        });
    }

    #[test]
    fn reduce_gradients_match_finite_difference() {
        let x = random_tensor(3, 2, "red-x");
        fd_check(&[x.clone()], &|g, ids| {
            let s = g.sum(ids[0]);
            let sq = g.mul(s, s).unwrap();
            g.sum(sq)
        });
        fd_check(&[x], &|g, ids| {
            let m = g.mean(ids[0]);
            let sq = g.mul(m, m).unwrap();
            g.sum(sq)
        });
    }

    #[test]
    fn dropout_eval_and_zero_rate_are_identity() {
        let x = random_tensor(3, 3, "drop-x");
        let mut g = Graph::new();
        let ix = g.input(&x);
        let mut r = rng::stream(1, "drop");
        let eval = g.dropout(ix, 0.5, Mode::Eval, &mut r).unwrap();
        assert_eq!(eval, ix);
        let zero = g.dropout(ix, 0.0, Mode::Train, &mut r).unwrap();
        assert_eq!(zero, ix);
        assert!(g.dropout(ix, 1.0, Mode::Train, &mut r).is_err());
        assert!(g.dropout(ix, -0.1, Mode::Train, &mut r).is_err());
    }

    #[test]
    fn dropout_fixed_seed_is_reproducible() {
        let x = random_tensor(4, 5, "drop-seed");
        let run = || {
            let mut g = Graph::new();
            let ix = g.input(&x);
            let mut r = rng::stream(99, "drop-mask");
            let d = g.dropout(ix, 0.5, Mode::Train, &mut r).unwrap();
            g.value(d).clone()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dropout_preserves_expectation() {
        // 1e5 entries of 1.0 at rate 0.5: the mean stays within 0.01 of 1.
        let x = Tensor2D::filled(1, 100_000, 1.0);
        let mut g = Graph::new();
        let ix = g.input(&x);
        let mut r = rng::stream(7, "drop-expect");
        let d = g.dropout(ix, 0.5, Mode::Train, &mut r).unwrap();
        let mean = g.value(d).mean();
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn dropout_gradient_uses_mask() {
        // Same seed on both FD evaluations keeps the mask fixed, so the
        // check is well-posed.
        let x = random_tensor(3, 4, "drop-grad");
        let h = 1e-5;
        let build = |g: &mut Graph, ix: NodeId| -> NodeId {
            let mut r = rng::stream(5, "drop-grad-mask");
            let d = g.dropout(ix, 0.3, Mode::Train, &mut r).unwrap();
            let sq = g.mul(d, d).unwrap();
            g.sum(sq)
        };
        let value_of = |t: &Tensor2D| -> f64 {
            let mut g = Graph::new();
            let ix = g.param(t);
            let s = build(&mut g, ix);
            g.value(s).get(0, 0)
        };
        let mut g = Graph::new();
        let ix = g.param(&x);
        let s = build(&mut g, ix);
        g.backward(s).unwrap();
        let analytic = g.grad(ix).unwrap().clone();
        for k in 0..x.len() {
            let mut plus = x.clone();
            plus.data_mut()[k] += h;
            let mut minus = x.clone();
            minus.data_mut()[k] -= h;
            let fd = (value_of(&plus) - value_of(&minus)) / (2.0 * h);
            let a = analytic.data()[k];
            assert!((a - fd).abs() / (a.abs() + 1e-8) < 1e-4);
        }
    }

    #[test]
    fn backward_of_sum_is_ones() {
        let x = random_tensor(3, 2, "bw-sum");
        let mut g = Graph::new();
        let ix = g.param(&x);
        let s = g.sum(ix);
        g.backward(s).unwrap();
        assert_eq!(g.grad(ix).unwrap(), &Tensor2D::filled(3, 2, 1.0));
    }

    #[test]
    fn backward_of_quadratic_is_two_x() {
        let x = random_tensor(1, 5, "bw-quad");
        let mut g = Graph::new();
        let ix = g.param(&x);
        let sq = g.mul(ix, ix).unwrap();
        let s = g.sum(sq);
        g.backward(s).unwrap();
        let expected = x.scale(2.0);
        assert!(g.grad(ix).unwrap().max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn backward_rejects_non_scalar_root() {
        let x = random_tensor(2, 2, "bw-bad");
        let mut g = Graph::new();
        let ix = g.param(&x);
        assert!(g.backward(ix).is_err());
    }

    #[test]
    fn inputs_without_grad_stay_empty() {
        let x = random_tensor(2, 2, "nograd-x");
        let w = random_tensor(2, 2, "nograd-w");
        let mut g = Graph::new();
        let ix = g.input(&x);
        let iw = g.param(&w);
        let p = g.matmul(ix, iw).unwrap();
        let s = g.sum(p);
        g.backward(s).unwrap();
        assert!(g.grad(ix).is_none());
        assert!(g.grad(iw).is_some());
    }

    #[test]
    fn forward_is_deterministic() {
        let x = random_tensor(6, 6, "det");
        let run = || {
            let mut g = Graph::new();
            let ix = g.input(&x);
            let m = g.matmul(ix, ix).unwrap();
            let e = g.sigmoid(m);
            let s = g.sum(e);
            g.value(s).get(0, 0)
        };
        assert!(run() == run());
    }
}
