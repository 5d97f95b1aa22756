//! Reverse-mode differentiation over dense `f64` matrices. Every primitive
//! records its inputs (and whatever it needs for the pullback) on the tape;
//! [`Tape::backward`] walks the record once in reverse.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::linalg::{gemm, Matrix};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    Mean,
    Sum,
    #[default]
    Max,
}

/// Contiguous row ranges, one per graph, partitioning a node matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segments {
    offsets: Vec<usize>,
}

impl Segments {
    /// Every segment must be non-empty.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for &s in sizes {
            if s == 0 {
                return Err(Error::contract("empty segment"));
            }
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(Self { offsets })
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn total_rows(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

/// Sparse neighbourhoods and head layout for multi-head graph attention.
/// Row `v` of `neighbors` lists the nodes `v` attends to (its neighbours and
/// itself).
#[derive(Clone, Debug)]
pub struct AttentionSpec {
    pub neighbors: Arc<SparseMatrix>,
    pub heads: usize,
    pub slope: f64,
}

enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    AddBias(usize, usize),
    Relu(usize),
    LeakyRelu(usize, f64),
    Mul(usize, usize),
    ScalarMul {
        x: usize,
        s: usize,
    },
    ConcatCols(Vec<usize>),
    Pool {
        x: usize,
        segments: Arc<Segments>,
        kind: PoolKind,
        argmax: Vec<usize>,
    },
    Dropout {
        x: usize,
        mask: Vec<f64>,
    },
    SoftmaxXent {
        logits: usize,
        labels: Vec<usize>,
        probs: Matrix,
    },
    SumAll(usize),
    Propagate {
        x: usize,
        adj: Arc<SparseMatrix>,
    },
    Attention {
        p: usize,
        a_src: usize,
        a_dst: usize,
        spec: AttentionSpec,
        /// Per (edge, head): pre-activation score and attention weight.
        pre: Vec<f64>,
        alpha: Vec<f64>,
    },
}

struct Node {
    value: Matrix,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Matrix>>,
}

fn shape_error(op: &str, a: &Matrix, b: &Matrix) -> Error {
    Error::contract(format!(
        "{op}: shape mismatch {}x{} vs {}x{}",
        a.rows(),
        a.cols(),
        b.rows(),
        b.cols()
    ))
}

fn add_into(dst: &mut Matrix, src: &Matrix) {
    for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s;
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[usize]) -> bool {
        vars.iter().any(|&v| self.nodes[v].needs_grad)
    }

    /// A trainable input; its gradient is kept after [`Tape::backward`].
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Accumulated gradient of a parameter leaf, if any backward pass reached it.
    pub fn grad(&self, v: Var) -> Option<&Matrix> {
        self.grads[v.0].as_ref()
    }

    pub fn zero_grad(&mut self) {
        for g in &mut self.grads {
            *g = None;
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.cols() != bv.rows() {
            return Err(shape_error("matmul", av, bv));
        }
        let mut out = Matrix::zeros(av.rows(), bv.cols());
        gemm(1.0, av, false, bv, false, 0.0, &mut out);
        let ng = self.needs(&[a.0, b.0]);
        Ok(self.push(out, Op::MatMul(a.0, b.0), ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(shape_error("add", av, bv));
        }
        let mut out = av.clone();
        add_into(&mut out, bv);
        let ng = self.needs(&[a.0, b.0]);
        Ok(self.push(out, Op::Add(a.0, b.0), ng))
    }

    /// `x + 1·b` with `b` a `1 × cols` row broadcast over every row of `x`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        if bv.rows() != 1 || bv.cols() != xv.cols() {
            return Err(shape_error("add_bias_row", xv, bv));
        }
        let mut out = xv.clone();
        for r in 0..out.rows() {
            for (o, b) in out.row_mut(r).iter_mut().zip(bv.data()) {
                *o += b;
            }
        }
        let ng = self.needs(&[x.0, b.0]);
        Ok(self.push(out, Op::AddBias(x.0, b.0), ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = v.max(0.0);
        }
        let ng = self.needs(&[x.0]);
        self.push(out, Op::Relu(x.0), ng)
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = leaky(*v, slope);
        }
        let ng = self.needs(&[x.0]);
        self.push(out, Op::LeakyRelu(x.0, slope), ng)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(shape_error("elementwise_mul", av, bv));
        }
        let mut out = av.clone();
        for (o, b) in out.data_mut().iter_mut().zip(bv.data()) {
            *o *= b;
        }
        let ng = self.needs(&[a.0, b.0]);
        Ok(self.push(out, Op::Mul(a.0, b.0), ng))
    }

    /// `s · x` for a `1 × 1` variable `s`.
    pub fn scalar_mul(&mut self, s: Var, x: Var) -> Result<Var> {
        let (sv, xv) = (self.value(s), self.value(x));
        if sv.shape() != (1, 1) {
            return Err(shape_error("scalar_mul", sv, xv));
        }
        let k = sv.data()[0];
        let mut out = xv.clone();
        for v in out.data_mut() {
            *v *= k;
        }
        let ng = self.needs(&[s.0, x.0]);
        Ok(self.push(out, Op::ScalarMul { x: x.0, s: s.0 }, ng))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(first) = parts.first() else {
            return Err(Error::contract("concat_cols of nothing"));
        };
        let rows = self.value(*first).rows();
        for p in parts {
            if self.value(*p).rows() != rows {
                return Err(shape_error("concat_cols", self.value(*first), self.value(*p)));
            }
        }
        let cols: usize = parts.iter().map(|p| self.value(*p).cols()).sum();
        let mut out = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut c0 = 0;
            let dst = out.row_mut(r);
            for p in parts {
                let src = self.nodes[p.0].value.row(r);
                dst[c0..c0 + src.len()].copy_from_slice(src);
                c0 += src.len();
            }
        }
        let idx: Vec<usize> = parts.iter().map(|p| p.0).collect();
        let ng = self.needs(&idx);
        Ok(self.push(out, Op::ConcatCols(idx), ng))
    }

    /// One output row per segment; max ties go to the lowest row.
    pub fn segment_pool(&mut self, x: Var, segments: Arc<Segments>, kind: PoolKind) -> Result<Var> {
        let xv = self.value(x);
        if segments.total_rows() != xv.rows() {
            return Err(Error::contract(format!(
                "row_segment_pool: segments cover {} rows, input has {}",
                segments.total_rows(),
                xv.rows()
            )));
        }
        let w = xv.cols();
        let mut out = Matrix::zeros(segments.len(), w);
        let mut argmax = Vec::new();
        for s in 0..segments.len() {
            let range = segments.range(s);
            let dst = out.row_mut(s);
            match kind {
                PoolKind::Sum | PoolKind::Mean => {
                    for r in range.clone() {
                        for (d, v) in dst.iter_mut().zip(xv.row(r)) {
                            *d += v;
                        }
                    }
                    if kind == PoolKind::Mean {
                        let k = range.len() as f64;
                        for d in dst.iter_mut() {
                            *d /= k;
                        }
                    }
                }
                PoolKind::Max => {
                    let mut best = vec![range.start; w];
                    dst.copy_from_slice(xv.row(range.start));
                    for r in range.start + 1..range.end {
                        for (c, v) in xv.row(r).iter().enumerate() {
                            if *v > dst[c] {
                                dst[c] = *v;
                                best[c] = r;
                            }
                        }
                    }
                    argmax.extend(best);
                }
            }
        }
        let ng = self.needs(&[x.0]);
        Ok(self.push(
            out,
            Op::Pool {
                x: x.0,
                segments,
                kind,
                argmax,
            },
            ng,
        ))
    }

    /// Inverted dropout: in training mode each entry survives with
    /// probability `1 − p` and is scaled by `1 / (1 − p)`; otherwise identity.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, p: f64, train: bool, rng: &mut R) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::contract(format!("dropout rate {p} outside [0, 1)")));
        }
        if !train || p == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - p);
        let xv = &self.nodes[x.0].value;
        let mask: Vec<f64> = (0..xv.data().len())
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect();
        let mut out = xv.clone();
        for (o, m) in out.data_mut().iter_mut().zip(&mask) {
            *o *= m;
        }
        let ng = self.needs(&[x.0]);
        Ok(self.push(out, Op::Dropout { x: x.0, mask }, ng))
    }

    /// Mean cross-entropy of row-wise softmax against class labels; `1 × 1`.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let lv = self.value(logits);
        if lv.rows() != labels.len() || lv.rows() == 0 {
            return Err(Error::contract(format!(
                "softmax_cross_entropy: {} rows of logits for {} labels",
                lv.rows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= lv.cols()) {
            return Err(Error::contract(format!(
                "softmax_cross_entropy: label {bad} with {} classes",
                lv.cols()
            )));
        }
        let probs = softmax_rows(lv);
        let loss = labels
            .iter()
            .enumerate()
            .map(|(r, &y)| -probs.get(r, y).max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / labels.len() as f64;
        let ng = self.needs(&[logits.0]);
        Ok(self.push(
            Matrix::filled(1, 1, loss),
            Op::SoftmaxXent {
                logits: logits.0,
                labels: labels.to_vec(),
                probs,
            },
            ng,
        ))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let ng = self.needs(&[x.0]);
        self.push(Matrix::filled(1, 1, s), Op::SumAll(x.0), ng)
    }

    /// Sparse left product `adj · x`.
    pub fn propagate(&mut self, adj: Arc<SparseMatrix>, x: Var) -> Result<Var> {
        let xv = self.value(x);
        if adj.cols() != xv.rows() {
            return Err(Error::contract(format!(
                "propagate: {}x{} operator on {}x{} input",
                adj.rows(),
                adj.cols(),
                xv.rows(),
                xv.cols()
            )));
        }
        let out = adj.matmul(xv);
        let ng = self.needs(&[x.0]);
        Ok(self.push(out, Op::Propagate { x: x.0, adj }, ng))
    }

    /// Multi-head attention aggregation over precomputed projections `p`
    /// (`nodes × heads·d`). For head `h`, node `v` and `u` in its
    /// neighbourhood: `e = LeakyReLU(a_src·p_u + a_dst·p_v)`,
    /// `α = softmax_u(e)`, `out_v = Σ α p_u`. Heads are concatenated.
    pub fn graph_attention(&mut self, p: Var, a_src: Var, a_dst: Var, spec: AttentionSpec) -> Result<Var> {
        let pv = self.value(p);
        let (sv, dv) = (self.value(a_src), self.value(a_dst));
        let (n, width) = pv.shape();
        let heads = spec.heads;
        if heads == 0 || width % heads != 0 {
            return Err(Error::contract(format!("attention: width {width} not divisible by {heads} heads")));
        }
        if sv.shape() != (1, width) {
            return Err(shape_error("attention a_src", pv, sv));
        }
        if dv.shape() != (1, width) {
            return Err(shape_error("attention a_dst", pv, dv));
        }
        let nb = &spec.neighbors;
        if nb.rows() != n || nb.cols() != n {
            return Err(Error::contract(format!(
                "attention: {}x{} neighbourhood for {n} nodes",
                nb.rows(),
                nb.cols()
            )));
        }
        let d = width / heads;
        let (src, dst) = head_scores(pv, sv, dv, heads);
        let mut pre = vec![0.0; nb.nnz() * heads];
        let mut alpha = vec![0.0; nb.nnz() * heads];
        let mut out = Matrix::zeros(n, width);
        let idx = nb.indices();
        for v in 0..n {
            let range = nb.row_range(v);
            if range.is_empty() {
                continue;
            }
            for h in 0..heads {
                let mut max = f64::NEG_INFINITY;
                for k in range.clone() {
                    let z = src[idx[k] * heads + h] + dst[v * heads + h];
                    pre[k * heads + h] = z;
                    max = max.max(leaky(z, spec.slope));
                }
                let mut total = 0.0;
                for k in range.clone() {
                    let e = (leaky(pre[k * heads + h], spec.slope) - max).exp();
                    alpha[k * heads + h] = e;
                    total += e;
                }
                let out_row = out.row_mut(v);
                for k in range.clone() {
                    let a = alpha[k * heads + h] / total;
                    alpha[k * heads + h] = a;
                    let pu = &pv.row(idx[k])[h * d..(h + 1) * d];
                    for (o, x) in out_row[h * d..(h + 1) * d].iter_mut().zip(pu) {
                        *o += a * x;
                    }
                }
            }
        }
        let ng = self.needs(&[p.0, a_src.0, a_dst.0]);
        Ok(self.push(
            out,
            Op::Attention {
                p: p.0,
                a_src: a_src.0,
                a_dst: a_dst.0,
                spec,
                pre,
                alpha,
            },
            ng,
        ))
    }

    /// Attention weights of the most recent attention node `out`, as
    /// `(edge index, head) → α` in neighbourhood order.
    pub fn attention_weights(&self, out: Var) -> Option<&[f64]> {
        match &self.nodes[out.0].op {
            Op::Attention { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Accumulates `d loss / d param` into every parameter leaf. Repeated
    /// calls without [`Tape::zero_grad`] add to the stored gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got {}x{}",
                shape.0, shape.1
            )));
        }
        let nodes = &self.nodes;
        let mut g: Vec<Option<Matrix>> = (0..=loss.0).map(|_| None).collect();
        g[loss.0] = Some(Matrix::filled(1, 1, 1.0));

        fn slot<'a>(g: &'a mut [Option<Matrix>], nodes: &[Node], i: usize) -> Option<&'a mut Matrix> {
            if !nodes[i].needs_grad {
                return None;
            }
            let (r, c) = nodes[i].value.shape();
            Some(g[i].get_or_insert_with(|| Matrix::zeros(r, c)))
        }

        for i in (0..=loss.0).rev() {
            let Some(gi) = g[i].take() else { continue };
            let node = &nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Leaf => match &mut self.grads[i] {
                    Some(acc) => add_into(acc, &gi),
                    empty => *empty = Some(gi),
                },
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    if let Some(da) = slot(&mut g, nodes, a) {
                        gemm(1.0, &gi, false, &nodes[b].value, true, 1.0, da);
                    }
                    if let Some(db) = slot(&mut g, nodes, b) {
                        gemm(1.0, &nodes[a].value, true, &gi, false, 1.0, db);
                    }
                }
                Op::Add(a, b) => {
                    for x in [*a, *b] {
                        if let Some(dx) = slot(&mut g, nodes, x) {
                            add_into(dx, &gi);
                        }
                    }
                }
                Op::AddBias(x, b) => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        add_into(dx, &gi);
                    }
                    if let Some(db) = slot(&mut g, nodes, *b) {
                        for r in 0..gi.rows() {
                            for (d, v) in db.data_mut().iter_mut().zip(gi.row(r)) {
                                *d += v;
                            }
                        }
                    }
                }
                Op::Relu(x) => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        for ((d, gv), o) in dx.data_mut().iter_mut().zip(gi.data()).zip(node.value.data()) {
                            if *o > 0.0 {
                                *d += gv;
                            }
                        }
                    }
                }
                Op::LeakyRelu(x, slope) => {
                    let xin = &nodes[*x].value;
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        for ((d, gv), v) in dx.data_mut().iter_mut().zip(gi.data()).zip(xin.data()) {
                            *d += if *v > 0.0 { *gv } else { slope * gv };
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    if let Some(da) = slot(&mut g, nodes, a) {
                        for ((d, gv), bv) in da.data_mut().iter_mut().zip(gi.data()).zip(nodes[b].value.data()) {
                            *d += gv * bv;
                        }
                    }
                    if let Some(db) = slot(&mut g, nodes, b) {
                        for ((d, gv), av) in db.data_mut().iter_mut().zip(gi.data()).zip(nodes[a].value.data()) {
                            *d += gv * av;
                        }
                    }
                }
                Op::ScalarMul { x, s } => {
                    let (x, s) = (*x, *s);
                    let k = nodes[s].value.data()[0];
                    if let Some(dx) = slot(&mut g, nodes, x) {
                        for (d, gv) in dx.data_mut().iter_mut().zip(gi.data()) {
                            *d += k * gv;
                        }
                    }
                    if let Some(ds) = slot(&mut g, nodes, s) {
                        let dot: f64 = gi.data().iter().zip(nodes[x].value.data()).map(|(a, b)| a * b).sum();
                        ds.data_mut()[0] += dot;
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut c0 = 0;
                    for &p in parts {
                        let w = nodes[p].value.cols();
                        if let Some(dp) = slot(&mut g, nodes, p) {
                            for r in 0..gi.rows() {
                                for (d, v) in dp.row_mut(r).iter_mut().zip(&gi.row(r)[c0..c0 + w]) {
                                    *d += v;
                                }
                            }
                        }
                        c0 += w;
                    }
                }
                Op::Pool {
                    x,
                    segments,
                    kind,
                    argmax,
                } => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        let w = gi.cols();
                        for s in 0..segments.len() {
                            let range = segments.range(s);
                            let gs = gi.row(s);
                            match kind {
                                PoolKind::Sum | PoolKind::Mean => {
                                    let k = if *kind == PoolKind::Mean { 1.0 / range.len() as f64 } else { 1.0 };
                                    for r in range {
                                        for (d, v) in dx.row_mut(r).iter_mut().zip(gs) {
                                            *d += k * v;
                                        }
                                    }
                                }
                                PoolKind::Max => {
                                    for (c, v) in gs.iter().enumerate() {
                                        let r = argmax[s * w + c];
                                        let cur = dx.get(r, c);
                                        dx.set(r, c, cur + v);
                                    }
                                }
                            }
                        }
                    }
                }
                Op::Dropout { x, mask } => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        for ((d, gv), m) in dx.data_mut().iter_mut().zip(gi.data()).zip(mask) {
                            *d += gv * m;
                        }
                    }
                }
                Op::SoftmaxXent { logits, labels, probs } => {
                    if let Some(dl) = slot(&mut g, nodes, *logits) {
                        let k = gi.data()[0] / labels.len() as f64;
                        for (r, &y) in labels.iter().enumerate() {
                            let pr = probs.row(r);
                            let dr = dl.row_mut(r);
                            for (c, (d, p)) in dr.iter_mut().zip(pr).enumerate() {
                                let t = if c == y { 1.0 } else { 0.0 };
                                *d += k * (p - t);
                            }
                        }
                    }
                }
                Op::SumAll(x) => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        let k = gi.data()[0];
                        for d in dx.data_mut() {
                            *d += k;
                        }
                    }
                }
                Op::Propagate { x, adj } => {
                    if let Some(dx) = slot(&mut g, nodes, *x) {
                        adj.transpose_matmul_into(&gi, dx);
                    }
                }
                Op::Attention {
                    p,
                    a_src,
                    a_dst,
                    spec,
                    pre,
                    alpha,
                } => {
                    let grads = attention_backward(
                        &gi,
                        &nodes[*p].value,
                        &nodes[*a_src].value,
                        &nodes[*a_dst].value,
                        spec,
                        pre,
                        alpha,
                    );
                    for (var, gr) in [(*p, grads.0), (*a_src, grads.1), (*a_dst, grads.2)] {
                        if let Some(d) = slot(&mut g, nodes, var) {
                            add_into(d, &gr);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Row-wise softmax, shifted by the row max for stability.
pub fn softmax_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// Per node and head: `(a_src·p_u, a_dst·p_u)`, laid out `[node * heads + head]`.
fn head_scores(p: &Matrix, a_src: &Matrix, a_dst: &Matrix, heads: usize) -> (Vec<f64>, Vec<f64>) {
    let (n, width) = p.shape();
    let d = width / heads;
    let mut src = vec![0.0; n * heads];
    let mut dst = vec![0.0; n * heads];
    for u in 0..n {
        let row = p.row(u);
        for h in 0..heads {
            let span = h * d..(h + 1) * d;
            src[u * heads + h] = row[span.clone()].iter().zip(&a_src.data()[span.clone()]).map(|(a, b)| a * b).sum();
            dst[u * heads + h] = row[span.clone()].iter().zip(&a_dst.data()[span]).map(|(a, b)| a * b).sum();
        }
    }
    (src, dst)
}

fn attention_backward(
    gout: &Matrix,
    p: &Matrix,
    a_src: &Matrix,
    a_dst: &Matrix,
    spec: &AttentionSpec,
    pre: &[f64],
    alpha: &[f64],
) -> (Matrix, Matrix, Matrix) {
    let (n, width) = p.shape();
    let heads = spec.heads;
    let d = width / heads;
    let nb = &spec.neighbors;
    let idx = nb.indices();
    let mut dp = Matrix::zeros(n, width);
    let mut ds = vec![0.0; n * heads];
    let mut dt = vec![0.0; n * heads];
    let mut dalpha = Vec::new();
    for v in 0..n {
        let range = nb.row_range(v);
        for h in 0..heads {
            let span = h * d..(h + 1) * d;
            let gv = &gout.row(v)[span.clone()];
            dalpha.clear();
            let mut weighted = 0.0;
            for k in range.clone() {
                let pu = &p.row(idx[k])[span.clone()];
                let da: f64 = gv.iter().zip(pu).map(|(a, b)| a * b).sum();
                weighted += alpha[k * heads + h] * da;
                dalpha.push(da);
            }
            for (j, k) in range.clone().enumerate() {
                let u = idx[k];
                let a = alpha[k * heads + h];
                let dz = a * (dalpha[j] - weighted);
                let de = if pre[k * heads + h] > 0.0 { dz } else { spec.slope * dz };
                ds[u * heads + h] += de;
                dt[v * heads + h] += de;
                for (o, x) in dp.row_mut(u)[span.clone()].iter_mut().zip(gv) {
                    *o += a * x;
                }
            }
        }
    }
    let mut dsrc = Matrix::zeros(1, width);
    let mut ddst = Matrix::zeros(1, width);
    for u in 0..n {
        for h in 0..heads {
            let span = h * d..(h + 1) * d;
            let (s, t) = (ds[u * heads + h], dt[u * heads + h]);
            if s == 0.0 && t == 0.0 {
                continue;
            }
            let pu = &p.row(u)[span.clone()];
            for (j, c) in span.clone().enumerate() {
                dsrc.data_mut()[c] += s * pu[j];
                ddst.data_mut()[c] += t * pu[j];
            }
            let row = dp.row_mut(u);
            for c in span {
                row[c] += s * a_src.data()[c] + t * a_dst.data()[c];
            }
        }
    }
    (dp, dsrc, ddst)
}
