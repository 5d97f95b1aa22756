use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{FeatureSpec, Graph};
use crate::linalg::Matrix;
use crate::nn::{Segments, SparseMatrix};

/// `D̃^{−1/2} (A + I) D̃^{−1/2}` as a dense matrix.
pub fn normalize_adjacency(g: &Graph) -> Matrix {
    let n = g.n();
    let mut m = Matrix::zeros(n, n);
    let d: Vec<f64> = (0..n).map(|v| (g.degree(v) + 1) as f64).collect();
    for v in 0..n {
        m.set(v, v, 1.0 / d[v]);
        for &u in g.neighbors(v) {
            m.set(v, u, 1.0 / (d[v] * d[u]).sqrt());
        }
    }
    m
}

/// Several graphs stacked block-diagonally, with one contiguous row segment
/// per graph.
#[derive(Clone, Debug)]
pub struct Batch {
    pub features: Matrix,
    pub segments: Arc<Segments>,
    /// Symmetric-normalised `Â` (GCN).
    pub norm_adj: Arc<SparseMatrix>,
    /// `A` without self-loops (GIN neighbour sum).
    pub adj: Arc<SparseMatrix>,
    /// Each node's neighbours plus itself (GAT).
    pub attention: Arc<SparseMatrix>,
    pub labels: Vec<usize>,
}

impl Batch {
    /// Stacks `graphs` with their feature matrices. Labels default to 0 for
    /// unlabelled graphs.
    pub fn new(graphs: &[&Graph], features: &[&Matrix]) -> Result<Self> {
        if graphs.len() != features.len() || graphs.is_empty() {
            return Err(Error::contract("batch needs one feature matrix per graph, at least one graph"));
        }
        let width = features[0].cols();
        let total: usize = graphs.iter().map(|g| g.n()).sum();
        let mut x = Matrix::zeros(total, width);
        let mut norm_rows = Vec::with_capacity(total);
        let mut adj_rows = Vec::with_capacity(total);
        let mut att_rows = Vec::with_capacity(total);
        let mut offset = 0;
        for (g, f) in graphs.iter().zip(features) {
            if f.rows() != g.n() || f.cols() != width {
                return Err(Error::contract(format!(
                    "graph {}: features {}x{}, expected {}x{width}",
                    g.id,
                    f.rows(),
                    f.cols(),
                    g.n()
                )));
            }
            let d: Vec<f64> = (0..g.n()).map(|v| (g.degree(v) + 1) as f64).collect();
            for v in 0..g.n() {
                x.row_mut(offset + v).copy_from_slice(f.row(v));
                let nb = g.neighbors(v);
                let mut norm = Vec::with_capacity(nb.len() + 1);
                norm.push((offset + v, 1.0 / d[v]));
                norm.extend(nb.iter().map(|&u| (offset + u, 1.0 / (d[v] * d[u]).sqrt())));
                norm_rows.push(norm);
                adj_rows.push(nb.iter().map(|&u| (offset + u, 1.0)).collect());
                let mut att = vec![(offset + v, 1.0)];
                att.extend(nb.iter().map(|&u| (offset + u, 1.0)));
                att_rows.push(att);
            }
            offset += g.n();
        }
        let sizes: Vec<usize> = graphs.iter().map(|g| g.n()).collect();
        Ok(Self {
            features: x,
            segments: Arc::new(Segments::from_sizes(&sizes)?),
            norm_adj: Arc::new(SparseMatrix::from_rows(total, norm_rows)),
            adj: Arc::new(SparseMatrix::from_rows(total, adj_rows)),
            attention: Arc::new(SparseMatrix::from_rows(total, att_rows)),
            labels: graphs.iter().map(|g| g.label.unwrap_or(0) as usize).collect(),
        })
    }

    /// A batch of one graph, building its features with `spec`.
    pub fn single(g: &Graph, spec: &FeatureSpec) -> Result<Self> {
        let f = spec.build(g)?;
        Self::new(&[g], &[&f])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
