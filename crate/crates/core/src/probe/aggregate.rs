use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// How a node-level layer becomes one feature row per graph. Graph-level
/// layers are always probed on their native vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Descending-norm concatenation, zero-padded to the corpus maximum.
    #[default]
    NormSort,
    /// Column means.
    Mean,
    /// No aggregation: node-level layers are skipped.
    Pooled,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::NormSort => "norm_sort",
            Aggregation::Mean => "mean",
            Aggregation::Pooled => "pooled",
        }
    }

    /// Tag of the feature matrix built from a node-level layer.
    pub fn tag(self) -> &'static str {
        match self {
            Aggregation::NormSort => "norm_sorted",
            Aggregation::Mean => "mean_pooled",
            Aggregation::Pooled => "pooled_native",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "norm_sort" => Ok(Aggregation::NormSort),
            "mean" => Ok(Aggregation::Mean),
            "pooled" => Ok(Aggregation::Pooled),
            other => Err(Error::Config(format!(
                "unknown aggregation `{other}` (expected norm_sort, mean or pooled)"
            ))),
        }
    }
}

/// Column means of a node matrix with at least one row.
pub fn aggregate_mean(nodes: &Matrix) -> Result<Vec<f64>> {
    if nodes.rows() == 0 {
        return Err(Error::contract("mean aggregation needs at least one node"));
    }
    let mut out = vec![0.0; nodes.cols()];
    for r in 0..nodes.rows() {
        for (o, v) in out.iter_mut().zip(nodes.row(r)) {
            *o += v;
        }
    }
    let n = nodes.rows() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// Rows ordered by descending L2 norm (ties broken by descending lexicographic
/// row order), concatenated and zero-padded to `max_nodes · width`.
pub fn aggregate_norm_sort(nodes: &Matrix, max_nodes: usize) -> Result<Vec<f64>> {
    let n = nodes.rows();
    if n > max_nodes {
        return Err(Error::contract(format!(
            "norm-sort aggregation: {n} nodes exceed max_nodes = {max_nodes} by {}",
            n - max_nodes
        )));
    }
    let norms: Vec<f64> = (0..n)
        .map(|r| nodes.row(r).iter().map(|v| v * v).sum::<f64>())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        norms[b]
            .total_cmp(&norms[a])
            .then_with(|| lex_cmp(nodes.row(b), nodes.row(a)))
    });
    let w = nodes.cols();
    let mut out = vec![0.0; max_nodes * w];
    for (slot, &r) in order.iter().enumerate() {
        out[slot * w..(slot + 1) * w].copy_from_slice(nodes.row(r));
    }
    Ok(out)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}
