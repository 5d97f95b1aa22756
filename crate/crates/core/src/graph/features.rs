use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Node degree broadcast over every column, scaled by `1 / dim`.
    #[default]
    Degree,
    /// All ones.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSpec {
    pub kind: FeatureKind,
    pub dim: usize,
    /// Use features stored in the dataset when a graph carries them.
    pub prefer_stored: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            kind: FeatureKind::Degree,
            dim: 10,
            prefer_stored: true,
        }
    }
}

impl FeatureSpec {
    pub fn build(&self, g: &Graph) -> Result<Matrix> {
        if self.prefer_stored {
            if let Some(f) = g.features() {
                return Ok(f.clone());
            }
        }
        match self.kind {
            FeatureKind::Degree => build_features(g, self.dim),
            FeatureKind::Constant => build_constant_features(g, self.dim),
        }
    }

    /// Column count `build` produces for graphs of this corpus.
    pub fn width_for(&self, graphs: &[Graph]) -> usize {
        if self.prefer_stored {
            if let Some(f) = graphs.iter().find_map(Graph::features) {
                return f.cols();
            }
        }
        self.dim
    }
}

pub fn build_features(g: &Graph, dim: usize) -> Result<Matrix> {
    if dim == 0 {
        return Err(Error::param("feature dimension must be >= 1"));
    }
    let mut m = Matrix::zeros(g.n(), dim);
    let scale = 1.0 / dim as f64;
    for v in 0..g.n() {
        let x = g.degree(v) as f64 * scale;
        m.row_mut(v).fill(x);
    }
    Ok(m)
}

pub fn build_constant_features(g: &Graph, dim: usize) -> Result<Matrix> {
    if dim == 0 {
        return Err(Error::param("feature dimension must be >= 1"));
    }
    Ok(Matrix::filled(g.n(), dim, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_node_row_is_zero() {
        let f = build_features(&Graph::empty("e", 1), 10).unwrap();
        assert!(f.row(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn k4_rows_are_point_three() {
        let f = build_features(&Graph::complete(4), 10).unwrap();
        for v in 0..4 {
            assert_eq!(f.row(v).len(), 10);
            assert!(f.row(v).iter().all(|&x| (x - 0.3).abs() < 1e-15));
        }
    }

    #[test]
    fn rows_follow_permutation() {
        let g = Graph::star(3);
        let perm = [3, 1, 0, 2];
        let p = g.permuted(&perm).unwrap();
        let f = build_features(&g, 4).unwrap();
        let fp = build_features(&p, 4).unwrap();
        for v in 0..4 {
            assert_eq!(f.row(v), fp.row(perm[v]));
        }
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(build_features(&Graph::path(2), 0).is_err());
    }

    #[test]
    fn stored_features_take_priority() {
        let g = Graph::path(2).with_features(Matrix::filled(2, 3, 7.0)).unwrap();
        let spec = FeatureSpec::default();
        assert_eq!(spec.build(&g).unwrap().get(1, 2), 7.0);
        assert_eq!(spec.width_for(std::slice::from_ref(&g)), 3);
        let fresh = FeatureSpec { prefer_stored: false, ..spec };
        assert_eq!(fresh.build(&g).unwrap().cols(), 10);
    }
}
