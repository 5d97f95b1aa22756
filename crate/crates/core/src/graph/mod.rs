//! Undirected simple graphs, the Grid-House generator, isomorphism
//! de-duplication and dataset persistence.

mod dataset;
mod features;
mod generate;
mod iso;
mod wl;

pub use dataset::{load_dataset, save_dataset, Dataset, Split, DATASET_SCHEMA};
pub use features::{build_constant_features, build_features, FeatureKind, FeatureSpec};
pub use generate::{
    attach, generate_ba, generate_grid_house, make_grid3x3, make_house, GridHouseParams, MotifKind,
};
pub use iso::{is_isomorphic, IsoOutcome, DEFAULT_SEARCH_BUDGET};
pub use wl::{wl_colors, wl_hash};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// An undirected simple graph with optional node features and a binary label.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; neighbour lists are
/// sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    pub id: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    features: Option<Matrix>,
    pub label: Option<u8>,
}

impl Graph {
    pub fn new(id: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::contract(format!(
                    "edge ({u}, {v}) has an endpoint outside [0, {n})"
                )));
            }
            if u == v {
                return Err(Error::contract(format!("self-loop on node {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::contract(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_edges(id.into(), n, norm))
    }

    /// Skips validation; `edges` must already be unique, sorted and `u < v`.
    pub(crate) fn from_sorted_edges(id: String, n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Self {
            id,
            n,
            edges,
            adj,
            features: None,
            label: None,
        }
    }

    pub fn empty(id: impl Into<String>, n: usize) -> Self {
        Self::from_sorted_edges(id.into(), n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        Self::from_sorted_edges(format!("K{n}"), n, edges)
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).map(|(u, v)| (u.min(v), u.max(v))).collect();
        edges.sort_unstable();
        edges.dedup();
        Self::from_sorted_edges(format!("C{n}"), n, edges)
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_sorted_edges(format!("P{n}"), n, edges)
    }

    /// Star K_{1,leaves} with the hub at node 0.
    pub fn star(leaves: usize) -> Self {
        let edges = (1..=leaves).map(|i| (0, i)).collect();
        Self::from_sorted_edges(format!("S{leaves}"), leaves + 1, edges)
    }

    pub fn with_label(mut self, label: Option<u8>) -> Self {
        self.label = label;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_features(mut self, features: Matrix) -> Result<Self> {
        if features.rows() != self.n {
            return Err(Error::contract(format!(
                "feature matrix has {} rows for a graph with {} nodes",
                features.rows(),
                self.n
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn features(&self) -> Option<&Matrix> {
        self.features.as_ref()
    }

    pub fn adjacency_matrix(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a.set(u, v, 1.0);
            a.set(v, u, 1.0);
        }
        a
    }

    /// Relabels node `v` as `perm[v]`; feature rows follow their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::contract(format!(
                "permutation of length {} for a graph with {} nodes",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract("not a permutation"));
            }
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        let mut g = Graph::from_sorted_edges(self.id.clone(), self.n, edges);
        g.label = self.label;
        if let Some(f) = &self.features {
            let mut pf = Matrix::zeros(f.rows(), f.cols());
            for v in 0..self.n {
                pf.row_mut(perm[v]).copy_from_slice(f.row(v));
            }
            g.features = Some(pf);
        }
        Ok(g)
    }

    /// Disjoint union; nodes of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + off, v + off)));
        Graph::from_sorted_edges(self.id.clone(), self.n + other.n, edges)
    }

    pub(crate) fn with_extra_edge(&self, u: usize, v: usize) -> Graph {
        let mut edges = self.edges.clone();
        let e = (u.min(v), u.max(v));
        if let Err(pos) = edges.binary_search(&e) {
            edges.insert(pos, e);
        }
        let mut g = Graph::from_sorted_edges(self.id.clone(), self.n, edges);
        g.label = self.label;
        g
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u].min(index[v]), index[u].max(index[v])))
            .collect();
        edges.sort_unstable();
        Graph::from_sorted_edges(self.id.clone(), nodes.len(), edges)
    }

    /// BFS hop distances from `s`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_edges() {
        assert!(Graph::new("g", 3, &[(0, 3)]).is_err());
        assert!(Graph::new("g", 3, &[(1, 1)]).is_err());
        assert!(Graph::new("g", 3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let g = Graph::new("g", 4, &[(2, 0), (1, 3), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert!(g.has_edge(3, 1) && g.has_edge(1, 3));
        let a = g.adjacency_matrix();
        assert_eq!(a.max_abs_asymmetry(), 0.0);
    }

    #[test]
    fn feature_rows_must_match() {
        let g = Graph::path(3);
        assert!(g.clone().with_features(Matrix::zeros(2, 4)).is_err());
        assert!(g.with_features(Matrix::zeros(3, 4)).is_ok());
    }

    #[test]
    fn permutation_moves_features_with_nodes() {
        let f = Matrix::from_vec(3, 1, vec![10.0, 20.0, 30.0]);
        let g = Graph::path(3).with_features(f).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        // old middle node 1 is now node 0
        assert_eq!(p.degree(0), 2);
        assert_eq!(p.features().unwrap().get(0, 0), 20.0);
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn components_of_disjoint_union() {
        let g = Graph::cycle(3).disjoint_union(&Graph::path(2));
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(!g.is_connected());
    }
}
