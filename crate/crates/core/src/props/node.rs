use std::collections::VecDeque;

use crate::graph::Graph;
use crate::linalg::symmetric_eigen;

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-10;
pub const PAGERANK_MAX_ITER: usize = 1000;
pub const EIGENVECTOR_TOLERANCE: f64 = 1e-8;
pub const EIGENVECTOR_MAX_ITER: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalProperty {
    Degree,
    LocalClustering,
    Betweenness,
    Closeness,
    EigenvectorCentrality,
    Pagerank,
}

impl LocalProperty {
    pub const ALL: [LocalProperty; 6] = [
        LocalProperty::Degree,
        LocalProperty::LocalClustering,
        LocalProperty::Betweenness,
        LocalProperty::Closeness,
        LocalProperty::EigenvectorCentrality,
        LocalProperty::Pagerank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LocalProperty::Degree => "degree",
            LocalProperty::LocalClustering => "local_clustering",
            LocalProperty::Betweenness => "betweenness",
            LocalProperty::Closeness => "closeness",
            LocalProperty::EigenvectorCentrality => "eigenvector_centrality",
            LocalProperty::Pagerank => "pagerank",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Per-node values of the six local properties.
#[derive(Clone, Debug, PartialEq)]
pub struct NodePropertyTable {
    pub degree: Vec<f64>,
    pub local_clustering: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub eigenvector_centrality: Vec<f64>,
    pub pagerank: Vec<f64>,
}

impl NodePropertyTable {
    pub fn column(&self, p: LocalProperty) -> &[f64] {
        match p {
            LocalProperty::Degree => &self.degree,
            LocalProperty::LocalClustering => &self.local_clustering,
            LocalProperty::Betweenness => &self.betweenness,
            LocalProperty::Closeness => &self.closeness,
            LocalProperty::EigenvectorCentrality => &self.eigenvector_centrality,
            LocalProperty::Pagerank => &self.pagerank,
        }
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            degree: Vec::with_capacity(n),
            local_clustering: Vec::with_capacity(n),
            betweenness: Vec::with_capacity(n),
            closeness: Vec::with_capacity(n),
            eigenvector_centrality: Vec::with_capacity(n),
            pagerank: Vec::with_capacity(n),
        }
    }

    /// Appends one node's values in [`LocalProperty::ALL`] order.
    pub fn push(&mut self, values: [f64; 6]) {
        self.degree.push(values[0]);
        self.local_clustering.push(values[1]);
        self.betweenness.push(values[2]);
        self.closeness.push(values[3]);
        self.eigenvector_centrality.push(values[4]);
        self.pagerank.push(values[5]);
    }
}

pub fn node_properties(g: &Graph) -> NodePropertyTable {
    NodePropertyTable {
        degree: g.degrees().into_iter().map(|d| d as f64).collect(),
        local_clustering: local_clustering(g),
        betweenness: betweenness(g),
        closeness: closeness(g),
        eigenvector_centrality: eigenvector_centrality(g),
        pagerank: pagerank(g),
    }
}

/// Closed neighbour pairs over possible pairs; 0 below degree 2.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    (0..g.n())
        .map(|v| {
            let nb = g.neighbors(v);
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                links += nb[i + 1..].iter().filter(|&&b| g.has_edge(a, b)).count();
            }
            links as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

/// Brandes betweenness for unweighted undirected graphs, normalised by
/// `2 / ((n − 1)(n − 2))`; all zeros when `n < 3`.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut bc = vec![0.0; n];
    if n < 3 {
        return bc;
    }
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        stack.clear();
        for p in &mut preds {
            p.clear();
        }
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both ends
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    for b in &mut bc {
        *b *= scale;
    }
    bc
}

/// Wasserman–Faust closeness: `(r / (n − 1)) · (r / Σ d(v, u))` over the `r`
/// nodes reachable from `v`.
pub fn closeness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    (0..n)
        .map(|v| {
            let dist = g.bfs_distances(v);
            let (r, total) = dist
                .iter()
                .enumerate()
                .filter(|&(u, &d)| u != v && d != usize::MAX)
                .fold((0usize, 0usize), |(r, t), (_, &d)| (r + 1, t + d));
            if total == 0 || n < 2 {
                0.0
            } else {
                let r = r as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect()
}

/// Power iteration with damping 0.85; isolated nodes spread their mass uniformly.
pub fn pagerank(g: &Graph) -> Vec<f64> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..PAGERANK_MAX_ITER {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - PAGERANK_DAMPING) / nf + PAGERANK_DAMPING * dangling / nf;
        for v in 0..n {
            let inflow: f64 = g
                .neighbors(v)
                .iter()
                .map(|&u| x[u] / g.degree(u) as f64)
                .sum();
            next[v] = base + PAGERANK_DAMPING * inflow;
        }
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < PAGERANK_TOLERANCE {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter().map(|v| v / total).collect()
}

/// Unit-norm, non-negative principal eigenvector of `A`. Power iteration
/// first; bipartite spectra (±λ pairs) make it oscillate, in which case the
/// Jacobi eigenvector of the top eigenvalue is used.
pub fn eigenvector_centrality(g: &Graph) -> Vec<f64> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    if g.m() == 0 {
        return vec![1.0 / (n as f64).sqrt(); n];
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..EIGENVECTOR_MAX_ITER {
        for v in 0..n {
            next[v] = g.neighbors(v).iter().map(|&u| x[u]).sum();
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for a in &mut next {
            *a /= norm;
        }
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change < EIGENVECTOR_TOLERANCE {
            return x;
        }
    }
    match symmetric_eigen(&g.adjacency_matrix()) {
        Ok(e) => {
            let top = n - 1;
            let mut v: Vec<f64> = (0..n).map(|r| e.vectors.get(r, top).abs()).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in &mut v {
                *a /= norm;
            }
            v
        }
        Err(_) => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_betweenness() {
        let b = betweenness(&Graph::path(3));
        assert_eq!(b, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn complete_graph_pagerank_uniform() {
        for n in 2..8 {
            let pr = pagerank(&Graph::complete(n));
            for p in pr {
                assert!((p - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pagerank_sums_to_one_with_isolated_nodes() {
        let g = Graph::path(4).disjoint_union(&Graph::empty("e", 2));
        let s: f64 = pagerank(&g).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_clustering_is_one() {
        assert_eq!(local_clustering(&Graph::complete(3)), vec![1.0; 3]);
        assert_eq!(local_clustering(&Graph::star(3)), vec![0.0; 4]);
    }

    #[test]
    fn closeness_component_scaled() {
        // P3: ends reach 2 nodes at total distance 3, middle at 2
        let c = closeness(&Graph::path(3));
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((c[1] - 1.0).abs() < 1e-15);
        // isolated node contributes zero; components scale down
        let g = Graph::path(2).disjoint_union(&Graph::empty("e", 1));
        let c = closeness(&g);
        assert_eq!(c[2], 0.0);
        assert!((c[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eigenvector_unit_norm_on_bipartite_and_odd_graphs() {
        for g in [Graph::path(5), Graph::star(4), Graph::cycle(5), crate::graph::make_house()] {
            let v = eigenvector_centrality(&g);
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "{}", g.id);
            assert!(v.iter().all(|&a| a >= 0.0));
        }
        // star: hub carries 1/sqrt(2) of the mass
        let v = eigenvector_centrality(&Graph::star(4));
        assert!((v[0] - 0.5f64.sqrt()).abs() < 1e-8);
    }
}
