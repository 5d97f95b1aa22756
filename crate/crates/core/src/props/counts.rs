use crate::graph::Graph;

/// Dense `A²` as integer walk counts: entry `(u, v)` = common neighbours
/// (or degree on the diagonal).
fn adjacency_squared(g: &Graph) -> Vec<u64> {
    let n = g.n();
    let mut a2 = vec![0u64; n * n];
    for w in 0..n {
        let nb = g.neighbors(w);
        for &u in nb {
            let row = &mut a2[u * n..(u + 1) * n];
            for &v in nb {
                row[v] += 1;
            }
        }
    }
    a2
}

/// Triangles via `trace(A³) / 6`.
pub fn count_triangles(g: &Graph) -> u64 {
    let n = g.n();
    let a2 = adjacency_squared(g);
    // trace(A³) = Σ_u Σ_{v ∈ N(u)} (A²)_{vu}
    let trace3: u64 = g
        .edges()
        .iter()
        .map(|&(u, v)| a2[u * n + v] + a2[v * n + u])
        .sum();
    trace3 / 6
}

/// Four-cycles via `(trace(A⁴) − 2m − 2 Σ d(d−1)) / 8`.
pub fn count_squares(g: &Graph) -> u64 {
    let a2 = adjacency_squared(g);
    let trace4: u64 = a2.iter().map(|&x| x * x).sum();
    let m = g.m() as u64;
    let spokes: u64 = g
        .degrees()
        .into_iter()
        .map(|d| (d as u64) * (d as u64).saturating_sub(1))
        .sum();
    (trace4 - 2 * m - 2 * spokes) / 8
}

pub const DEFAULT_CLIQUE_BUDGET: u64 = 1_000_000;

#[derive(Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }
    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }
    #[inline]
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    #[inline]
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn and_not(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn count_and(&self, other: &BitSet) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// Number of maximal cliques (isolated nodes count as size-1 cliques), by
/// Bron–Kerbosch with Tomita pivoting. `None` once `budget` cliques have been
/// seen without finishing.
pub fn count_maximal_cliques(g: &Graph, budget: u64) -> Option<u64> {
    let n = g.n();
    if n == 0 {
        return Some(0);
    }
    let nbrs: Vec<BitSet> = (0..n)
        .map(|v| {
            let mut s = BitSet::empty(n);
            for &u in g.neighbors(v) {
                s.insert(u);
            }
            s
        })
        .collect();
    let mut count = 0u64;
    let ok = bron_kerbosch(&nbrs, BitSet::full(n), BitSet::empty(n), &mut count, budget);
    ok.then_some(count)
}

fn bron_kerbosch(nbrs: &[BitSet], mut p: BitSet, mut x: BitSet, count: &mut u64, budget: u64) -> bool {
    if p.is_empty() {
        if x.is_empty() {
            *count += 1;
            return *count <= budget;
        }
        return true;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.count_and(&nbrs[u]), std::cmp::Reverse(u)))
        .expect("P is non-empty");
    let candidates: Vec<usize> = p.and_not(&nbrs[pivot]).iter().collect();
    for v in candidates {
        if !bron_kerbosch(nbrs, p.and(&nbrs[v]), x.and(&nbrs[v]), count, budget) {
            return false;
        }
        p.remove(v);
        x.insert(v);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_counts() {
        let k4 = Graph::complete(4);
        assert_eq!(count_triangles(&k4), 4);
        assert_eq!(count_squares(&k4), 3);
        assert_eq!(count_maximal_cliques(&k4, DEFAULT_CLIQUE_BUDGET), Some(1));
    }

    #[test]
    fn cycle_counts() {
        let c4 = Graph::cycle(4);
        assert_eq!(count_squares(&c4), 1);
        assert_eq!(count_triangles(&c4), 0);
        assert_eq!(count_maximal_cliques(&c4, DEFAULT_CLIQUE_BUDGET), Some(4));
    }

    #[test]
    fn empty_graph_cliques_are_nodes() {
        assert_eq!(count_maximal_cliques(&Graph::empty("e", 3), DEFAULT_CLIQUE_BUDGET), Some(3));
        assert_eq!(count_maximal_cliques(&Graph::empty("e", 0), DEFAULT_CLIQUE_BUDGET), Some(0));
    }

    #[test]
    fn clique_budget_reports_undefined() {
        assert_eq!(count_maximal_cliques(&Graph::cycle(10), 3), None);
    }

    #[test]
    fn wide_graph_crosses_word_boundary() {
        // 70-node cycle exercises the second bitset word.
        let c = Graph::cycle(70);
        assert_eq!(count_maximal_cliques(&c, DEFAULT_CLIQUE_BUDGET), Some(70));
        assert_eq!(count_squares(&c), 0);
    }
}
