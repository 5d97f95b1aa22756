use super::wl::wl_colors;
use super::Graph;

pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    Isomorphic,
    NotIsomorphic,
    /// The search-node budget ran out before a decision.
    Indeterminate,
}

impl IsoOutcome {
    /// Conservative reading used by leakage checks: undecided counts as a match.
    pub fn possibly_isomorphic(self) -> bool {
        !matches!(self, IsoOutcome::NotIsomorphic)
    }
}

/// Colours refined jointly until neither graph's partition gets finer.
fn stable_colors(g1: &Graph, g2: &Graph) -> (Vec<u64>, Vec<u64>) {
    let distinct = |c: &[u64]| {
        let mut v = c.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut it = 0;
    let mut c1 = wl_colors(g1, it);
    let mut c2 = wl_colors(g2, it);
    loop {
        let (d1, d2) = (distinct(&c1), distinct(&c2));
        let n1 = wl_colors(g1, it + 1);
        let n2 = wl_colors(g2, it + 1);
        it += 1;
        let stable = distinct(&n1) == d1 && distinct(&n2) == d2;
        c1 = n1;
        c2 = n2;
        if stable || it > g1.n().max(g2.n()) {
            return (c1, c2);
        }
    }
}

/// Exact isomorphism test by backtracking over colour-compatible candidates.
pub fn is_isomorphic(g1: &Graph, g2: &Graph, budget: u64) -> IsoOutcome {
    if g1.n() != g2.n() || g1.m() != g2.m() {
        return IsoOutcome::NotIsomorphic;
    }
    let n = g1.n();
    if n == 0 {
        return IsoOutcome::Isomorphic;
    }
    let mut d1 = g1.degrees();
    let mut d2 = g2.degrees();
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return IsoOutcome::NotIsomorphic;
    }
    let (c1, c2) = stable_colors(g1, g2);
    let mut h1 = c1.clone();
    let mut h2 = c2.clone();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 {
        return IsoOutcome::NotIsomorphic;
    }

    // Visit g1's nodes so each one (after the first of its component) has an
    // already-mapped neighbour; components start from their rarest colour.
    let class_size = |c: u64| h1.iter().filter(|&&x| x == c).count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| (class_size(c1[v]), v))
            .expect("unplaced node exists");
        placed[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in g1.neighbors(u) {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
        }
    }

    let mut search = Search {
        g1,
        g2,
        c1: &c1,
        c2: &c2,
        order: &order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        budget,
        spent: 0,
    };
    match search.extend(0) {
        Some(true) => IsoOutcome::Isomorphic,
        Some(false) => IsoOutcome::NotIsomorphic,
        None => IsoOutcome::Indeterminate,
    }
}

struct Search<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    c1: &'a [u64],
    c2: &'a [u64],
    order: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
    budget: u64,
    spent: u64,
}

impl Search<'_> {
    /// `None` when the budget is exhausted.
    fn extend(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let v = self.order[depth];
        for u in 0..self.g2.n() {
            if self.used[u] || self.c2[u] != self.c1[v] {
                continue;
            }
            self.spent += 1;
            if self.spent > self.budget {
                return None;
            }
            if !self.consistent(v, u, depth) {
                continue;
            }
            self.map[v] = u;
            self.used[u] = true;
            match self.extend(depth + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.map[v] = usize::MAX;
            self.used[u] = false;
        }
        Some(false)
    }

    fn consistent(&self, v: usize, u: usize, depth: usize) -> bool {
        self.order[..depth].iter().all(|&w| {
            let mw = self.map[w];
            self.g1.has_edge(v, w) == self.g2.has_edge(u, mw)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_grid3x3, make_house};

    #[test]
    fn permuted_graph_is_isomorphic() {
        let g = make_grid3x3();
        let p = g.permuted(&[8, 7, 6, 5, 4, 3, 2, 1, 0]).unwrap();
        assert_eq!(is_isomorphic(&g, &p, DEFAULT_SEARCH_BUDGET), IsoOutcome::Isomorphic);
    }

    #[test]
    fn house_vs_grid() {
        assert_eq!(
            is_isomorphic(&make_house(), &make_grid3x3(), DEFAULT_SEARCH_BUDGET),
            IsoOutcome::NotIsomorphic
        );
    }

    #[test]
    fn c6_vs_two_triangles() {
        let c6 = Graph::cycle(6);
        let two = Graph::cycle(3).disjoint_union(&Graph::cycle(3));
        assert_eq!(is_isomorphic(&c6, &two, DEFAULT_SEARCH_BUDGET), IsoOutcome::NotIsomorphic);
    }

    #[test]
    fn budget_exhaustion_is_indeterminate() {
        // Regular graphs give colour refinement nothing to prune on.
        let c = Graph::cycle(12);
        let two = Graph::cycle(6).disjoint_union(&Graph::cycle(6));
        assert_eq!(is_isomorphic(&c, &two, 3), IsoOutcome::Indeterminate);
        assert!(IsoOutcome::Indeterminate.possibly_isomorphic());
    }
}
