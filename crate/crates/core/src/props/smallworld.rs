//! Random (degree-preserving rewiring) and ring-lattice reference graphs and
//! the two small-world summaries built on them:
//! `Q = (C / C_r) / (L / L_r)` and
//! `SWI = ((L − L_l) / (L_r − L_l)) · ((C − C_r) / (C_l − C_r))`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::node::local_clustering;
use super::paths::{avg_path_length, largest_component};
use super::PropertyValue;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_SWAPS_PER_EDGE: usize = 10;
pub const DEFAULT_RANDOM_REFERENCES: usize = 10;
pub const SMALL_WORLD_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Rewired {
    pub graph: Graph,
    pub swaps: usize,
    /// Set when the graph had too few swappable edge pairs; `graph` is then
    /// the input unchanged.
    pub degenerate: bool,
}

/// Maslov–Sneppen double-edge swaps: `(a, b), (c, d) → (a, d), (c, b)`,
/// rejecting self-loops and multi-edges. Aims for `swaps_per_edge · m`
/// accepted swaps within a bounded number of attempts.
pub fn random_reference<R: Rng + ?Sized>(g: &Graph, rng: &mut R, swaps_per_edge: usize) -> Rewired {
    let m = g.m();
    if m < 2 {
        return Rewired {
            graph: g.clone(),
            swaps: 0,
            degenerate: true,
        };
    }
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let target = swaps_per_edge * m;
    let max_attempts = 100 * target.max(1);
    let mut swaps = 0;
    let mut attempts = 0;
    while swaps < target && attempts < max_attempts {
        attempts += 1;
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        if a == d || c == b || a == c || b == d {
            continue;
        }
        let e1 = (a.min(d), a.max(d));
        let e2 = (c.min(b), c.max(b));
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        swaps += 1;
    }
    if swaps == 0 {
        return Rewired {
            graph: g.clone(),
            swaps: 0,
            degenerate: true,
        };
    }
    edges.sort_unstable();
    Rewired {
        graph: Graph::from_sorted_edges(g.id.clone(), g.n(), edges),
        swaps,
        degenerate: false,
    }
}

/// Ring lattice with the same node and edge count: edges are taken in order
/// of ring distance (1, 2, ...) and, within a distance, round-robin by node,
/// until `m` edges are placed. When `m` fills whole rings this is the
/// `⌊k/2⌋`-per-side lattice for `k = round(avg degree)` plus extras.
pub fn lattice_reference(g: &Graph) -> Result<Graph> {
    let n = g.n();
    let m = g.m();
    if n < 3 {
        return Err(Error::contract(format!("lattice reference needs n >= 3, got {n}")));
    }
    if m > n * (n - 1) / 2 {
        return Err(Error::contract(format!("{m} edges cannot fit on {n} nodes")));
    }
    let mut edges = Vec::with_capacity(m);
    'fill: for dist in 1..=n / 2 {
        for i in 0..n {
            if edges.len() == m {
                break 'fill;
            }
            if 2 * dist == n && i >= n / 2 {
                // the antipodal ring would repeat every edge
                break;
            }
            let j = (i + dist) % n;
            edges.push((i.min(j), i.max(j)));
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_edges(format!("{}-lattice", g.id), n, edges))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `(C, L)` on the largest component.
fn clustering_and_path(g: &Graph) -> Option<(f64, f64)> {
    let lc = largest_component(g);
    let sub = if lc.len() == g.n() { g.clone() } else { g.induced_subgraph(&lc) };
    let l = avg_path_length(&sub)?;
    Some((mean(&local_clustering(&sub)), l))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallWorld {
    pub coefficient: PropertyValue,
    pub index: PropertyValue,
}

impl SmallWorld {
    fn undefined() -> Self {
        Self {
            coefficient: PropertyValue::undefined(),
            index: PropertyValue::undefined(),
        }
    }
}

/// Small-world coefficient `Q` and index `SWI` with `references` rewired
/// samples (each on its own sub-stream drawn from `rng`) and one lattice.
pub fn small_world<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
    references: usize,
    swaps_per_edge: usize,
) -> SmallWorld {
    if largest_component(g).len() < 4 || references == 0 {
        return SmallWorld::undefined();
    }
    let c = mean(&local_clustering(g));
    let Some(l) = avg_path_length(g) else {
        return SmallWorld::undefined();
    };
    let mut cr = Vec::with_capacity(references);
    let mut lr = Vec::with_capacity(references);
    for _ in 0..references {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
        let r = random_reference(g, &mut sub, swaps_per_edge);
        if let Some((ci, li)) = clustering_and_path(&r.graph) {
            cr.push(ci);
            lr.push(li);
        }
    }
    if cr.is_empty() {
        return SmallWorld::undefined();
    }
    let (c_r, l_r) = (mean(&cr), mean(&lr));
    let Some((c_l, l_l)) = lattice_reference(g).ok().as_ref().and_then(clustering_and_path) else {
        return SmallWorld::undefined();
    };
    let tiny = |x: f64| x.abs() < SMALL_WORLD_EPS;
    let coefficient = if tiny(c_r) || tiny(l_r) || tiny(l) {
        PropertyValue::undefined()
    } else {
        PropertyValue::new((c / c_r) / (l / l_r))
    };
    let index = if tiny(l_r - l_l) || tiny(c_l - c_r) {
        PropertyValue::undefined()
    } else {
        PropertyValue::new(((l - l_l) / (l_r - l_l)) * ((c - c_r) / (c_l - c_r)))
    };
    SmallWorld { coefficient, index }
}
