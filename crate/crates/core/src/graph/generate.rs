use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Split};
use super::iso::{is_isomorphic, DEFAULT_SEARCH_BUDGET};
use super::wl::wl_hash;
use super::Graph;
use crate::error::{Error, Result};

/// Barabási-Albert preferential attachment. Starts from a star on `m + 1`
/// nodes; every later node links to `m` distinct targets drawn with
/// probability proportional to degree. With `m = 1` the result is a tree.
pub fn generate_ba<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m < 1 {
        return Err(Error::param(format!("BA attachment degree m must be >= 1, got {m}")));
    }
    if n < 2.max(m + 1) {
        return Err(Error::param(format!(
            "BA graph needs n >= max(2, m + 1) = {}, got n = {n}",
            2.max(m + 1)
        )));
    }
    let mut edges = Vec::with_capacity((n - m) * m);
    // endpoint multiset: node v appears deg(v) times
    let mut repeated = Vec::with_capacity(2 * n * m);
    for leaf in 1..=m {
        edges.push((0, leaf));
        repeated.push(0);
        repeated.push(leaf);
    }
    let mut targets = Vec::with_capacity(m);
    for new in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = repeated[rng.gen_range(0..repeated.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            repeated.push(t);
            repeated.push(new);
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_edges(format!("ba-{n}-{m}"), n, edges))
}

/// Five-node house: square 0-1-2-3 with roof apex 4 on edge (0, 1).
pub fn make_house() -> Graph {
    Graph::new("house", 5, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 0), (4, 1)])
        .expect("static house edges are valid")
}

/// 3x3 grid, node `3 * row + col`.
pub fn make_grid3x3() -> Graph {
    let mut edges = Vec::with_capacity(12);
    for r in 0..3 {
        for c in 0..3 {
            let v = 3 * r + c;
            if c < 2 {
                edges.push((v, v + 1));
            }
            if r < 2 {
                edges.push((v, v + 3));
            }
        }
    }
    Graph::new("grid3x3", 9, &edges).expect("static grid edges are valid")
}

/// Disjoint union plus one bridge between a uniform node of `base` and a
/// uniform node of `motif`.
pub fn attach<R: Rng + ?Sized>(base: &Graph, motif: &Graph, rng: &mut R) -> Result<Graph> {
    attach_within(base, base.n(), motif, rng)
}

/// Like [`attach`] but the base endpoint is drawn from nodes `0..base_pool`.
fn attach_within<R: Rng + ?Sized>(
    base: &Graph,
    base_pool: usize,
    motif: &Graph,
    rng: &mut R,
) -> Result<Graph> {
    if base.n() == 0 || motif.n() == 0 {
        return Err(Error::param("attach needs two non-empty graphs"));
    }
    let b = rng.gen_range(0..base_pool.min(base.n()));
    let t = base.n() + rng.gen_range(0..motif.n());
    Ok(base.disjoint_union(motif).with_extra_edge(b, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifKind {
    Grid,
    House,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridHouseParams {
    pub count: usize,
    /// Inclusive BA base-size range for BA + grid graphs.
    pub grid_base: (usize, usize),
    pub house_base: (usize, usize),
    pub both_base: (usize, usize),
    pub min_base: usize,
    pub ba_m: usize,
    pub train_fraction: f64,
    pub wl_iterations: usize,
    pub max_attempts_per_graph: usize,
}

impl Default for GridHouseParams {
    fn default() -> Self {
        Self {
            count: 2000,
            grid_base: (6, 21),
            house_base: (7, 22),
            both_base: (1, 16),
            min_base: 2,
            ba_m: 1,
            train_fraction: 0.8,
            wl_iterations: 3,
            max_attempts_per_graph: 1000,
        }
    }
}

impl GridHouseParams {
    pub fn with_count(count: usize) -> Self {
        Self {
            count,
            ..Self::default()
        }
    }

    fn base_range(&self, kind: MotifKind) -> (usize, usize) {
        match kind {
            MotifKind::Grid => self.grid_base,
            MotifKind::House => self.house_base,
            MotifKind::Both => self.both_base,
        }
    }
}

fn sample_grid_house<R: Rng + ?Sized>(
    params: &GridHouseParams,
    kind: MotifKind,
    rng: &mut R,
) -> Result<Graph> {
    let (lo, hi) = params.base_range(kind);
    let size = rng.gen_range(lo..=hi).max(params.min_base).max(params.ba_m + 1);
    let ba = generate_ba(size, params.ba_m, rng)?;
    let g = match kind {
        MotifKind::Grid => attach_within(&ba, size, &make_grid3x3(), rng)?,
        MotifKind::House => attach_within(&ba, size, &make_house(), rng)?,
        MotifKind::Both => {
            let with_grid = attach_within(&ba, size, &make_grid3x3(), rng)?;
            // the house also hangs off the BA part, not off the grid
            attach_within(&with_grid, size, &make_house(), rng)?
        }
    };
    Ok(g)
}

/// Builds the Grid-House corpus: class 1 = BA + grid + house, class 0 = BA +
/// exactly one motif (grid and house alternate). No two graphs in the result
/// are isomorphic, so the train/test split cannot leak.
pub fn generate_grid_house(params: &GridHouseParams, seed: u64) -> Result<Dataset> {
    if params.count < 2 {
        return Err(Error::param(format!(
            "Grid-House needs count >= 2, got {}",
            params.count
        )));
    }
    if !(0.0..=1.0).contains(&params.train_fraction) {
        return Err(Error::param("train_fraction must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs: Vec<Graph> = Vec::with_capacity(params.count);
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut class0_seen = 0usize;
    for i in 0..params.count {
        let label = (i % 2) as u8;
        let kind = if label == 1 {
            MotifKind::Both
        } else {
            class0_seen += 1;
            if class0_seen % 2 == 1 {
                MotifKind::Grid
            } else {
                MotifKind::House
            }
        };
        let mut accepted = None;
        for _ in 0..params.max_attempts_per_graph {
            let g = sample_grid_house(params, kind, &mut rng)?;
            let h = wl_hash(&g, params.wl_iterations);
            let bucket = buckets.entry(h).or_default();
            let duplicate = bucket.iter().any(|&j| {
                is_isomorphic(&graphs[j], &g, DEFAULT_SEARCH_BUDGET).possibly_isomorphic()
            });
            if !duplicate {
                bucket.push(graphs.len());
                accepted = Some(g);
                break;
            }
        }
        let Some(g) = accepted else {
            return Err(Error::Generation {
                achieved: graphs.len(),
                requested: params.count,
                reason: format!(
                    "no new non-isomorphic {kind:?} graph after {} attempts",
                    params.max_attempts_per_graph
                ),
            });
        };
        graphs.push(g.with_id(format!("gh-{i:05}")).with_label(Some(label)));
    }

    let mut order: Vec<usize> = (0..graphs.len()).collect();
    order.shuffle(&mut rng);
    let n_train = (params.train_fraction * graphs.len() as f64).round() as usize;
    let mut split = vec![Split::Test; graphs.len()];
    for &i in &order[..n_train] {
        split[i] = Split::Train;
    }

    let mut meta = serde_json::Map::new();
    meta.insert("generator".into(), "grid_house".into());
    meta.insert("params".into(), serde_json::to_value(params)?);
    Dataset::new(graphs, split, seed, meta)
}
