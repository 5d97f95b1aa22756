//! Brute-force oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use graphprobe::graph::Graph;
use rand::Rng;

/// Erdős–Rényi graph with `n` nodes and edge probability `p`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::new("random", n, &edges).unwrap()
}

pub fn triangles_by_enumeration(g: &Graph) -> u64 {
    let n = g.n();
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                count += u64::from(g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c));
            }
        }
    }
    count
}

/// Every 4-node subset carries at most three distinct 4-cycles:
/// a-b-c-d, a-b-d-c and a-c-b-d.
pub fn squares_by_enumeration(g: &Graph) -> u64 {
    let n = g.n();
    let cyc = |w: usize, x: usize, y: usize, z: usize| {
        g.has_edge(w, x) && g.has_edge(x, y) && g.has_edge(y, z) && g.has_edge(z, w)
    };
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    count += u64::from(cyc(a, b, c, d)) + u64::from(cyc(a, b, d, c)) + u64::from(cyc(a, c, b, d));
                }
            }
        }
    }
    count
}

/// Maximal cliques (isolated nodes included) by checking every node subset.
pub fn maximal_cliques_by_enumeration(g: &Graph) -> u64 {
    let n = g.n();
    assert!(n <= 16, "subset enumeration is exponential");
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let is_clique = |s: u32| (0..n).filter(|&v| s >> v & 1 == 1).all(|v| s & !(1 << v) & !nbr[v] == 0);
    let mut count = 0;
    for s in 1u32..(1 << n) {
        if !is_clique(s) {
            continue;
        }
        let extendable = (0..n).any(|v| s >> v & 1 == 0 && s & !nbr[v] == 0);
        count += u64::from(!extendable);
    }
    count
}

/// Betweenness from an explicit list of every shortest path between every
/// pair, normalised by `2 / ((n − 1)(n − 2))`.
pub fn betweenness_by_enumeration(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut bc = vec![0.0; n];
    if n < 3 {
        return bc;
    }
    let dist: Vec<Vec<usize>> = (0..n).map(|s| g.bfs_distances(s)).collect();
    for s in 0..n {
        for t in s + 1..n {
            if dist[s][t] == usize::MAX {
                continue;
            }
            let mut paths = Vec::new();
            let mut path = vec![s];
            collect_paths(g, &dist, t, &mut path, &mut paths);
            let total = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    let scale = 2.0 / ((n - 1) * (n - 2)) as f64;
    bc.iter_mut().for_each(|b| *b *= scale);
    bc
}

fn collect_paths(g: &Graph, dist: &[Vec<usize>], t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let v = *path.last().unwrap();
    if v == t {
        out.push(path.clone());
        return;
    }
    for &w in g.neighbors(v) {
        if dist[w][t] != usize::MAX && dist[w][t] + 1 == dist[v][t] {
            path.push(w);
            collect_paths(g, dist, t, path, out);
            path.pop();
        }
    }
}
