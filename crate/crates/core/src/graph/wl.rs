//! 1-WL colour refinement. Colours are 64-bit digests of (own colour, sorted
//! neighbour colours), so the same signature maps to the same colour in every
//! graph and colours can be compared across graphs.

use super::Graph;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
fn mix(mut h: u64, word: u64) -> u64 {
    for b in word.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn digest(words: impl IntoIterator<Item = u64>) -> u64 {
    words.into_iter().fold(FNV_OFFSET, mix)
}

/// Node colours after `iterations` refinement rounds, starting from degree.
pub fn wl_colors(g: &Graph, iterations: usize) -> Vec<u64> {
    let mut colors: Vec<u64> = (0..g.n()).map(|v| digest([g.degree(v) as u64])).collect();
    let mut nb = Vec::new();
    for _ in 0..iterations {
        colors = (0..g.n())
            .map(|v| {
                nb.clear();
                nb.extend(g.neighbors(v).iter().map(|&u| colors[u]));
                nb.sort_unstable();
                digest(std::iter::once(colors[v]).chain(nb.iter().copied()))
            })
            .collect();
    }
    colors
}

/// Weisfeiler-Lehman graph hash: equal for isomorphic graphs, invariant under
/// relabelling. Every iteration's colour histogram contributes.
pub fn wl_hash(g: &Graph, iterations: usize) -> u64 {
    let iterations = iterations.max(1);
    let mut words = vec![g.n() as u64, g.m() as u64];
    let mut colors: Vec<u64> = (0..g.n()).map(|v| digest([g.degree(v) as u64])).collect();
    let mut hist = colors.clone();
    hist.sort_unstable();
    words.extend(&hist);
    let mut nb = Vec::new();
    for _ in 0..iterations {
        colors = (0..g.n())
            .map(|v| {
                nb.clear();
                nb.extend(g.neighbors(v).iter().map(|&u| colors[u]));
                nb.sort_unstable();
                digest(std::iter::once(colors[v]).chain(nb.iter().copied()))
            })
            .collect();
        hist.clone_from(&colors);
        hist.sort_unstable();
        words.extend(&hist);
    }
    digest(words)
}
