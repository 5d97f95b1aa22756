use super::PropertyValue;
use crate::error::Result;
use crate::graph::Graph;
use crate::linalg::{symmetric_eigen, Matrix};

/// Full spectrum of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    symmetric_eigen(m).map(|e| e.values)
}

/// Combinatorial Laplacian `D − A`.
pub fn laplacian(g: &Graph) -> Matrix {
    let mut l = g.adjacency_matrix();
    for v in l.data_mut() {
        *v = -*v;
    }
    for v in 0..g.n() {
        l.set(v, v, g.degree(v) as f64);
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralProps {
    pub spectral_radius: PropertyValue,
    pub algebraic_connectivity: PropertyValue,
    /// Σ|λ(L)|, which equals `trace(L) = 2m` because `L` is positive semidefinite.
    pub graph_energy: PropertyValue,
    /// Σ|λ(A)|, the usual adjacency energy.
    pub adjacency_energy: PropertyValue,
}

pub fn spectral_props(g: &Graph) -> SpectralProps {
    let n = g.n();
    if n == 0 {
        let u = PropertyValue::undefined();
        return SpectralProps {
            spectral_radius: u,
            algebraic_connectivity: u,
            graph_energy: u,
            adjacency_energy: u,
        };
    }
    let adj = symmetric_eigenvalues(&g.adjacency_matrix()).ok();
    let lap = symmetric_eigenvalues(&laplacian(g)).ok();
    let algebraic_connectivity = match &lap {
        _ if n < 2 => PropertyValue::undefined(),
        // zero has multiplicity = number of components
        _ if !g.is_connected() => PropertyValue::new(0.0),
        Some(l) => PropertyValue::new(l[1].max(0.0)),
        None => PropertyValue::undefined(),
    };
    SpectralProps {
        spectral_radius: adj
            .as_ref()
            .map_or(PropertyValue::undefined(), |a| PropertyValue::new(a[n - 1])),
        algebraic_connectivity,
        graph_energy: lap.as_ref().map_or(PropertyValue::undefined(), |l| {
            PropertyValue::new(l.iter().map(|x| x.abs()).sum())
        }),
        adjacency_energy: adj.as_ref().map_or(PropertyValue::undefined(), |a| {
            PropertyValue::new(a.iter().map(|x| x.abs()).sum())
        }),
    }
}
