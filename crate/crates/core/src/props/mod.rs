//! Local (per-node) and global graph properties used as probing targets.

mod centralization;
mod counts;
mod degree;
mod global;
mod io;
mod node;
mod paths;
mod smallworld;
mod spectral;

pub use centralization::{centralization, centralizations, CentralizationKind, Centralizations};
pub use counts::{count_maximal_cliques, count_squares, count_triangles, DEFAULT_CLIQUE_BUDGET};
pub use degree::{assortativity, degree_stats, DegreeStats};
pub use global::{
    corpus_properties, global_properties, global_properties_with, graph_seed, GlobalProperty,
    GraphPropertyVector, PropsConfig,
};
pub use io::{read_node_props_csv, read_props_csv, write_node_props_csv, write_props_csv, NodePropsTable, PropsTable};
pub use node::{
    betweenness, closeness, eigenvector_centrality, local_clustering, node_properties, pagerank,
    LocalProperty, NodePropertyTable,
};
pub use paths::{avg_path_length, largest_component, path_metrics, PathMetrics};
pub use smallworld::{lattice_reference, random_reference, small_world, Rewired, SmallWorld};
pub use spectral::{laplacian, spectral_props, symmetric_eigenvalues, SpectralProps};

/// A property value with a flag that is false exactly when the quantity is
/// mathematically undefined for the graph (the value is then meaningless).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertyValue {
    pub value: f64,
    pub defined: bool,
}

impl PropertyValue {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            defined: value.is_finite(),
        }
    }

    pub fn undefined() -> Self {
        Self {
            value: 0.0,
            defined: false,
        }
    }

    pub fn as_option(self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}
