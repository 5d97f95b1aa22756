use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::centralization::{centralizations, CentralizationKind};
use super::counts::{count_maximal_cliques, count_squares, count_triangles, DEFAULT_CLIQUE_BUDGET};
use super::degree::degree_stats;
use super::node::{node_properties, NodePropertyTable};
use super::paths::path_metrics;
use super::smallworld::{small_world, DEFAULT_RANDOM_REFERENCES, DEFAULT_SWAPS_PER_EDGE};
use super::spectral::spectral_props;
use super::PropertyValue;
use crate::graph::Graph;

macro_rules! global_properties {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Graph-level properties, in CSV column order.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum GlobalProperty {
            $($variant),*
        }

        impl GlobalProperty {
            pub const ALL: &'static [GlobalProperty] = &[$(GlobalProperty::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(GlobalProperty::$variant => $name),*
                }
            }
        }
    };
}

global_properties! {
    NNodes => "n_nodes",
    NEdges => "n_edges",
    Density => "density",
    AvgPathLength => "avg_path_length",
    Diameter => "diameter",
    Radius => "radius",
    Transitivity => "transitivity",
    Assortativity => "assortativity",
    NCliques => "n_cliques",
    NTriangles => "n_triangles",
    NSquares => "n_squares",
    LargestComponentSize => "largest_component_size",
    AvgDegree => "avg_degree",
    SpectralRadius => "spectral_radius",
    AlgebraicConnectivity => "algebraic_connectivity",
    GraphEnergy => "graph_energy",
    SmallWorldCoefficient => "small_world_coefficient",
    SmallWorldIndex => "small_world_index",
    BetweennessCentralization => "betweenness_centralization",
    PagerankCentralization => "pagerank_centralization",
    AvgBetweennessCentrality => "avg_betweenness_centrality",
    AvgClustering => "avg_clustering",
    ClusteringCoefficient => "clustering_coefficient",
    AdjacencyEnergy => "adjacency_energy",
}

impl GlobalProperty {
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }

    /// Integer-valued counts.
    pub fn is_count(self) -> bool {
        matches!(
            self,
            GlobalProperty::NNodes
                | GlobalProperty::NEdges
                | GlobalProperty::NCliques
                | GlobalProperty::NTriangles
                | GlobalProperty::NSquares
                | GlobalProperty::LargestComponentSize
                | GlobalProperty::Diameter
                | GlobalProperty::Radius
        )
    }

    /// Depends on the random reference graphs, hence on the seed.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            GlobalProperty::SmallWorldCoefficient | GlobalProperty::SmallWorldIndex
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPropertyVector {
    values: Vec<PropertyValue>,
}

impl GraphPropertyVector {
    pub fn get(&self, p: GlobalProperty) -> PropertyValue {
        self.values[p as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (GlobalProperty, PropertyValue)> + '_ {
        GlobalProperty::ALL.iter().map(move |&p| (p, self.values[p as usize]))
    }

    pub fn from_values(values: Vec<PropertyValue>) -> Self {
        assert_eq!(values.len(), GlobalProperty::ALL.len());
        Self { values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropsConfig {
    pub centralization: CentralizationKind,
    pub random_references: usize,
    pub swaps_per_edge: usize,
    pub clique_budget: u64,
}

impl Default for PropsConfig {
    fn default() -> Self {
        Self {
            centralization: CentralizationKind::Freeman,
            random_references: DEFAULT_RANDOM_REFERENCES,
            swaps_per_edge: DEFAULT_SWAPS_PER_EDGE,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }
}

/// Every global property of `g`; stochastic entries draw from `rng`.
pub fn global_properties<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> GraphPropertyVector {
    global_properties_with(g, &PropsConfig::default(), rng).0
}

/// Also returns the node table, which several global entries are built from.
pub fn global_properties_with<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &PropsConfig,
    rng: &mut R,
) -> (GraphPropertyVector, NodePropertyTable) {
    use GlobalProperty as P;
    let mut values = vec![PropertyValue::undefined(); P::ALL.len()];
    let mut set = |p: P, v: PropertyValue| values[p as usize] = v;

    let table = node_properties(g);
    let paths = path_metrics(g);
    let deg = degree_stats(g);
    let spec = spectral_props(g);
    let cent = centralizations(&table, cfg.centralization);
    let sw = small_world(g, rng, cfg.random_references, cfg.swaps_per_edge);

    set(P::NNodes, PropertyValue::new(g.n() as f64));
    set(P::NEdges, PropertyValue::new(g.m() as f64));
    set(P::Density, deg.density);
    set(P::AvgPathLength, paths.avg_path_length);
    set(P::Diameter, paths.diameter);
    set(P::Radius, paths.radius);
    set(P::Transitivity, deg.transitivity);
    set(P::Assortativity, deg.assortativity);
    set(
        P::NCliques,
        count_maximal_cliques(g, cfg.clique_budget)
            .map_or(PropertyValue::undefined(), |c| PropertyValue::new(c as f64)),
    );
    set(P::NTriangles, PropertyValue::new(count_triangles(g) as f64));
    set(P::NSquares, PropertyValue::new(count_squares(g) as f64));
    set(P::LargestComponentSize, paths.largest_component_size);
    set(P::AvgDegree, deg.avg_degree);
    set(P::SpectralRadius, spec.spectral_radius);
    set(P::AlgebraicConnectivity, spec.algebraic_connectivity);
    set(P::GraphEnergy, spec.graph_energy);
    set(P::SmallWorldCoefficient, sw.coefficient);
    set(P::SmallWorldIndex, sw.index);
    set(P::BetweennessCentralization, cent.betweenness_centralization);
    set(P::PagerankCentralization, cent.pagerank_centralization);
    set(P::AvgBetweennessCentrality, cent.avg_betweenness_centrality);
    set(P::AvgClustering, cent.avg_clustering);
    set(P::ClusteringCoefficient, cent.clustering_coefficient);
    set(P::AdjacencyEnergy, spec.adjacency_energy);
    (GraphPropertyVector { values }, table)
}

/// Per-graph stream seed derived from the run seed and the graph id, so a
/// graph's stochastic properties do not depend on its position in the corpus.
pub fn graph_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.rotate_left(17);
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed
}

/// Properties for a whole corpus, in input order.
pub fn corpus_properties(
    graphs: &[Graph],
    cfg: &PropsConfig,
    seed: u64,
) -> Vec<(GraphPropertyVector, NodePropertyTable)> {
    graphs
        .par_iter()
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(graph_seed(seed, &g.id));
            global_properties_with(g, cfg, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_grid3x3, make_house};

    fn props(g: &Graph) -> GraphPropertyVector {
        global_properties(g, &mut ChaCha8Rng::seed_from_u64(0))
    }

    #[test]
    fn names_are_unique_and_resolvable() {
        let mut names: Vec<_> = GlobalProperty::ALL.iter().map(|p| p.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), GlobalProperty::ALL.len());
        for &p in GlobalProperty::ALL {
            assert_eq!(GlobalProperty::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn grid_counts() {
        let p = props(&make_grid3x3());
        assert_eq!(p.get(GlobalProperty::NSquares).value, 4.0);
        assert_eq!(p.get(GlobalProperty::NTriangles).value, 0.0);
        assert_eq!(p.get(GlobalProperty::NEdges).value, 12.0);
    }

    #[test]
    fn single_node_flags_density() {
        let p = props(&Graph::empty("k1", 1));
        assert_eq!(p.get(GlobalProperty::NNodes).value, 1.0);
        assert!(!p.get(GlobalProperty::Density).defined);
        assert!(!p.get(GlobalProperty::SmallWorldIndex).defined);
    }

    #[test]
    fn invariants_hold_on_house() {
        let p = props(&make_house());
        let d = p.get(GlobalProperty::Density).value;
        assert!((0.0..=1.0).contains(&d));
        assert!(p.get(GlobalProperty::Radius).value <= p.get(GlobalProperty::Diameter).value);
        assert!(p.get(GlobalProperty::Diameter).value <= 4.0);
        assert_eq!(p.get(GlobalProperty::GraphEnergy).value.round(), 12.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let g = make_house().disjoint_union(&make_grid3x3()).with_extra_edge(0, 5);
        let a = global_properties(&g, &mut ChaCha8Rng::seed_from_u64(9));
        let b = global_properties(&g, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
