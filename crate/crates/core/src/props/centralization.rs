use serde::{Deserialize, Serialize};

use super::node::NodePropertyTable;
use super::PropertyValue;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralizationKind {
    /// `Σ (c_max − c_v) / ((n − 1) · c_max)`.
    #[default]
    Freeman,
    /// Population standard deviation of the node values.
    StdDev,
}

pub fn centralization(values: &[f64], kind: CentralizationKind) -> PropertyValue {
    let n = values.len();
    if n < 2 {
        return PropertyValue::undefined();
    }
    match kind {
        CentralizationKind::Freeman => {
            let c_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if c_max <= 0.0 {
                return PropertyValue {
                    value: 0.0,
                    defined: false,
                };
            }
            let spread: f64 = values.iter().map(|&c| c_max - c).sum();
            PropertyValue::new(spread / ((n - 1) as f64 * c_max))
        }
        CentralizationKind::StdDev => {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n as f64;
            PropertyValue::new(var.sqrt())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Centralizations {
    pub betweenness_centralization: PropertyValue,
    pub pagerank_centralization: PropertyValue,
    pub avg_betweenness_centrality: PropertyValue,
    pub avg_clustering: PropertyValue,
    /// Mean local clustering over nodes of degree >= 2 only.
    pub clustering_coefficient: PropertyValue,
}

fn mean(xs: &[f64]) -> PropertyValue {
    if xs.is_empty() {
        PropertyValue::undefined()
    } else {
        PropertyValue::new(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

pub fn centralizations(table: &NodePropertyTable, kind: CentralizationKind) -> Centralizations {
    let eligible: Vec<f64> = table
        .local_clustering
        .iter()
        .zip(&table.degree)
        .filter(|(_, &d)| d >= 2.0)
        .map(|(&c, _)| c)
        .collect();
    Centralizations {
        betweenness_centralization: centralization(&table.betweenness, kind),
        pagerank_centralization: centralization(&table.pagerank, kind),
        avg_betweenness_centrality: mean(&table.betweenness),
        avg_clustering: mean(&table.local_clustering),
        clustering_coefficient: mean(&eligible),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::props::node_properties;

    #[test]
    fn star_betweenness_centralization_is_one() {
        for leaves in 2..8 {
            let t = node_properties(&Graph::star(leaves));
            let c = centralizations(&t, CentralizationKind::Freeman);
            // direct formula: hub = 1, leaves = 0
            let n = (leaves + 1) as f64;
            let direct = (leaves as f64 * 1.0) / ((n - 1.0) * 1.0);
            assert!((c.betweenness_centralization.value - direct).abs() < 1e-12);
            assert!((c.betweenness_centralization.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_graph_hits_the_zero_max_guard() {
        let t = node_properties(&Graph::complete(5));
        let c = centralizations(&t, CentralizationKind::Freeman);
        assert!(!c.betweenness_centralization.defined);
        assert_eq!(c.betweenness_centralization.value, 0.0);
        assert!(c.pagerank_centralization.value.abs() < 1e-12);
    }

    #[test]
    fn vertex_transitive_graphs_have_no_spread() {
        let t = node_properties(&Graph::cycle(8));
        let c = centralizations(&t, CentralizationKind::Freeman);
        assert!(c.betweenness_centralization.value.abs() < 1e-12);
        assert!(c.pagerank_centralization.value.abs() < 1e-12);
        let s = centralizations(&t, CentralizationKind::StdDev);
        assert!(s.betweenness_centralization.value.abs() < 1e-12);
    }

    #[test]
    fn clustering_averages_differ_on_pendant_nodes() {
        // triangle with a pendant: nodes of degree 1 pull avg_clustering down
        let g = Graph::new("t", 4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let c = centralizations(&node_properties(&g), CentralizationKind::Freeman);
        assert!((c.avg_clustering.value - (1.0 + 1.0 + 1.0 / 3.0) / 4.0).abs() < 1e-12);
        assert!((c.clustering_coefficient.value - (1.0 + 1.0 + 1.0 / 3.0) / 3.0).abs() < 1e-12);
    }
}
