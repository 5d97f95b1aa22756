use super::PropertyValue;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathMetrics {
    pub avg_path_length: PropertyValue,
    pub diameter: PropertyValue,
    pub radius: PropertyValue,
    pub largest_component_size: PropertyValue,
}

/// Nodes of the largest connected component (first by smallest member on ties).
pub fn largest_component(g: &Graph) -> Vec<usize> {
    g.components()
        .into_iter()
        .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best })
}

/// Mean hop distance over ordered pairs that are connected; `None` when no
/// such pair exists.
pub fn avg_path_length(g: &Graph) -> Option<f64> {
    let mut total = 0usize;
    let mut pairs = 0usize;
    for s in 0..g.n() {
        for (t, d) in g.bfs_distances(s).into_iter().enumerate() {
            if t != s && d != usize::MAX {
                total += d;
                pairs += 1;
            }
        }
    }
    (pairs > 0).then(|| total as f64 / pairs as f64)
}

/// BFS from every node. The average runs over connected ordered pairs;
/// diameter and radius are eccentricity extremes inside the largest component.
pub fn path_metrics(g: &Graph) -> PathMetrics {
    if g.n() == 0 {
        return PathMetrics {
            avg_path_length: PropertyValue::undefined(),
            diameter: PropertyValue::undefined(),
            radius: PropertyValue::undefined(),
            largest_component_size: PropertyValue::new(0.0),
        };
    }
    let lc = largest_component(g);
    let mut in_lc = vec![false; g.n()];
    for &v in &lc {
        in_lc[v] = true;
    }
    let mut total = 0usize;
    let mut pairs = 0usize;
    let mut diameter = 0usize;
    let mut radius = usize::MAX;
    for s in 0..g.n() {
        let dist = g.bfs_distances(s);
        let mut ecc = 0usize;
        for (t, &d) in dist.iter().enumerate() {
            if t != s && d != usize::MAX {
                total += d;
                pairs += 1;
                ecc = ecc.max(d);
            }
        }
        if in_lc[s] {
            diameter = diameter.max(ecc);
            radius = radius.min(ecc);
        }
    }
    PathMetrics {
        avg_path_length: if pairs > 0 {
            PropertyValue::new(total as f64 / pairs as f64)
        } else {
            PropertyValue::undefined()
        },
        diameter: PropertyValue::new(diameter as f64),
        radius: PropertyValue::new(radius as f64),
        largest_component_size: PropertyValue::new(lc.len() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_three() {
        let p = path_metrics(&Graph::path(3));
        assert!((p.avg_path_length.value - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.diameter.value, 2.0);
        assert_eq!(p.radius.value, 1.0);
        assert_eq!(p.largest_component_size.value, 3.0);
    }

    #[test]
    fn complete_graph_average_is_one() {
        for n in 2..7 {
            assert_eq!(path_metrics(&Graph::complete(n)).avg_path_length.value, 1.0);
        }
    }

    #[test]
    fn six_cycle_is_self_centred() {
        let p = path_metrics(&Graph::cycle(6));
        assert_eq!((p.diameter.value, p.radius.value), (3.0, 3.0));
    }

    #[test]
    fn single_node() {
        let p = path_metrics(&Graph::empty("k1", 1));
        assert!(!p.avg_path_length.defined);
        assert_eq!((p.diameter, p.radius), (PropertyValue::new(0.0), PropertyValue::new(0.0)));
        assert_eq!(p.largest_component_size.value, 1.0);
    }

    #[test]
    fn disconnected_uses_largest_component() {
        let g = Graph::path(2).disjoint_union(&Graph::path(4));
        let p = path_metrics(&g);
        assert_eq!(p.largest_component_size.value, 4.0);
        assert_eq!((p.diameter.value, p.radius.value), (3.0, 2.0));
        // P2 contributes 2 ordered pairs at distance 1; P4 contributes 12 pairs summing to 20
        assert!((p.avg_path_length.value - 22.0 / 14.0).abs() < 1e-15);
    }
}
