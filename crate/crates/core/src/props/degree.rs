use super::PropertyValue;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeStats {
    pub density: PropertyValue,
    pub avg_degree: PropertyValue,
    pub transitivity: PropertyValue,
    pub assortativity: PropertyValue,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let n = g.n();
    let m = g.m();
    let density = if n >= 2 {
        PropertyValue::new(2.0 * m as f64 / (n * (n - 1)) as f64)
    } else {
        PropertyValue::undefined()
    };
    let avg_degree = if n >= 1 {
        PropertyValue::new(2.0 * m as f64 / n as f64)
    } else {
        PropertyValue::undefined()
    };
    let triads: u64 = g
        .degrees()
        .into_iter()
        .map(|d| (d * d.saturating_sub(1) / 2) as u64)
        .sum();
    let transitivity = if triads > 0 {
        PropertyValue::new(3.0 * super::count_triangles(g) as f64 / triads as f64)
    } else {
        PropertyValue::undefined()
    };
    DegreeStats {
        density,
        avg_degree,
        transitivity,
        assortativity: assortativity(g),
    }
}

/// Pearson correlation of endpoint degrees, each edge counted in both
/// orientations. Sums are exact integers so a zero variance is detected exactly.
pub fn assortativity(g: &Graph) -> PropertyValue {
    let m = g.m() as i128;
    if m == 0 {
        return PropertyValue::undefined();
    }
    let (mut s1, mut s2, mut sxy) = (0i128, 0i128, 0i128);
    for &(u, v) in g.edges() {
        let (a, b) = (g.degree(u) as i128, g.degree(v) as i128);
        s1 += a + b;
        s2 += a * a + b * b;
        sxy += 2 * a * b;
    }
    let pairs = 2 * m;
    let num = sxy * pairs - s1 * s1;
    let den = s2 * pairs - s1 * s1;
    if den == 0 {
        return PropertyValue::undefined();
    }
    PropertyValue::new(num as f64 / den as f64)
}
