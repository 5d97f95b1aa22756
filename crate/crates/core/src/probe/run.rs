use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_mean, aggregate_norm_sort, Aggregation};
use super::ridge::{fit_ridge_grouped, r2, Standardizer, DEFAULT_FOLDS, DEFAULT_LAMBDAS};
use crate::error::{Error, Result};
use crate::gnn::{EmbeddingSet, LayerEmbeddings, Level};
use crate::graph::Split;
use crate::linalg::Matrix;
use crate::props::{GlobalProperty, LocalProperty, NodePropsTable, PropsTable};

/// Fewer usable training rows than this make a probe degenerate.
pub const MIN_TRAIN_ROWS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Ok,
    /// The target has no variance (or is undefined on every row).
    UndefinedTarget,
    /// Too few usable training rows.
    Degenerate,
}

impl ProbeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeStatus::Ok => "ok",
            ProbeStatus::UndefinedTarget => "undefined_target",
            ProbeStatus::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for ProbeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProbeStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ProbeStatus::Ok, ProbeStatus::UndefinedTarget, ProbeStatus::Degenerate]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown probe status `{s}`")))
    }
}

/// One (layer, property) probe. The R² fields and λ are present exactly when
/// the status is `ok`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub layer: String,
    pub property: String,
    pub r2_train: Option<f64>,
    pub r2_test: Option<f64>,
    pub status: ProbeStatus,
    pub lambda: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub aggregation: Aggregation,
    pub lambdas: Vec<f64>,
    pub folds: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            aggregation: Aggregation::default(),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            folds: DEFAULT_FOLDS,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("probe.lambdas must be a non-empty list of positive values".into()));
        }
        if self.folds < 2 || self.folds > MIN_TRAIN_ROWS {
            return Err(Error::Config(format!(
                "probe.folds must be between 2 and {MIN_TRAIN_ROWS}"
            )));
        }
        Ok(())
    }
}

/// One feature row per probed unit (graph, or node for node-level probes).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeFeatureMatrix {
    pub layer: String,
    /// `pooled_native`, `mean_pooled` or `norm_sorted`.
    pub tag: &'static str,
    pub ids: Vec<String>,
    pub splits: Vec<Split>,
    pub x: Matrix,
}

/// Graph-level features of one layer; `None` for node-level layers under
/// [`Aggregation::Pooled`].
pub fn graph_feature_matrix(
    layer: &LayerEmbeddings,
    aggregation: Aggregation,
    max_nodes: usize,
) -> Result<Option<ProbeFeatureMatrix>> {
    let (tag, width) = match (layer.level, aggregation) {
        (Level::Graph, _) => ("pooled_native", layer.width),
        (Level::Node, Aggregation::Pooled) => return Ok(None),
        (Level::Node, Aggregation::Mean) => (aggregation.tag(), layer.width),
        (Level::Node, Aggregation::NormSort) => (aggregation.tag(), layer.width * max_nodes),
    };
    let mut x = Matrix::zeros(layer.graphs.len(), width);
    for (r, g) in layer.graphs.iter().enumerate() {
        let row = match (layer.level, aggregation) {
            (Level::Graph, _) => g.value.row(0).to_vec(),
            (_, Aggregation::Mean) => aggregate_mean(&g.value)?,
            _ => aggregate_norm_sort(&g.value, max_nodes)
                .map_err(|e| Error::contract(format!("layer {}, graph {}: {e}", layer.name, g.id)))?,
        };
        x.row_mut(r).copy_from_slice(&row);
    }
    if !x.is_finite() {
        return Err(Error::contract(format!("layer {} has non-finite embeddings", layer.name)));
    }
    Ok(Some(ProbeFeatureMatrix {
        layer: layer.name.clone(),
        tag,
        ids: layer.graphs.iter().map(|g| g.id.clone()).collect(),
        splits: layer.graphs.iter().map(|g| g.split).collect(),
        x,
    }))
}

const MAX_LISTED_IDS: usize = 10;

fn list_ids(ids: &[&str]) -> String {
    let mut s = ids.iter().take(MAX_LISTED_IDS).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > MAX_LISTED_IDS {
        s.push_str(&format!(" and {} more", ids.len() - MAX_LISTED_IDS));
    }
    s
}

/// Maps each embedding id to its properties row, failing with the ids missing
/// on either side.
fn align_ids(emb_ids: &[String], prop_ids: &[String]) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = prop_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let emb: HashSet<&str> = emb_ids.iter().map(String::as_str).collect();
    let no_props: Vec<&str> = emb_ids.iter().map(String::as_str).filter(|id| !index.contains_key(id)).collect();
    let no_emb: Vec<&str> = prop_ids.iter().map(String::as_str).filter(|id| !emb.contains(id)).collect();
    if !no_props.is_empty() || !no_emb.is_empty() {
        let mut parts = Vec::new();
        if !no_props.is_empty() {
            parts.push(format!("missing from properties: {}", list_ids(&no_props)));
        }
        if !no_emb.is_empty() {
            parts.push(format!("missing from embeddings: {}", list_ids(&no_emb)));
        }
        return Err(Error::contract(format!("graph ids do not align ({})", parts.join("; "))));
    }
    Ok(emb_ids.iter().map(|id| index[id.as_str()]).collect())
}

fn check_splits(ids: &[String], emb: &[Split], rows: &[usize], props: &[Split]) -> Result<()> {
    match (0..rows.len()).find(|&i| emb[i] != props[rows[i]]) {
        Some(i) => Err(Error::Mismatch(format!(
            "graph {} is {} in the embeddings but {} in the properties",
            ids[i],
            emb[i].as_str(),
            props[rows[i]].as_str()
        ))),
        None => Ok(()),
    }
}

/// A named target column over the feature rows (`None` = undefined).
struct Target {
    name: String,
    values: Vec<Option<f64>>,
}

/// Probes every target against one feature matrix. Targets defined on the
/// same rows share one cross-validated multi-target fit.
fn probe_targets(
    layer: &str,
    x: &Matrix,
    splits: &[Split],
    groups: &[usize],
    targets: &[Target],
    config: &ProbeConfig,
) -> Result<Vec<ProbeResult>> {
    let mut results: Vec<Option<ProbeResult>> = vec![None; targets.len()];
    let mut by_mask: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (k, t) in targets.iter().enumerate() {
        by_mask.entry(t.values.iter().map(Option::is_some).collect()).or_default().push(k);
    }
    for (mask, members) in by_mask {
        let train: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && splits[i] == Split::Train).collect();
        let test: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && splits[i] == Split::Test).collect();
        let blank = |k: usize, status| ProbeResult {
            layer: layer.to_string(),
            property: targets[k].name.clone(),
            r2_train: None,
            r2_test: None,
            status,
            lambda: None,
            n_train: train.len(),
            n_test: test.len(),
        };
        let column = |k: usize, rows: &[usize]| -> Vec<f64> {
            rows.iter().map(|&i| targets[k].values[i].expect("masked rows are defined")).collect()
        };
        if train.len() < MIN_TRAIN_ROWS {
            for &k in &members {
                results[k] = Some(blank(k, ProbeStatus::Degenerate));
            }
            continue;
        }
        let mut fitted = Vec::new();
        for &k in &members {
            let has_variance = |v: &[f64]| v.iter().any(|a| *a != v[0]);
            if has_variance(&column(k, &train)) && has_variance(&column(k, &test)) {
                fitted.push(k);
            } else {
                results[k] = Some(blank(k, ProbeStatus::UndefinedTarget));
            }
        }
        if fitted.is_empty() {
            continue;
        }
        let x_train_raw = x.select_rows(&train);
        let standardizer = Standardizer::fit(&x_train_raw);
        let x_train = standardizer.transform(&x_train_raw)?;
        let x_test = standardizer.transform(&x.select_rows(&test))?;
        let mut y = Matrix::zeros(train.len(), fitted.len());
        for (j, &k) in fitted.iter().enumerate() {
            for (r, v) in column(k, &train).into_iter().enumerate() {
                y.set(r, j, v);
            }
        }
        let fold_groups: Vec<usize> = train.iter().map(|&i| groups[i]).collect();
        let fits = fit_ridge_grouped(&x_train, &y, &fold_groups, &config.lambdas, config.folds)?;
        for (fit, &k) in fits.iter().zip(&fitted) {
            let r2_train = r2(&column(k, &train), &fit.predict(&x_train)?);
            let r2_test = r2(&column(k, &test), &fit.predict(&x_test)?);
            results[k] = Some(ProbeResult {
                r2_train,
                r2_test,
                status: ProbeStatus::Ok,
                lambda: Some(fit.lambda),
                ..blank(k, ProbeStatus::Ok)
            });
        }
    }
    Ok(results.into_iter().map(|r| r.expect("every target was probed")).collect())
}

/// Probes every global property from every layer's graph-level features
/// (node-level layers aggregated per `config.aggregation`). Graphs where a
/// property is undefined are left out of that probe. Results are in
/// (layer, property) order.
pub fn probe_graph_level(
    embeddings: &EmbeddingSet,
    properties: &PropsTable,
    max_nodes: usize,
    config: &ProbeConfig,
) -> Result<Vec<ProbeResult>> {
    config.validate()?;
    let per_layer = embeddings
        .layers
        .par_iter()
        .map(|layer| -> Result<Vec<ProbeResult>> {
            let Some(features) = graph_feature_matrix(layer, config.aggregation, max_nodes)? else {
                return Ok(Vec::new());
            };
            let rows = align_ids(&features.ids, &properties.ids)?;
            check_splits(&features.ids, &features.splits, &rows, &properties.splits)?;
            let targets: Vec<Target> = GlobalProperty::ALL
                .iter()
                .map(|&p| Target {
                    name: p.name().to_string(),
                    values: rows.iter().map(|&r| properties.rows[r].get(p).as_option()).collect(),
                })
                .collect();
            let groups: Vec<usize> = (0..rows.len()).collect();
            probe_targets(&layer.name, &features.x, &features.splits, &groups, &targets, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_layer.into_iter().flatten().collect())
}

/// Probes the local properties from every node-level layer, pooling the
/// nodes of all graphs into one design matrix. Train/test follows each node's
/// graph and cross-validation folds never split a graph.
pub fn probe_node_level(
    embeddings: &EmbeddingSet,
    node_properties: &NodePropsTable,
    config: &ProbeConfig,
) -> Result<Vec<ProbeResult>> {
    config.validate()?;
    let per_layer = embeddings
        .layers
        .par_iter()
        .filter(|l| l.level == Level::Node)
        .map(|layer| -> Result<Vec<ProbeResult>> {
            let ids: Vec<String> = layer.graphs.iter().map(|g| g.id.clone()).collect();
            let rows = align_ids(&ids, &node_properties.ids)?;
            let total: usize = layer.graphs.iter().map(|g| g.value.rows()).sum();
            let mut x = Matrix::zeros(total, layer.width);
            let mut node_splits = Vec::with_capacity(total);
            let mut groups = Vec::with_capacity(total);
            let mut values: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(total); LocalProperty::ALL.len()];
            let mut r = 0;
            for (gi, (g, &pr)) in layer.graphs.iter().zip(&rows).enumerate() {
                let table = &node_properties.tables[pr];
                if table.len() != g.value.rows() {
                    return Err(Error::contract(format!(
                        "graph {}: {} embedded nodes but {} node-property rows",
                        g.id,
                        g.value.rows(),
                        table.len()
                    )));
                }
                for v in 0..g.value.rows() {
                    x.row_mut(r).copy_from_slice(g.value.row(v));
                    node_splits.push(g.split);
                    groups.push(gi);
                    for (k, p) in LocalProperty::ALL.iter().enumerate() {
                        let val = table.column(*p)[v];
                        values[k].push(val.is_finite().then_some(val));
                    }
                    r += 1;
                }
            }
            if !x.is_finite() {
                return Err(Error::contract(format!("layer {} has non-finite embeddings", layer.name)));
            }
            let targets: Vec<Target> = LocalProperty::ALL
                .iter()
                .zip(values)
                .map(|(p, values)| Target {
                    name: p.name().to_string(),
                    values,
                })
                .collect();
            probe_targets(&layer.name, &x, &node_splits, &groups, &targets, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_layer.into_iter().flatten().collect())
}

/// Probes arbitrary named targets (one value per row, `None` = undefined)
/// from a feature matrix; rows are split by `splits` and folds interleave.
pub fn probe_features(
    layer: &str,
    x: &Matrix,
    splits: &[Split],
    targets: &[(String, Vec<Option<f64>>)],
    config: &ProbeConfig,
) -> Result<Vec<ProbeResult>> {
    config.validate()?;
    if splits.len() != x.rows() || targets.iter().any(|(_, v)| v.len() != x.rows()) {
        return Err(Error::contract(format!(
            "features have {} rows; splits and every target need as many",
            x.rows()
        )));
    }
    let targets: Vec<Target> = targets
        .iter()
        .map(|(name, values)| Target {
            name: name.clone(),
            values: values.clone(),
        })
        .collect();
    let groups: Vec<usize> = (0..x.rows()).collect();
    probe_targets(layer, x, splits, &groups, &targets, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::Provenance;
    use crate::gnn::{extract_embeddings, GraphEmbedding, Model, ModelConfig, Arch};
    use crate::graph::{generate_grid_house, FeatureSpec, GridHouseParams};
    use crate::props::{corpus_properties, GraphPropertyVector, PropsConfig, PropertyValue};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn splits(n: usize) -> Vec<Split> {
        (0..n).map(|i| if i % 5 == 4 { Split::Test } else { Split::Train }).collect()
    }

    #[test]
    fn injected_linear_property_is_recovered() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 200;
            let x = Matrix::from_vec(n, 8, (0..n * 8).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let w: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<Option<f64>> = (0..n)
                .map(|r| Some(x.row(r).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 3.0))
                .collect();
            let shuffled: Vec<Option<f64>> = (0..n).map(|_| Some(rng.gen_range(-1.0..1.0))).collect();
            let res = probe_features(
                "x",
                &x,
                &splits(n),
                &[("linear".into(), y), ("noise".into(), shuffled)],
                &ProbeConfig::default(),
            )
            .unwrap();
            assert!(res[0].r2_test.unwrap() >= 0.99);
            assert!(res[1].r2_test.unwrap() <= 0.05);
        }
    }

    #[test]
    fn statuses() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Matrix::from_vec(n, 3, (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let constant = vec![Some(4.0); n];
        let sparse: Vec<Option<f64>> = (0..n).map(|i| (i < 10).then_some(i as f64)).collect();
        let partial: Vec<Option<f64>> = (0..n).map(|i| (i % 3 != 0).then(|| x.get(i, 0))).collect();
        let res = probe_features(
            "x",
            &x,
            &splits(n),
            &[("c".into(), constant), ("s".into(), sparse), ("p".into(), partial)],
            &ProbeConfig::default(),
        )
        .unwrap();
        assert_eq!(res[0].status, ProbeStatus::UndefinedTarget);
        assert_eq!((res[0].r2_test, res[0].lambda), (None, None));
        assert_eq!(res[1].status, ProbeStatus::Degenerate);
        assert!(res[1].n_train < MIN_TRAIN_ROWS);
        assert_eq!(res[2].status, ProbeStatus::Ok);
        // 40 rows, every third undefined → 26 usable; test rows are i % 5 == 4
        assert_eq!(res[2].n_train + res[2].n_test, 26);
        assert!(res[2].r2_test.unwrap() > 0.99);
    }

    fn corpus() -> (EmbeddingSet, PropsTable, usize) {
        let data = generate_grid_house(&GridHouseParams::with_count(60), 2).unwrap();
        let spec = FeatureSpec::default();
        let model = Model::new(
            ModelConfig::defaults(Arch::Gin),
            spec.width_for(&data.graphs),
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let set = extract_embeddings(&model, &spec, &data).unwrap();
        let rows = corpus_properties(&data.graphs, &PropsConfig::default(), 0)
            .into_iter()
            .map(|(r, _)| r)
            .collect();
        let props = PropsTable::from_dataset(Provenance::new("h", 2), &data, rows).unwrap();
        (set, props, data.max_nodes())
    }

    #[test]
    fn graph_level_table_shape_and_order() {
        let (set, props, max_nodes) = corpus();
        for (agg, layers) in [
            (Aggregation::Pooled, vec!["x_global", "x5", "x6"]),
            (Aggregation::Mean, vec!["x1", "x2", "x_global", "x5", "x6"]),
        ] {
            let config = ProbeConfig {
                aggregation: agg,
                ..ProbeConfig::default()
            };
            let res = probe_graph_level(&set, &props, max_nodes, &config).unwrap();
            assert_eq!(res.len(), layers.len() * GlobalProperty::ALL.len());
            for (i, r) in res.iter().enumerate() {
                assert_eq!(r.layer, layers[i / GlobalProperty::ALL.len()]);
                assert_eq!(r.property, GlobalProperty::ALL[i % GlobalProperty::ALL.len()].name());
                assert_eq!(r.status == ProbeStatus::Ok, r.r2_test.is_some());
                if let Some(v) = r.r2_test {
                    assert!(v <= 1.0);
                }
            }
        }
        // norm-sort on node layers: n_nodes is read off the padding pattern
        let res = probe_graph_level(&set, &props, max_nodes, &ProbeConfig::default()).unwrap();
        let n_nodes = res.iter().find(|r| r.layer == "x1" && r.property == "n_nodes").unwrap();
        assert!(n_nodes.r2_test.unwrap() > 0.9, "{n_nodes:?}");
    }

    #[test]
    fn misaligned_ids_are_listed() {
        let (mut set, props, max_nodes) = corpus();
        for l in &mut set.layers {
            l.graphs.push(GraphEmbedding {
                id: "stray".into(),
                split: Split::Train,
                value: l.graphs[0].value.clone(),
            });
        }
        let err = probe_graph_level(&set, &props, max_nodes, &ProbeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(err.to_string().contains("stray"), "{err}");
    }

    #[test]
    fn undefined_graphs_are_dropped_per_property() {
        let (set, mut props, max_nodes) = corpus();
        let p = GlobalProperty::ALL[3];
        for r in props.rows.iter_mut().take(5) {
            let mut values: Vec<PropertyValue> = r.iter().map(|(_, v)| v).collect();
            values[3] = PropertyValue::undefined();
            *r = GraphPropertyVector::from_values(values);
        }
        let config = ProbeConfig {
            aggregation: Aggregation::Pooled,
            ..ProbeConfig::default()
        };
        let res = probe_graph_level(&set, &props, max_nodes, &config).unwrap();
        let dropped = res.iter().find(|r| r.property == p.name()).unwrap();
        let full = res.iter().find(|r| r.property == "n_nodes").unwrap();
        assert_eq!(dropped.n_train + dropped.n_test + 5, full.n_train + full.n_test);
    }
}
