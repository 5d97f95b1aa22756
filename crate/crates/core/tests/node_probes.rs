use graphprobe::artifact::Provenance;
use graphprobe::gnn::{extract_embeddings, train, Arch, EmbeddingSet, ModelConfig};
use graphprobe::graph::{generate_grid_house, Dataset, FeatureSpec, GridHouseParams, Split};
use graphprobe::probe::{probe_features, probe_node_level, ProbeConfig, ProbeStatus};
use graphprobe::props::{corpus_properties, NodePropsTable, PropsConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trained_gcn() -> (Dataset, EmbeddingSet) {
    let data = generate_grid_house(&GridHouseParams::with_count(600), 1).unwrap();
    let mut config = ModelConfig::defaults(Arch::Gcn);
    config.epochs = 40;
    config.restarts = 1;
    let spec = FeatureSpec::default();
    let trained = train(&config, &data, &spec).unwrap();
    let set = extract_embeddings(&trained.model, &trained.features, &data).unwrap();
    (data, set)
}

/// Rows of layer `name` for every node, with the split of its graph.
fn node_rows(set: &EmbeddingSet, name: &str) -> (graphprobe::linalg::Matrix, Vec<Split>) {
    let layer = set.layer(name).unwrap();
    let width = layer.width;
    let mut data = Vec::new();
    let mut splits = Vec::new();
    for g in &layer.graphs {
        data.extend_from_slice(g.value.data());
        splits.extend(std::iter::repeat(g.split).take(g.value.rows()));
    }
    (graphprobe::linalg::Matrix::from_vec(splits.len(), width, data), splits)
}

#[test]
fn node_level_probes_on_a_trained_gcn() {
    let (data, set) = trained_gcn();
    let tables = corpus_properties(&data.graphs, &PropsConfig::default(), 0)
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let node_props = NodePropsTable {
        provenance: Provenance::new("test", 0),
        ids: data.graphs.iter().map(|g| g.id.clone()).collect(),
        tables,
    };
    let results = probe_node_level(&set, &node_props, &ProbeConfig::default()).unwrap();
    let degree = results.iter().find(|r| r.layer == "x1" && r.property == "degree").unwrap();
    assert_eq!(degree.status, ProbeStatus::Ok);
    assert!(degree.r2_test.unwrap() >= 0.4, "{degree:?}");
    // only node-level layers are probed: 4 layers × 6 properties
    assert_eq!(results.len(), 24);
    assert!(results.iter().all(|r| r.layer.starts_with('x') && r.layer != "x_global"));

    // a fixed linear readout of x1 is recovered; a shuffled target is not
    let (x, splits) = node_rows(&set, "x1");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w: Vec<f64> = (0..x.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let readout: Vec<Option<f64>> = (0..x.rows())
        .map(|r| Some(x.row(r).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.5))
        .collect();
    let mut shuffled: Vec<Option<f64>> = node_props
        .tables
        .iter()
        .flat_map(|t| t.column(graphprobe::props::LocalProperty::Degree).to_vec())
        .map(Some)
        .collect();
    shuffled.shuffle(&mut rng);
    let r = probe_features(
        "x1",
        &x,
        &splits,
        &[("readout".into(), readout), ("shuffled_degree".into(), shuffled)],
        &ProbeConfig::default(),
    )
    .unwrap();
    assert!(r[0].r2_test.unwrap() > 0.999, "{:?}", r[0]);
    assert!(r[1].r2_test.unwrap() <= 0.05, "{:?}", r[1]);
}
