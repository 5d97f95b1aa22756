use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use super::config::RunConfig;
use crate::artifact::Provenance;
use crate::error::Result;
use crate::gnn::{
    extract_embeddings, read_embeddings, train, write_embeddings, EmbeddingFormat, EmbeddingInfo, ModelConfig,
    TrainedModel,
};
use crate::graph::{generate_grid_house, load_dataset, save_dataset, Dataset};
use crate::probe::{
    probe_graph_level, probe_node_level, read_probes_csv, write_probes_csv, write_report, Aggregation,
    CorrelationReport, ProbeConfig, ProbeMeta, ProbeResult, ProbesFile,
};
use crate::props::{
    corpus_properties, read_node_props_csv, read_props_csv, write_node_props_csv, write_props_csv, NodePropsTable,
    PropsTable,
};

fn provenance(config: &RunConfig) -> Result<Provenance> {
    Ok(Provenance::new(config.hash()?, config.seed))
}

/// Generates the Grid-House corpus and writes it as JSON lines.
pub fn cmd_generate(config: &RunConfig, out: &Path) -> Result<Dataset> {
    let mut data = generate_grid_house(&config.dataset, config.seed)?;
    data.meta.insert("config_hash".into(), config.hash()?.into());
    save_dataset(&data, out)?;
    info!("generated {} graphs into {}", data.len(), out.display());
    Ok(data)
}

/// Computes every property of every graph of `data`; writes `props.csv` and,
/// when `nodes` is given, the per-node table.
pub fn cmd_props(config: &RunConfig, data: &Path, out: &Path, nodes: Option<&Path>) -> Result<(PropsTable, NodePropsTable)> {
    let data = load_dataset(data)?;
    let prov = provenance(config)?;
    let (rows, tables): (Vec<_>, Vec<_>) = corpus_properties(&data.graphs, &config.props, config.seed)
        .into_iter()
        .unzip();
    let table = PropsTable::from_dataset(prov.clone(), &data, rows)?;
    write_props_csv(out, &table)?;
    let node_table = NodePropsTable {
        provenance: prov,
        ids: table.ids.clone(),
        tables,
    };
    if let Some(nodes) = nodes {
        write_node_props_csv(nodes, &node_table.provenance, &node_table.ids, &node_table.tables)?;
    }
    info!("wrote properties of {} graphs to {}", table.len(), out.display());
    Ok((table, node_table))
}

/// Where `train` writes its outputs.
#[derive(Clone, Debug)]
pub struct TrainOutputs {
    pub model: PathBuf,
    pub metrics: Option<PathBuf>,
    pub embeddings: PathBuf,
}

impl TrainOutputs {
    /// Embeddings default to `<model stem>_embeddings/` next to the model file.
    pub fn new(model: PathBuf, metrics: Option<PathBuf>, embeddings: Option<PathBuf>) -> Self {
        let embeddings = embeddings.unwrap_or_else(|| {
            let stem = model.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
            model.with_file_name(format!("{stem}_embeddings"))
        });
        Self {
            model,
            metrics,
            embeddings,
        }
    }
}

/// Trains one model on `data`, saves it with its history, and exports its
/// per-layer embeddings over the whole corpus.
pub fn train_and_export(
    config: &RunConfig,
    name: &str,
    model_config: &ModelConfig,
    data: &Dataset,
    outputs: &TrainOutputs,
    format: EmbeddingFormat,
) -> Result<TrainedModel> {
    let prov = provenance(config)?;
    info!(
        "training {name}: {} restarts × {} epochs",
        model_config.restarts, model_config.epochs
    );
    let trained = train(model_config, data, &config.features)?;
    info!(
        "{name}: test accuracy {:.4} (restart {}, epoch {})",
        trained.test_accuracy, trained.restart, trained.best_epoch
    );
    trained.save(&outputs.model, &prov)?;
    if let Some(m) = &outputs.metrics {
        trained.write_history(m, &prov)?;
    }
    let set = extract_embeddings(&trained.model, &trained.features, data)?;
    let info = EmbeddingInfo {
        model: name.to_string(),
        test_accuracy: trained.test_accuracy,
        train_accuracy: trained.train_accuracy,
        max_nodes: data.max_nodes(),
    };
    write_embeddings(&outputs.embeddings, &set, &info, &prov, format)?;
    Ok(trained)
}

pub fn cmd_train(config: &RunConfig, data: &Path, outputs: &TrainOutputs) -> Result<TrainedModel> {
    let (name, model_config) = config.train_model()?;
    let data = load_dataset(data)?;
    train_and_export(config, &name, &model_config, &data, outputs, config.output.embeddings_format)
}

/// Graph-level probes of every layer in `embeddings`, plus node-level probes
/// when a node-property table is supplied.
pub fn cmd_probe(
    embeddings: &Path,
    props: &Path,
    probe: &ProbeConfig,
    out: &Path,
    node_props: Option<(&Path, &Path)>,
) -> Result<(ProbesFile, Option<ProbesFile>)> {
    let (set, manifest) = read_embeddings(embeddings)?;
    let table = read_props_csv(props)?;
    if table.provenance.config_hash != manifest.config_hash {
        warn!(
            "{} was produced under config {} but the embeddings under {}",
            props.display(),
            table.provenance.config_hash,
            manifest.config_hash
        );
    }
    let results = probe_graph_level(&set, &table, manifest.max_nodes, probe)?;
    let file = ProbesFile {
        provenance: manifest.provenance(),
        meta: ProbeMeta {
            model: manifest.model.clone(),
            test_accuracy: manifest.test_accuracy,
            aggregation: probe.aggregation,
        },
        results,
    };
    write_probes_csv(out, &file)?;
    info!("{}: {} graph-level probes written to {}", manifest.model, file.results.len(), out.display());
    let nodes = match node_props {
        Some((nodes_in, nodes_out)) => {
            let nodes = read_node_props_csv(nodes_in)?;
            let results = probe_node_level(&set, &nodes, probe)?;
            let f = ProbesFile {
                results,
                ..file.clone()
            };
            write_probes_csv(nodes_out, &f)?;
            Some(f)
        }
        None => None,
    };
    Ok((file, nodes))
}

pub fn cmd_report(probes: &[PathBuf], out: &Path, force: bool) -> Result<Vec<PathBuf>> {
    let files = probes.iter().map(|p| read_probes_csv(p)).collect::<Result<Vec<_>>>()?;
    write_report(out, &files, force)
}

/// One trained and probed roster entry.
#[derive(Clone, Debug)]
pub struct VariantOutcome {
    pub name: String,
    pub config: ModelConfig,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub probes: ProbesFile,
    pub node_probes: Option<Vec<ProbeResult>>,
}

#[derive(Clone, Debug)]
pub struct AllOutcome {
    pub dataset: Dataset,
    pub variants: Vec<VariantOutcome>,
    pub correlation: CorrelationReport,
    pub report_files: Vec<PathBuf>,
}

/// The whole experiment under `out`:
///
/// ```text
/// data.jsonl  props.csv  props_nodes.csv
/// models/<name>.json  models/<name>_history.csv
/// embeddings/<name>/
/// probes/<name>.csv  probes/<name>_nodes.csv
/// report/
/// ```
pub fn cmd_all(config: &RunConfig, out: &Path) -> Result<AllOutcome> {
    let variants = config.variants()?;
    std::fs::create_dir_all(out)?;
    let data_path = out.join("data.jsonl");
    let dataset = cmd_generate(config, &data_path)?;
    let props_path = out.join("props.csv");
    let nodes_path = out.join("props_nodes.csv");
    cmd_props(config, &data_path, &props_path, Some(&nodes_path))?;
    let outcomes = variants
        .par_iter()
        .map(|(name, model_config)| -> Result<VariantOutcome> {
            let outputs = TrainOutputs::new(
                out.join("models").join(format!("{name}.json")),
                Some(out.join("models").join(format!("{name}_history.csv"))),
                Some(out.join("embeddings").join(name)),
            );
            let trained = train_and_export(
                config,
                name,
                model_config,
                &dataset,
                &outputs,
                config.output.embeddings_format,
            )?;
            let probes_out = out.join("probes").join(format!("{name}.csv"));
            let nodes_out = out.join("probes").join(format!("{name}_nodes.csv"));
            let node_args = config
                .output
                .node_probes
                .then_some((nodes_path.as_path(), nodes_out.as_path()));
            let (probes, nodes) = cmd_probe(&outputs.embeddings, &props_path, &config.probe, &probes_out, node_args)?;
            Ok(VariantOutcome {
                name: name.clone(),
                config: model_config.clone(),
                test_accuracy: trained.test_accuracy,
                train_accuracy: trained.train_accuracy,
                probes,
                node_probes: nodes.map(|n| n.results),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let files: Vec<ProbesFile> = outcomes.iter().map(|o| o.probes.clone()).collect();
    let report_files = write_report(&out.join("report"), &files, false)?;
    let correlation = crate::probe::correlation_report(
        files
            .iter()
            .map(|f| crate::probe::ModelSummary {
                model: f.meta.model.clone(),
                test_accuracy: f.meta.test_accuracy,
                max_r2_test: f.max_graph_r2(),
            })
            .collect(),
    );
    Ok(AllOutcome {
        dataset,
        variants: outcomes,
        correlation,
        report_files,
    })
}

/// Applies a command-line aggregation over the configured one.
pub fn probe_config_with(config: &RunConfig, aggregation: Option<Aggregation>) -> ProbeConfig {
    let mut p = config.probe.clone();
    if let Some(a) = aggregation {
        p.aggregation = a;
    }
    p
}
