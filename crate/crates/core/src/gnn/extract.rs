//! Per-layer embedding extraction and the embeddings directory format.
//!
//! A directory holds `manifest.json` plus one file per layer. CSV files start
//! with the provenance line and have columns
//! `graph_id,split,node_id,v0..v{w-1}` (`node_id` is `-` for graph-level
//! layers). Binary files are little-endian:
//!
//! ```text
//! magic    8 bytes  "GPEMBED\0"
//! version  u32      1
//! level    u8       0 = node, 1 = graph
//! width    u32
//! seed     u64
//! hash     u32 length + UTF-8 config hash
//! rows     u64
//! row      u32 length + UTF-8 graph id, u8 split (0 train, 1 test),
//!          u32 node id (u32::MAX for graph-level rows), width × f64
//! ```

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::Batch;
use super::model::{Level, Model};
use crate::artifact::{csv_reader, AtomicFile, Provenance, ARTIFACT_SCHEMA};
use crate::error::{Error, Result};
use crate::graph::{Dataset, FeatureSpec, Split};
use crate::linalg::Matrix;

pub const EMBEDDING_MAGIC: &[u8; 8] = b"GPEMBED\0";
pub const EMBEDDING_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

const PRODUCER: &str = "graphprobe train";
const GRAPH_ROW: u32 = u32::MAX;
/// Graphs per extraction forward pass.
const EXTRACT_BATCH: usize = 256;

/// One graph's rows of one layer: `n × width` for node-level layers, `1 × width`
/// for graph-level layers.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphEmbedding {
    pub id: String,
    pub split: Split,
    pub value: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerEmbeddings {
    pub name: String,
    pub level: Level,
    pub width: usize,
    pub graphs: Vec<GraphEmbedding>,
}

/// Every traced layer of a model over a dataset, in forward order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    pub layers: Vec<LayerEmbeddings>,
}

impl EmbeddingSet {
    pub fn layer(&self, name: &str) -> Option<&LayerEmbeddings> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.layers.iter().map(|l| l.name.as_str()).collect()
    }
}

/// Evaluation-mode forward over every graph of `dataset`, split back into
/// per-graph matrices. Batches run in parallel; the result is in dataset order.
pub fn extract_embeddings(model: &Model, spec: &FeatureSpec, dataset: &Dataset) -> Result<EmbeddingSet> {
    let idx: Vec<usize> = (0..dataset.len()).collect();
    let traces = idx
        .par_chunks(EXTRACT_BATCH)
        .map(|chunk| {
            let graphs: Vec<_> = chunk.iter().map(|&i| &dataset.graphs[i]).collect();
            let feats = graphs.iter().map(|g| spec.build(g)).collect::<Result<Vec<_>>>()?;
            let batch = Batch::new(&graphs, &feats.iter().collect::<Vec<_>>())?;
            let trace = model.trace(&batch)?;
            Ok((chunk, batch.segments, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut layers: Vec<LayerEmbeddings> = match traces.first() {
        Some((_, _, t)) => t
            .layers
            .iter()
            .map(|l| LayerEmbeddings {
                name: l.name.clone(),
                level: l.level,
                width: l.value.cols(),
                graphs: Vec::with_capacity(dataset.len()),
            })
            .collect(),
        None => model
            .config
            .layer_names()
            .into_iter()
            .map(|name| LayerEmbeddings {
                name,
                level: Level::Graph,
                width: 0,
                graphs: Vec::new(),
            })
            .collect(),
    };
    for (chunk, segments, trace) in traces {
        for (out, t) in layers.iter_mut().zip(&trace.layers) {
            for (k, &i) in chunk.iter().enumerate() {
                let rows: Vec<usize> = match t.level {
                    Level::Node => segments.range(k).collect(),
                    Level::Graph => vec![k],
                };
                out.graphs.push(GraphEmbedding {
                    id: dataset.graphs[i].id.clone(),
                    split: dataset.split[i],
                    value: t.value.select_rows(&rows),
                });
            }
        }
    }
    Ok(EmbeddingSet { layers })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    #[default]
    Csv,
    Binary,
}

impl EmbeddingFormat {
    fn extension(self) -> &'static str {
        match self {
            EmbeddingFormat::Csv => "csv",
            EmbeddingFormat::Binary => "bin",
        }
    }
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmbeddingFormat::Csv),
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            other => Err(Error::Config(format!("unknown embedding format `{other}` (expected csv or binary)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestLayer {
    pub name: String,
    pub level: Level,
    pub width: usize,
    pub file: String,
}

/// `manifest.json`: provenance, the model's accuracies and the layer files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingManifest {
    pub schema: String,
    pub config_hash: String,
    pub seed: u64,
    /// Free-form model name, e.g. `gin_control`.
    pub model: String,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    /// Corpus-wide maximum node count (the norm-sort padding target).
    pub max_nodes: usize,
    pub format: EmbeddingFormat,
    pub layers: Vec<ManifestLayer>,
}

impl EmbeddingManifest {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            schema: self.schema.clone(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
        }
    }
}

/// Metadata written alongside the layer files.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingInfo {
    pub model: String,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub max_nodes: usize,
}

/// Writes one file per layer and the manifest into `dir`; returns the manifest.
pub fn write_embeddings(
    dir: &Path,
    set: &EmbeddingSet,
    info: &EmbeddingInfo,
    provenance: &Provenance,
    format: EmbeddingFormat,
) -> Result<EmbeddingManifest> {
    std::fs::create_dir_all(dir)?;
    let mut layers = Vec::with_capacity(set.layers.len());
    for layer in &set.layers {
        let file = format!("{}.{}", layer.name, format.extension());
        let path = dir.join(&file);
        match format {
            EmbeddingFormat::Csv => write_layer_csv(&path, layer, provenance)?,
            EmbeddingFormat::Binary => write_layer_binary(&path, layer, provenance)?,
        }
        layers.push(ManifestLayer {
            name: layer.name.clone(),
            level: layer.level,
            width: layer.width,
            file,
        });
    }
    let manifest = EmbeddingManifest {
        schema: provenance.schema.clone(),
        config_hash: provenance.config_hash.clone(),
        seed: provenance.seed,
        model: info.model.clone(),
        test_accuracy: info.test_accuracy,
        train_accuracy: info.train_accuracy,
        max_nodes: info.max_nodes,
        format,
        layers,
    };
    let mut f = AtomicFile::create(&dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;
    f.commit()?;
    Ok(manifest)
}

fn missing(path: &Path) -> Error {
    Error::MissingInput {
        path: path.to_path_buf(),
        producer: PRODUCER.into(),
    }
}

pub fn read_manifest(dir: &Path) -> Result<EmbeddingManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => missing(&path),
        _ => e.into(),
    })?;
    let m: EmbeddingManifest = serde_json::from_str(&text)?;
    if m.schema != ARTIFACT_SCHEMA {
        return Err(Error::Version {
            expected: ARTIFACT_SCHEMA.into(),
            found: m.schema,
        });
    }
    Ok(m)
}

/// Reads a directory written by [`write_embeddings`].
pub fn read_embeddings(dir: &Path) -> Result<(EmbeddingSet, EmbeddingManifest)> {
    let manifest = read_manifest(dir)?;
    let layers = manifest
        .layers
        .iter()
        .map(|l| {
            let path = dir.join(&l.file);
            let (layer, prov) = match manifest.format {
                EmbeddingFormat::Csv => read_layer_csv(&path, l)?,
                EmbeddingFormat::Binary => read_layer_binary(&path, l)?,
            };
            if prov != manifest.provenance() {
                return Err(Error::Mismatch(format!(
                    "{}: provenance {} differs from the manifest's {}",
                    path.display(),
                    prov.line(),
                    manifest.provenance().line()
                )));
            }
            Ok(layer)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((EmbeddingSet { layers }, manifest))
}

fn node_ids(level: Level, n: usize) -> impl Iterator<Item = Option<usize>> {
    (0..n).map(move |v| (level == Level::Node).then_some(v))
}

fn write_layer_csv(path: &Path, layer: &LayerEmbeddings, provenance: &Provenance) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    writeln!(f, "{}", provenance.line())?;
    write!(f, "graph_id,split,node_id")?;
    for c in 0..layer.width {
        write!(f, ",v{c}")?;
    }
    writeln!(f)?;
    for g in &layer.graphs {
        for (r, node) in node_ids(layer.level, g.value.rows()).enumerate() {
            write!(f, "{},{},", g.id, g.split.as_str())?;
            match node {
                Some(v) => write!(f, "{v}")?,
                None => write!(f, "-")?,
            }
            for x in g.value.row(r) {
                write!(f, ",{x}")?;
            }
            writeln!(f)?;
        }
    }
    f.commit()
}

/// Appends a row to the per-graph grouping, opening a new graph when the id
/// changes and checking node order.
struct RowCollector {
    path: PathBuf,
    level: Level,
    width: usize,
    graphs: Vec<GraphEmbedding>,
    pending: Vec<f64>,
}

impl RowCollector {
    fn new(path: &Path, level: Level, width: usize) -> Self {
        Self {
            path: path.to_path_buf(),
            level,
            width,
            graphs: Vec::new(),
            pending: Vec::new(),
        }
    }

    fn flush(&mut self) {
        if let Some(g) = self.graphs.last_mut() {
            let rows = self.pending.len() / self.width.max(1);
            let data = std::mem::take(&mut self.pending);
            g.value = Matrix::from_vec(rows, self.width, data);
        }
    }

    fn push(&mut self, line: usize, id: &str, split: Split, node: Option<usize>, values: &[f64]) -> Result<()> {
        let err = |m: String| Error::Parse {
            path: self.path.display().to_string(),
            line,
            message: m,
        };
        if values.len() != self.width {
            return Err(err(format!("{} values, expected {}", values.len(), self.width)));
        }
        let new_graph = self.graphs.last().map_or(true, |g| g.id != id);
        match (self.level, node) {
            (Level::Graph, None) if new_graph => {}
            (Level::Graph, None) => return Err(err(format!("graph {id} repeated in a graph-level layer"))),
            (Level::Node, Some(v)) => {
                let expected = if new_graph { 0 } else { self.pending.len() / self.width.max(1) };
                if self.width == 0 && !new_graph {
                    // zero-width rows cannot be counted from `pending`
                    return Err(err("zero-width node layer".into()));
                }
                if v != expected {
                    return Err(err(format!("graph {id}: node {v} out of order (expected {expected})")));
                }
            }
            _ => return Err(err("node id does not match the layer level".into())),
        }
        if new_graph {
            self.flush();
            self.graphs.push(GraphEmbedding {
                id: id.to_string(),
                split,
                value: Matrix::zeros(0, self.width),
            });
        }
        self.pending.extend_from_slice(values);
        Ok(())
    }

    fn finish(mut self, meta: &ManifestLayer) -> LayerEmbeddings {
        self.flush();
        LayerEmbeddings {
            name: meta.name.clone(),
            level: meta.level,
            width: meta.width,
            graphs: self.graphs,
        }
    }
}

fn read_layer_csv(path: &Path, meta: &ManifestLayer) -> Result<(LayerEmbeddings, Provenance)> {
    let mut rdr = csv_reader(path, PRODUCER)?;
    let prov = Provenance::read_from(path)?;
    let header = rdr.headers()?.clone();
    if header.len() != 3 + meta.width {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 2,
            message: format!("{} columns, expected {}", header.len(), 3 + meta.width),
        });
    }
    let mut rows = RowCollector::new(path, meta.level, meta.width);
    let mut values = Vec::with_capacity(meta.width);
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |m: String| Error::Parse {
            path: path.display().to_string(),
            line,
            message: m,
        };
        let split: Split = rec[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let node = match &rec[2] {
            "-" => None,
            s => Some(s.parse::<usize>().map_err(|_| bad(format!("invalid node id `{s}`")))?),
        };
        values.clear();
        for cell in rec.iter().skip(3) {
            values.push(cell.parse::<f64>().map_err(|_| bad(format!("invalid number `{cell}`")))?);
        }
        rows.push(line, &rec[0], split, node, &values)?;
    }
    Ok((rows.finish(meta), prov))
}

fn write_layer_binary(path: &Path, layer: &LayerEmbeddings, provenance: &Provenance) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    f.write_all(EMBEDDING_MAGIC)?;
    f.write_all(&EMBEDDING_VERSION.to_le_bytes())?;
    f.write_all(&[match layer.level {
        Level::Node => 0u8,
        Level::Graph => 1,
    }])?;
    f.write_all(&(layer.width as u32).to_le_bytes())?;
    f.write_all(&provenance.seed.to_le_bytes())?;
    write_str(&mut f, &provenance.config_hash)?;
    let rows: usize = layer.graphs.iter().map(|g| g.value.rows()).sum();
    f.write_all(&(rows as u64).to_le_bytes())?;
    for g in &layer.graphs {
        for (r, node) in node_ids(layer.level, g.value.rows()).enumerate() {
            write_str(&mut f, &g.id)?;
            f.write_all(&[match g.split {
                Split::Train => 0u8,
                Split::Test => 1,
            }])?;
            f.write_all(&node.map_or(GRAPH_ROW, |v| v as u32).to_le_bytes())?;
            for x in g.value.row(r) {
                f.write_all(&x.to_le_bytes())?;
            }
        }
    }
    f.commit()
}

fn write_str(f: &mut impl Write, s: &str) -> Result<()> {
    f.write_all(&(s.len() as u32).to_le_bytes())?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

struct BinReader<'a> {
    inner: BufReader<File>,
    path: &'a Path,
}

impl BinReader<'_> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(|e| self.truncated(e))?;
        Ok(b)
    }

    fn truncated(&self, e: std::io::Error) -> Error {
        match e.kind() {
            std::io::ErrorKind::UnexpectedEof => self.bad("file is truncated".into()),
            _ => e.into(),
        }
    }

    fn bad(&self, message: String) -> Error {
        Error::Parse {
            path: self.path.display().to_string(),
            line: 0,
            message,
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let mut b = vec![0u8; len];
        self.inner.read_exact(&mut b).map_err(|e| self.truncated(e))?;
        String::from_utf8(b).map_err(|_| self.bad("string is not UTF-8".into()))
    }
}

fn read_layer_binary(path: &Path, meta: &ManifestLayer) -> Result<(LayerEmbeddings, Provenance)> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => missing(path),
        _ => e.into(),
    })?;
    let mut r = BinReader {
        inner: BufReader::new(file),
        path,
    };
    if &r.bytes::<8>()? != EMBEDDING_MAGIC {
        return Err(r.bad("not an embeddings file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != EMBEDDING_VERSION {
        return Err(Error::Version {
            expected: EMBEDDING_VERSION.to_string(),
            found: version.to_string(),
        });
    }
    let level = match r.bytes::<1>()?[0] {
        0 => Level::Node,
        1 => Level::Graph,
        other => return Err(r.bad(format!("unknown level byte {other}"))),
    };
    let width = r.u32()? as usize;
    if level != meta.level || width != meta.width {
        return Err(r.bad(format!(
            "header says {level:?} × {width}, manifest says {:?} × {}",
            meta.level, meta.width
        )));
    }
    let seed = r.u64()?;
    let config_hash = r.string()?;
    let n_rows = r.u64()?;
    let mut rows = RowCollector::new(path, level, width);
    let mut values = vec![0.0; width];
    for i in 0..n_rows {
        let id = r.string()?;
        let split = match r.bytes::<1>()?[0] {
            0 => Split::Train,
            1 => Split::Test,
            other => return Err(r.bad(format!("row {i}: unknown split byte {other}"))),
        };
        let node = match r.u32()? {
            GRAPH_ROW => None,
            v => Some(v as usize),
        };
        for v in values.iter_mut() {
            *v = f64::from_le_bytes(r.bytes()?);
        }
        rows.push(i as usize, &id, split, node, &values)?;
    }
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest)? != 0 {
        return Err(r.bad("trailing bytes after the last row".into()));
    }
    Ok((
        rows.finish(meta),
        Provenance {
            schema: ARTIFACT_SCHEMA.into(),
            config_hash,
            seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{Arch, ModelConfig};
    use crate::graph::{generate_grid_house, GridHouseParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(arch: Arch) -> (Model, Dataset, FeatureSpec) {
        let data = generate_grid_house(&GridHouseParams::with_count(12), 3).unwrap();
        let spec = FeatureSpec::default();
        let width = spec.width_for(&data.graphs);
        let config = ModelConfig {
            dropout: 0.3,
            ..ModelConfig::defaults(arch)
        };
        let model = Model::new(config, width, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        (model, data, spec)
    }

    #[test]
    fn layer_sets_and_shapes() {
        let (model, data, spec) = setup(Arch::Gcn);
        let set = extract_embeddings(&model, &spec, &data).unwrap();
        assert_eq!(set.names(), ["x1", "x2", "x3", "x4", "x_global", "x5", "x6", "x7"]);
        for l in &set.layers {
            assert_eq!(l.graphs.len(), data.len());
            for (g, e) in data.graphs.iter().zip(&l.graphs) {
                assert_eq!(e.id, g.id);
                let rows = if l.level == Level::Node { g.n() } else { 1 };
                assert_eq!(e.value.shape(), (rows, l.width));
            }
        }
        assert_eq!(set.layer("x7").unwrap().width, 2);
    }

    #[test]
    fn extraction_is_deterministic_with_dropout_configured() {
        let (model, data, spec) = setup(Arch::Gat);
        assert_eq!(
            extract_embeddings(&model, &spec, &data).unwrap(),
            extract_embeddings(&model, &spec, &data).unwrap()
        );
    }

    #[test]
    fn x_global_is_the_pool_of_the_last_node_layer() {
        let (model, data, spec) = setup(Arch::Gin);
        let set = extract_embeddings(&model, &spec, &data).unwrap();
        let x2 = set.layer("x2").unwrap();
        let pooled = set.layer("x_global").unwrap();
        for (n, p) in x2.graphs.iter().zip(&pooled.graphs) {
            for c in 0..x2.width {
                let mean = (0..n.value.rows()).map(|r| n.value.get(r, c)).sum::<f64>() / n.value.rows() as f64;
                assert!((mean - p.value.get(0, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn both_formats_round_trip_exactly() {
        let (model, data, spec) = setup(Arch::Gin);
        let set = extract_embeddings(&model, &spec, &data).unwrap();
        let info = EmbeddingInfo {
            model: "gin_control".into(),
            test_accuracy: 0.5,
            train_accuracy: 0.25,
            max_nodes: data.max_nodes(),
        };
        let prov = Provenance::new("feed", 4);
        for format in [EmbeddingFormat::Csv, EmbeddingFormat::Binary] {
            let dir = tempfile::tempdir().unwrap();
            let written = write_embeddings(dir.path(), &set, &info, &prov, format).unwrap();
            let (back, manifest) = read_embeddings(dir.path()).unwrap();
            assert_eq!(back, set);
            assert_eq!(manifest, written);
            assert_eq!(manifest.provenance(), prov);
        }
    }

    #[test]
    fn corrupt_binary_is_rejected() {
        let (model, data, spec) = setup(Arch::Gin);
        let set = extract_embeddings(&model, &spec, &data).unwrap();
        let info = EmbeddingInfo {
            model: "m".into(),
            test_accuracy: 0.0,
            train_accuracy: 0.0,
            max_nodes: data.max_nodes(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_embeddings(dir.path(), &set, &info, &Provenance::new("h", 0), EmbeddingFormat::Binary).unwrap();
        let x1 = dir.path().join("x1.bin");
        let bytes = std::fs::read(&x1).unwrap();
        std::fs::write(&x1, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_embeddings(dir.path()).unwrap_err().to_string().contains("truncated"));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&x1, &bad).unwrap();
        assert!(read_embeddings(dir.path()).unwrap_err().to_string().contains("magic"));
    }

    #[test]
    fn missing_directory_names_train() {
        let err = read_embeddings(Path::new("/nonexistent/emb")).unwrap_err();
        assert!(matches!(err, Error::MissingInput { .. }));
        assert!(err.to_string().contains("graphprobe train"), "{err}");
    }
}
