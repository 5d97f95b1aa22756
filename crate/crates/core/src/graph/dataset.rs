//! JSON-lines dataset files.
//!
//! Line 1 is a header `{"schema": "graphprobe-v1", "seed": S, "meta": {...}}`;
//! every further line is one graph
//! `{"id", "n", "edges": [[u, v], ...], "label": 0|1, "split": "train"|"test", "features"?}`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::artifact::AtomicFile;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DATASET_SCHEMA: &str = "graphprobe-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::param(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub graphs: Vec<Graph>,
    pub split: Vec<Split>,
    pub seed: u64,
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl Dataset {
    /// Records the corpus-wide maximum node count under `meta.max_nodes` if absent.
    pub fn new(
        graphs: Vec<Graph>,
        split: Vec<Split>,
        seed: u64,
        mut meta: serde_json::Map<String, serde_json::Value>,
    ) -> Result<Self> {
        if graphs.len() != split.len() {
            return Err(Error::contract(format!(
                "{} graphs but {} split tags",
                graphs.len(),
                split.len()
            )));
        }
        let max_nodes = graphs.iter().map(Graph::n).max().unwrap_or(0);
        meta.entry("max_nodes").or_insert(max_nodes.into());
        Ok(Self {
            graphs,
            split,
            seed,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn max_nodes(&self) -> usize {
        self.meta
            .get("max_nodes")
            .and_then(serde_json::Value::as_u64)
            .map(|v| v as usize)
            .unwrap_or_else(|| self.graphs.iter().map(Graph::n).max().unwrap_or(0))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema: String,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[serde(default)]
    meta: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    id: String,
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    label: Option<u8>,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<()> {
    let mut out = AtomicFile::create(path)?;
    let header = Header {
        schema: DATASET_SCHEMA.to_string(),
        seed: d.seed,
        count: Some(d.len()),
        meta: d.meta.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for (g, s) in d.graphs.iter().zip(&d.split) {
        let rec = GraphRecord {
            id: g.id.clone(),
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            label: g.label,
            split: *s,
            features: g
                .features()
                .map(|f| (0..f.rows()).map(|r| f.row(r).to_vec()).collect()),
        };
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    out.commit()
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput {
            path: path.to_path_buf(),
            producer: "graphprobe generate".into(),
        },
        _ => e.into(),
    })?;
    let name = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: name.clone(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected a header line".into()))??;
    let header: Header =
        serde_json::from_str(&first).map_err(|e| parse_err(1, format!("bad header: {e}")))?;
    if header.schema != DATASET_SCHEMA {
        return Err(Error::Version {
            expected: DATASET_SCHEMA.into(),
            found: header.schema,
        });
    }
    let mut graphs = Vec::new();
    let mut split = Vec::new();
    let mut last_line = 1;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        last_line = lineno;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        if let Some(l) = rec.label {
            if l > 1 {
                return Err(parse_err(lineno, format!("label must be 0 or 1, got {l}")));
            }
        }
        let edges: Vec<_> = rec.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = Graph::new(rec.id, rec.n, &edges)
            .map_err(|e| parse_err(lineno, e.to_string()))?
            .with_label(rec.label);
        if let Some(rows) = rec.features {
            let f = Matrix::from_rows(&rows).map_err(|e| parse_err(lineno, e.to_string()))?;
            g = g.with_features(f).map_err(|e| parse_err(lineno, e.to_string()))?;
        }
        graphs.push(g);
        split.push(rec.split);
    }
    if let Some(count) = header.count {
        if count != graphs.len() {
            return Err(parse_err(
                last_line,
                format!("header declares {count} graphs but file holds {} (truncated?)", graphs.len()),
            ));
        }
    }
    Dataset::new(graphs, split, header.seed, header.meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_grid_house, GridHouseParams};

    #[test]
    fn round_trip_is_identity() {
        let d = generate_grid_house(&GridHouseParams::with_count(30), 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        save_dataset(&d, &p).unwrap();
        assert_eq!(load_dataset(&p).unwrap(), d);
    }

    #[test]
    fn features_round_trip_exactly() {
        let g = Graph::path(3)
            .with_features(Matrix::from_vec(3, 2, vec![0.1, 1.0 / 3.0, -2.5e-17, 4.0, 5.0, 6.0]))
            .unwrap();
        let d = Dataset::new(vec![g], vec![Split::Train], 1, Default::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.jsonl");
        save_dataset(&d, &p).unwrap();
        assert_eq!(load_dataset(&p).unwrap(), d);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let d = generate_grid_house(&GridHouseParams::with_count(10), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        save_dataset(&d, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        // cut in the middle of the last record
        std::fs::write(&p, &text[..text.len() - 20]).unwrap();
        match load_dataset(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("expected parse error, got {other:?}"),
        }
        // cut on a line boundary: caught by the declared count
        let keep: Vec<&str> = text.lines().take(6).collect();
        std::fs::write(&p, keep.join("\n")).unwrap();
        assert!(matches!(load_dataset(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_schema_is_a_version_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.jsonl");
        std::fs::write(&p, "{\"schema\":\"graphprobe-v0\",\"seed\":1,\"meta\":{}}\n").unwrap();
        assert!(matches!(load_dataset(&p), Err(Error::Version { .. })));
    }

    #[test]
    fn external_corpus_without_count_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mol.jsonl");
        std::fs::write(
            &p,
            concat!(
                "{\"schema\":\"graphprobe-v1\",\"seed\":0,\"meta\":{\"source\":\"molecules\"}}\n",
                "{\"id\":\"m1\",\"n\":3,\"edges\":[[0,1],[1,2]],\"label\":1,\"split\":\"train\",\"features\":[[6.0],[8.0],[6.0]]}\n",
                "{\"id\":\"m2\",\"n\":2,\"edges\":[[0,1]],\"label\":0,\"split\":\"test\"}\n",
            ),
        )
        .unwrap();
        let d = load_dataset(&p).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.graphs[0].features().unwrap().get(1, 0), 8.0);
        assert_eq!(d.max_nodes(), 3);
        assert_eq!(d.split, vec![Split::Train, Split::Test]);
    }

    #[test]
    fn invalid_record_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        std::fs::write(
            &p,
            "{\"schema\":\"graphprobe-v1\",\"seed\":0}\n{\"id\":\"a\",\"n\":2,\"edges\":[[0,5]],\"split\":\"train\"}\n",
        )
        .unwrap();
        match load_dataset(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
