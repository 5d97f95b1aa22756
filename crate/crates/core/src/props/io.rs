//! `props.csv` (one row per graph: id, label, split, then every global
//! property) and `nodes.csv` (one row per node: graph_id, node_id, then the
//! local properties). Undefined values are written as empty cells.

use std::io::Write;
use std::path::Path;

use super::global::{GlobalProperty, GraphPropertyVector};
use super::node::{LocalProperty, NodePropertyTable};
use super::PropertyValue;
use crate::artifact::{csv_reader, AtomicFile, Provenance};
use crate::error::{Error, Result};
use crate::graph::{Dataset, Split};

const PRODUCER: &str = "graphprobe props";

#[derive(Clone, Debug, PartialEq)]
pub struct PropsTable {
    pub provenance: Provenance,
    pub ids: Vec<String>,
    pub labels: Vec<Option<u8>>,
    pub splits: Vec<Split>,
    pub rows: Vec<GraphPropertyVector>,
}

impl PropsTable {
    /// Pairs the property rows (in dataset order) with the dataset's ids,
    /// labels and splits.
    pub fn from_dataset(provenance: Provenance, dataset: &Dataset, rows: Vec<GraphPropertyVector>) -> Result<Self> {
        if rows.len() != dataset.len() {
            return Err(Error::contract(format!(
                "{} property rows for {} graphs",
                rows.len(),
                dataset.len()
            )));
        }
        Ok(Self {
            provenance,
            ids: dataset.graphs.iter().map(|g| g.id.clone()).collect(),
            labels: dataset.graphs.iter().map(|g| g.label).collect(),
            splits: dataset.split.clone(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Column `p` as options, in row order.
    pub fn column(&self, p: GlobalProperty) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.get(p).as_option()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodePropsTable {
    pub provenance: Provenance,
    pub ids: Vec<String>,
    pub tables: Vec<NodePropertyTable>,
}

fn fmt_value(v: PropertyValue) -> String {
    if v.defined {
        format!("{}", v.value)
    } else {
        String::new()
    }
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line: line as usize,
        message: message.into(),
    }
}

fn parse_cell(path: &Path, line: u64, cell: &str) -> Result<PropertyValue> {
    if cell.is_empty() {
        return Ok(PropertyValue::undefined());
    }
    cell.parse::<f64>()
        .map(PropertyValue::new)
        .map_err(|_| parse_error(path, line, format!("invalid number `{cell}`")))
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["id", "label", "split"];
    h.extend(GlobalProperty::ALL.iter().map(|p| p.name()));
    h
}

fn node_header() -> Vec<&'static str> {
    let mut h = vec!["graph_id", "node_id"];
    h.extend(LocalProperty::ALL.iter().map(|p| p.name()));
    h
}

fn check_header(path: &Path, got: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if got.iter().ne(expected.iter().copied()) {
        return Err(parse_error(
            path,
            2,
            format!("expected columns {:?}, found {:?}", expected, got.iter().collect::<Vec<_>>()),
        ));
    }
    Ok(())
}

pub fn write_props_csv(path: &Path, table: &PropsTable) -> Result<()> {
    let mut out = AtomicFile::create(path)?;
    writeln!(out, "{}", table.provenance.line())?;
    writeln!(out, "{}", header().join(","))?;
    for i in 0..table.len() {
        let label = table.labels[i].map(|l| l.to_string()).unwrap_or_default();
        write!(out, "{},{},{}", table.ids[i], label, table.splits[i].as_str())?;
        for (_, v) in table.rows[i].iter() {
            write!(out, ",{}", fmt_value(v))?;
        }
        writeln!(out)?;
    }
    out.commit()
}

pub fn read_props_csv(path: &Path) -> Result<PropsTable> {
    let mut rdr = csv_reader(path, PRODUCER)?;
    let provenance = Provenance::read_from(path)?;
    let expected = header();
    check_header(path, rdr.headers()?, &expected)?;
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut splits = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(parse_error(path, line, "wrong number of fields"));
        }
        ids.push(rec[0].to_string());
        labels.push(match &rec[1] {
            "" => None,
            l => Some(
                l.parse::<u8>()
                    .map_err(|_| parse_error(path, line, format!("invalid label `{l}`")))?,
            ),
        });
        splits.push(rec[2].parse::<Split>().map_err(|e| parse_error(path, line, e.to_string()))?);
        let values = rec
            .iter()
            .skip(3)
            .map(|c| parse_cell(path, line, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(GraphPropertyVector::from_values(values));
    }
    Ok(PropsTable {
        provenance,
        ids,
        labels,
        splits,
        rows,
    })
}

pub fn write_node_props_csv(
    path: &Path,
    provenance: &Provenance,
    ids: &[String],
    tables: &[NodePropertyTable],
) -> Result<()> {
    let mut out = AtomicFile::create(path)?;
    writeln!(out, "{}", provenance.line())?;
    writeln!(out, "{}", node_header().join(","))?;
    for (id, t) in ids.iter().zip(tables) {
        for v in 0..t.len() {
            write!(out, "{id},{v}")?;
            for p in LocalProperty::ALL {
                write!(out, ",{}", t.column(p)[v])?;
            }
            writeln!(out)?;
        }
    }
    out.commit()
}

pub fn read_node_props_csv(path: &Path) -> Result<NodePropsTable> {
    let mut rdr = csv_reader(path, PRODUCER)?;
    let provenance = Provenance::read_from(path)?;
    let expected = node_header();
    check_header(path, rdr.headers()?, &expected)?;
    let mut ids: Vec<String> = Vec::new();
    let mut tables: Vec<NodePropertyTable> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(parse_error(path, line, "wrong number of fields"));
        }
        if ids.last().map(String::as_str) != Some(&rec[0]) {
            ids.push(rec[0].to_string());
            tables.push(NodePropertyTable::with_capacity(0));
        }
        let t = tables.last_mut().expect("pushed above");
        let node: usize = rec[1]
            .parse()
            .map_err(|_| parse_error(path, line, format!("invalid node index `{}`", &rec[1])))?;
        if node != t.len() {
            return Err(parse_error(path, line, format!("node {node} out of order")));
        }
        let mut vals = [0.0; 6];
        for (k, cell) in rec.iter().skip(2).enumerate() {
            vals[k] = parse_cell(path, line, cell)?
                .as_option()
                .ok_or_else(|| parse_error(path, line, "node property cells must be numeric"))?;
        }
        t.push(vals);
    }
    Ok(NodePropsTable {
        provenance,
        ids,
        tables,
    })
}
