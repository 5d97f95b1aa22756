//! `probes.csv`, the accuracy-vs-probing correlation, and the report
//! directory (per-model R² series plus a markdown summary).

use std::io::Write;
use std::path::{Path, PathBuf};

use super::aggregate::Aggregation;
use super::ridge::display_r2;
use super::run::{ProbeResult, ProbeStatus};
use crate::artifact::{csv_reader, AtomicFile, Provenance};
use crate::error::{Error, Result};

const PRODUCER: &str = "graphprobe probe";
pub const PROBES_HEADER: [&str; 8] = ["layer", "property", "r2_train", "r2_test", "status", "lambda", "n_train", "n_test"];
/// Layer name where graph-level (post-pooling) representations start.
pub const GLOBAL_LAYER: &str = "x_global";

/// Which model a probes file describes, stored on its second line.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeMeta {
    pub model: String,
    pub test_accuracy: f64,
    pub aggregation: Aggregation,
}

impl ProbeMeta {
    fn line(&self) -> String {
        format!(
            "# model={} test_accuracy={} aggregation={}",
            self.model, self.test_accuracy, self.aggregation
        )
    }

    fn parse_line(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("# ")?;
        let (mut model, mut acc, mut agg) = (None, None, None);
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "model" => model = Some(v.to_string()),
                "test_accuracy" => acc = v.parse().ok(),
                "aggregation" => agg = v.parse().ok(),
                _ => {}
            }
        }
        Some(Self {
            model: model?,
            test_accuracy: acc?,
            aggregation: agg?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbesFile {
    pub provenance: Provenance,
    pub meta: ProbeMeta,
    pub results: Vec<ProbeResult>,
}

impl ProbesFile {
    /// Largest `r2_test` among ok probes of the graph-level layers
    /// (`x_global` and after); `None` when there is none.
    pub fn max_graph_r2(&self) -> Option<f64> {
        let start = self.results.iter().position(|r| r.layer == GLOBAL_LAYER)?;
        self.results[start..]
            .iter()
            .filter_map(|r| r.r2_test)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }

    /// Layer names in file order.
    pub fn layers(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.results {
            if out.last() != Some(&r.layer.as_str()) {
                out.push(&r.layer);
            }
        }
        out
    }

    pub fn properties(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.results {
            if !out.contains(&r.property.as_str()) {
                out.push(&r.property);
            }
        }
        out
    }

    pub fn get(&self, layer: &str, property: &str) -> Option<&ProbeResult> {
        self.results.iter().find(|r| r.layer == layer && r.property == property)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_probes_csv(path: &Path, file: &ProbesFile) -> Result<()> {
    let mut out = AtomicFile::create(path)?;
    writeln!(out, "{}", file.provenance.line())?;
    writeln!(out, "{}", file.meta.line())?;
    writeln!(out, "{}", PROBES_HEADER.join(","))?;
    for r in &file.results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.layer,
            r.property,
            opt(r.r2_train),
            opt(r.r2_test),
            r.status,
            opt(r.lambda),
            r.n_train,
            r.n_test
        )?;
    }
    out.commit()
}

pub fn read_probes_csv(path: &Path) -> Result<ProbesFile> {
    let mut rdr = csv_reader(path, PRODUCER)?;
    let provenance = Provenance::read_from(path)?;
    let bad = |line: usize, m: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message: m,
    };
    let second = std::fs::read_to_string(path)?
        .lines()
        .nth(1)
        .map(str::to_string)
        .unwrap_or_default();
    let meta = ProbeMeta::parse_line(&second)
        .ok_or_else(|| bad(2, "missing `# model=... test_accuracy=... aggregation=...` line".into()))?;
    if rdr.headers()?.iter().ne(PROBES_HEADER) {
        return Err(bad(3, format!("expected columns {}", PROBES_HEADER.join(","))));
    }
    let mut results = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != PROBES_HEADER.len() {
            return Err(bad(line, "wrong number of fields".into()));
        }
        let num = |i: usize| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(line, format!("invalid number `{s}`"))),
            }
        };
        let count = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| bad(line, format!("invalid count `{}`", &rec[i])))
        };
        results.push(ProbeResult {
            layer: rec[0].to_string(),
            property: rec[1].to_string(),
            r2_train: num(2)?,
            r2_test: num(3)?,
            status: rec[4].parse::<ProbeStatus>().map_err(|e| bad(line, e.to_string()))?,
            lambda: num(5)?,
            n_train: count(6)?,
            n_test: count(7)?,
        });
    }
    Ok(ProbesFile {
        provenance,
        meta,
        results,
    })
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson needs paired samples");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub const MIN_CORRELATION_MODELS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSummary {
    pub model: String,
    pub test_accuracy: f64,
    pub max_r2_test: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub models: Vec<ModelSummary>,
    /// `None` with fewer than three usable models or zero variance.
    pub correlation: Option<f64>,
}

/// Pearson correlation between test accuracy and the maximum graph-level
/// probing R² across models.
pub fn correlation_report(models: Vec<ModelSummary>) -> CorrelationReport {
    let usable: Vec<(f64, f64)> = models
        .iter()
        .filter_map(|m| m.max_r2_test.map(|r| (m.test_accuracy, r)))
        .collect();
    let correlation = if usable.len() < MIN_CORRELATION_MODELS {
        None
    } else {
        let (a, r): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        pearson(&a, &r)
    };
    CorrelationReport { models, correlation }
}

fn cell(r: Option<&ProbeResult>) -> String {
    match r.and_then(|r| r.r2_test) {
        Some(v) => format!("{:.2}", display_r2(v)),
        None => "—".into(),
    }
}

/// Writes `series_<model>.csv` (one R²-by-layer series per property),
/// `correlation.csv` and `summary.md` into `out`. Probe files produced under
/// different config hashes are refused unless `force`.
pub fn write_report(out: &Path, files: &[ProbesFile], force: bool) -> Result<Vec<PathBuf>> {
    let Some(first) = files.first() else {
        return Err(Error::contract("report needs at least one probes file"));
    };
    if !force {
        if let Some(f) = files.iter().find(|f| f.provenance.config_hash != first.provenance.config_hash) {
            return Err(Error::Mismatch(format!(
                "probes for {} have config hash {} but {} has {}; pass --force to combine them",
                f.meta.model, f.provenance.config_hash, first.meta.model, first.provenance.config_hash
            )));
        }
    }
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for f in files {
        let path = out.join(format!("series_{}.csv", f.meta.model));
        let mut w = AtomicFile::create(&path)?;
        writeln!(w, "{}", f.provenance.line())?;
        writeln!(w, "property,layer_index,layer,r2_test,r2_display,status")?;
        let layers = f.layers();
        for p in f.properties() {
            for (i, l) in layers.iter().enumerate() {
                if let Some(r) = f.get(l, p) {
                    writeln!(
                        w,
                        "{p},{},{l},{},{},{}",
                        i + 1,
                        opt(r.r2_test),
                        opt(r.r2_test.map(display_r2)),
                        r.status
                    )?;
                }
            }
        }
        w.commit()?;
        written.push(path);
    }

    let corr = correlation_report(
        files
            .iter()
            .map(|f| ModelSummary {
                model: f.meta.model.clone(),
                test_accuracy: f.meta.test_accuracy,
                max_r2_test: f.max_graph_r2(),
            })
            .collect(),
    );
    let path = out.join("correlation.csv");
    let mut w = AtomicFile::create(&path)?;
    writeln!(w, "{}", first.provenance.line())?;
    writeln!(w, "model,test_accuracy,max_r2_test")?;
    for m in &corr.models {
        writeln!(w, "{},{},{}", m.model, m.test_accuracy, opt(m.max_r2_test))?;
    }
    w.commit()?;
    written.push(path);

    let path = out.join("summary.md");
    let mut w = AtomicFile::create(&path)?;
    writeln!(w, "# Probing summary")?;
    writeln!(w)?;
    writeln!(w, "{}", first.provenance.line().trim_start_matches("# "))?;
    writeln!(w)?;
    writeln!(w, "## Models")?;
    writeln!(w)?;
    writeln!(w, "| Model | Test accuracy | Max graph-level R² |")?;
    writeln!(w, "|---|---|---|")?;
    for m in &corr.models {
        let r = m.max_r2_test.map_or("—".to_string(), |v| format!("{v:.3}"));
        writeln!(w, "| {} | {:.3} | {r} |", m.model, m.test_accuracy)?;
    }
    writeln!(w)?;
    match corr.correlation {
        Some(c) => writeln!(w, "Correlation between test accuracy and maximum probing R²: {c:.3}")?,
        None => writeln!(
            w,
            "Correlation between test accuracy and maximum probing R²: undefined (needs at least {MIN_CORRELATION_MODELS} models with varying values)"
        )?,
    }
    for f in files {
        writeln!(w)?;
        writeln!(w, "## {} (node layers: {})", f.meta.model, f.meta.aggregation)?;
        writeln!(w)?;
        writeln!(
            w,
            "Test R² per layer; negative values shown as {:.2}, — marks an undefined target, a degenerate sample or a missing probe.",
            super::ridge::DISPLAY_FLOOR
        )?;
        writeln!(w)?;
        let props = f.properties();
        writeln!(w, "| Layer | {} |", props.join(" | "))?;
        writeln!(w, "|---|{}", "---|".repeat(props.len()))?;
        for l in f.layers() {
            let cells: Vec<String> = props.iter().map(|p| cell(f.get(l, p))).collect();
            writeln!(w, "| {l} | {} |", cells.join(" | "))?;
        }
    }
    w.commit()?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(layer: &str, property: &str, r2: Option<f64>) -> ProbeResult {
        ProbeResult {
            layer: layer.into(),
            property: property.into(),
            r2_train: r2.map(|v| v + 0.01),
            r2_test: r2,
            status: if r2.is_some() { ProbeStatus::Ok } else { ProbeStatus::UndefinedTarget },
            lambda: r2.map(|_| 0.1),
            n_train: 80,
            n_test: 20,
        }
    }

    fn file(model: &str, hash: &str, acc: f64, best: f64) -> ProbesFile {
        ProbesFile {
            provenance: Provenance::new(hash, 1),
            meta: ProbeMeta {
                model: model.into(),
                test_accuracy: acc,
                aggregation: Aggregation::Mean,
            },
            results: vec![
                result("x1", "n_nodes", Some(0.99)),
                result("x1", "n_squares", Some(-0.83)),
                result("x_global", "n_nodes", Some(0.2)),
                result("x_global", "n_squares", Some(best)),
                result("x5", "n_nodes", None),
                result("x5", "n_squares", Some(best - 0.1)),
            ],
        }
    }

    #[test]
    fn probes_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("probes.csv");
        let f = file("gin_control", "abc", 0.975, 0.9);
        write_probes_csv(&p, &f).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.lines().nth(2).unwrap() == "layer,property,r2_train,r2_test,status,lambda,n_train,n_test");
        assert_eq!(read_probes_csv(&p).unwrap(), f);
    }

    #[test]
    fn missing_probes_name_the_producer() {
        let err = read_probes_csv(Path::new("/nonexistent/probes.csv")).unwrap_err();
        assert!(err.to_string().contains("graphprobe probe"), "{err}");
    }

    #[test]
    fn max_r2_ignores_node_layers() {
        assert_eq!(file("m", "h", 0.9, 0.7).max_graph_r2(), Some(0.7));
    }

    #[test]
    fn correlation_oracles() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[3.0, 2.0, 1.0]), None);
        let m = |a: f64, r: f64| ModelSummary {
            model: "m".into(),
            test_accuracy: a,
            max_r2_test: Some(r),
        };
        assert_eq!(correlation_report(vec![m(0.9, 0.5), m(0.8, 0.4)]).correlation, None);
        assert_eq!(correlation_report(vec![m(0.9, 0.5); 4]).correlation, None);
        let c = correlation_report(vec![m(0.9, 0.1), m(0.8, 0.2), m(0.7, 0.3)]).correlation.unwrap();
        assert!((c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_writes_series_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let files = [
            file("a", "h", 0.9, 0.8),
            file("b", "h", 0.8, 0.6),
            file("c", "h", 0.95, 0.9),
        ];
        let written = write_report(dir.path(), &files, false).unwrap();
        assert_eq!(written.len(), 5);
        let series = std::fs::read_to_string(dir.path().join("series_a.csv")).unwrap();
        assert!(series.contains("n_squares,1,x1,-0.83,-0.05,ok"), "{series}");
        assert!(series.contains("n_nodes,3,x5,,,undefined_target"), "{series}");
        let md = std::fs::read_to_string(dir.path().join("summary.md")).unwrap();
        assert!(md.contains("| x1 | 0.99 | -0.05 |"), "{md}");
        assert!(md.contains("| x5 | — | 0.70 |"), "{md}");
        assert!(md.contains("Correlation between test accuracy and maximum probing R²: 1.000"), "{md}");
    }

    #[test]
    fn report_refuses_mixed_hashes_unless_forced() {
        let dir = tempfile::tempdir().unwrap();
        let files = [file("a", "h1", 0.9, 0.8), file("b", "h2", 0.8, 0.6)];
        let err = write_report(dir.path(), &files, false).unwrap_err();
        assert!(matches!(err, Error::Mismatch(_)));
        assert!(err.to_string().contains("--force"));
        assert!(write_report(dir.path(), &files, true).is_ok());
    }
}
