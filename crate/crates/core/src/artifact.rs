//! Output plumbing shared by every stage: write-then-rename files that leave a
//! `.partial` behind on failure, and the provenance line (schema, config
//! hash, seed) carried by every CSV artifact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const ARTIFACT_SCHEMA: &str = "graphprobe-v1";

/// A file written under `<path>.partial` and renamed into place by
/// [`AtomicFile::commit`]. Dropping it uncommitted keeps the `.partial` file.
pub struct AtomicFile {
    writer: BufWriter<File>,
    partial: PathBuf,
    target: PathBuf,
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

impl AtomicFile {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let partial = partial_path(path);
        let file = File::create(&partial)?;
        Ok(Self {
            writer: BufWriter::new(file),
            partial,
            target: path.to_path_buf(),
        })
    }

    pub fn commit(mut self) -> Result<()> {
        self.writer.flush()?;
        std::fs::rename(&self.partial, &self.target)?;
        Ok(())
    }
}

impl Write for AtomicFile {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.writer.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.writer.flush()
    }
}

/// Hex SHA-256 of the value's canonical JSON form (map keys sorted).
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let bytes = serde_json::to_vec(&v)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub schema: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            schema: ARTIFACT_SCHEMA.into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# schema={} config_hash={} seed={}",
            self.schema, self.config_hash, self.seed
        )
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("# ")?;
        let mut schema = None;
        let mut hash = None;
        let mut seed = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "schema" => schema = Some(v.to_string()),
                "config_hash" => hash = Some(v.to_string()),
                "seed" => seed = v.parse().ok(),
                _ => {}
            }
        }
        Some(Self {
            schema: schema?,
            config_hash: hash?,
            seed: seed?,
        })
    }

    /// Reads the provenance line at the top of a CSV artifact.
    pub fn read_from(path: &Path) -> Result<Self> {
        let f = File::open(path)?;
        let mut first = String::new();
        BufReader::new(f).read_line(&mut first)?;
        let p = Self::parse_line(first.trim_end()).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "missing `# schema=... config_hash=... seed=...` provenance line".into(),
        })?;
        if p.schema != ARTIFACT_SCHEMA {
            return Err(Error::Version {
                expected: ARTIFACT_SCHEMA.into(),
                found: p.schema,
            });
        }
        Ok(p)
    }
}

/// CSV reader that skips `#` provenance/comment lines.
pub fn csv_reader(path: &Path, producer: &str) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput {
            path: path.to_path_buf(),
            producer: producer.to_string(),
        },
        _ => e.into(),
    })?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_file_stays_partial() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.csv");
        {
            let mut f = AtomicFile::create(&target).unwrap();
            writeln!(f, "half").unwrap();
        }
        assert!(!target.exists());
        assert!(partial_path(&target).exists());
        let mut f = AtomicFile::create(&target).unwrap();
        writeln!(f, "whole").unwrap();
        f.commit().unwrap();
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "whole\n");
        assert!(!partial_path(&target).exists());
    }

    #[test]
    fn provenance_line_round_trips() {
        let p = Provenance::new("abcd", 17);
        assert_eq!(Provenance::parse_line(&p.line()), Some(p));
        assert_eq!(Provenance::parse_line("id,label"), None);
    }

    #[test]
    fn hash_ignores_field_order() {
        #[derive(Serialize)]
        struct A {
            x: u32,
            y: u32,
        }
        #[derive(Serialize)]
        struct B {
            y: u32,
            x: u32,
        }
        assert_eq!(config_hash(&A { x: 1, y: 2 }).unwrap(), config_hash(&B { y: 2, x: 1 }).unwrap());
        assert_ne!(config_hash(&A { x: 1, y: 3 }).unwrap(), config_hash(&A { x: 1, y: 2 }).unwrap());
    }
}
