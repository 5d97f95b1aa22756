use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Tape, Var};
use crate::artifact::AtomicFile;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Named trainable matrices, in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    shape: [usize; 2],
    values: Vec<f64>,
}

/// Uniform Glorot initialisation: `U(−a, a)` with `a = √(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-a..=a)).collect();
    Matrix::from_vec(rows, cols, data)
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a parameter and returns its index.
    pub fn add(&mut self, name: impl Into<String>, value: Matrix) -> usize {
        let name = name.into();
        assert!(self.index(&name).is_none(), "duplicate parameter {name}");
        self.names.push(name);
        self.values.push(value);
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize) -> &Matrix {
        &self.values[i]
    }

    pub fn by_name(&self, name: &str) -> Option<&Matrix> {
        self.index(name).map(|i| &self.values[i])
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Matrix] {
        &mut self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().map(|m| m.data().len()).sum()
    }

    /// Places every parameter on the tape as a trainable leaf.
    pub fn bind(&self, tape: &mut Tape) -> Vec<Var> {
        self.values.iter().map(|m| tape.param(m.clone())).collect()
    }

    /// Gradients for the bound variables; parameters the loss never reached
    /// get zeros.
    pub fn grads(&self, tape: &Tape, vars: &[Var]) -> Vec<Matrix> {
        vars.iter()
            .zip(&self.values)
            .map(|(v, m)| tape.grad(*v).cloned().unwrap_or_else(|| Matrix::zeros(m.rows(), m.cols())))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let map: BTreeMap<&str, Entry> = self
            .names
            .iter()
            .zip(&self.values)
            .map(|(n, m)| {
                (
                    n.as_str(),
                    Entry {
                        shape: [m.rows(), m.cols()],
                        values: m.data().to_vec(),
                    },
                )
            })
            .collect();
        Ok(serde_json::to_string(&map)?)
    }

    /// Loads values into an already-shaped set, checking names and shapes.
    pub fn load_json(&mut self, json: &str) -> Result<()> {
        let map: BTreeMap<String, Entry> = serde_json::from_str(json)?;
        if map.len() != self.names.len() {
            return Err(Error::Mismatch(format!(
                "checkpoint has {} parameters, model has {}",
                map.len(),
                self.names.len()
            )));
        }
        for (name, value) in self.names.iter().zip(self.values.iter_mut()) {
            let e = map
                .get(name)
                .ok_or_else(|| Error::Mismatch(format!("checkpoint lacks parameter {name}")))?;
            if e.shape != [value.rows(), value.cols()] {
                return Err(Error::Mismatch(format!(
                    "parameter {name}: checkpoint shape {:?}, model shape {:?}",
                    e.shape,
                    value.shape()
                )));
            }
            *value = Matrix::try_from_vec(e.shape[0], e.shape[1], e.values.clone())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = AtomicFile::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.commit()
    }
}
