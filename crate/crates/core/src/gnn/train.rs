use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::batch::Batch;
use super::config::ModelConfig;
use super::model::{argmax_rows, Model};
use crate::artifact::{AtomicFile, Provenance};
use crate::error::{Error, Result};
use crate::graph::{Dataset, FeatureSpec, Split};
use crate::linalg::Matrix;
use crate::nn::{Adam, AdamConfig, ParamSet};

/// Graphs per evaluation batch (no gradients, so larger than training batches).
const EVAL_BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's mini-batches.
    pub loss: f64,
    /// Accuracy of the training-mode forward passes (dropout on).
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartStatus {
    Completed,
    StoppedAtPerfect,
    /// Non-finite loss; the restart is discarded.
    Aborted,
    /// Not run because an earlier restart already reached accuracy 1.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub status: RestartStatus,
    pub best_test_accuracy: Option<f64>,
    pub best_epoch: usize,
    #[serde(skip)]
    pub history: Vec<EpochRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    pub features: FeatureSpec,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub restart: usize,
    pub best_epoch: usize,
    /// History of the kept restart.
    pub history: Vec<EpochRecord>,
    pub restarts: Vec<RestartRecord>,
}

/// Precomputed per-graph features plus the split indices.
struct Prepared<'a> {
    dataset: &'a Dataset,
    features: Vec<Matrix>,
    train: Vec<usize>,
    test: Vec<usize>,
    test_batches: Vec<Batch>,
}

impl<'a> Prepared<'a> {
    fn new(dataset: &'a Dataset, spec: &FeatureSpec) -> Result<Self> {
        let train = dataset.indices(Split::Train);
        let test = dataset.indices(Split::Test);
        if train.is_empty() || test.is_empty() {
            return Err(Error::contract("training needs non-empty train and test splits"));
        }
        if let Some(g) = dataset.graphs.iter().find(|g| g.label.is_none()) {
            return Err(Error::contract(format!("graph {} has no label", g.id)));
        }
        let features = dataset
            .graphs
            .iter()
            .map(|g| spec.build(g))
            .collect::<Result<Vec<_>>>()?;
        let mut p = Self {
            dataset,
            features,
            train,
            test,
            test_batches: Vec::new(),
        };
        p.test_batches = p
            .test
            .chunks(EVAL_BATCH)
            .map(|c| p.batch(c))
            .collect::<Result<_>>()?;
        Ok(p)
    }

    fn batch(&self, idx: &[usize]) -> Result<Batch> {
        let graphs: Vec<_> = idx.iter().map(|&i| &self.dataset.graphs[i]).collect();
        let feats: Vec<_> = idx.iter().map(|&i| &self.features[i]).collect();
        Batch::new(&graphs, &feats)
    }
}

fn accuracy(model: &Model, batches: &[Batch]) -> Result<f64> {
    let mut correct = 0;
    let mut total = 0;
    for b in batches {
        let pred = model.predict(b)?;
        correct += pred.iter().zip(&b.labels).filter(|(p, y)| p == y).count();
        total += b.len();
    }
    Ok(correct as f64 / total as f64)
}

/// Accuracy of `model` on one split of `dataset`.
pub fn evaluate(model: &Model, dataset: &Dataset, spec: &FeatureSpec, split: Split) -> Result<f64> {
    let p = Prepared::new(dataset, spec)?;
    let idx = if split == Split::Test { &p.test } else { &p.train };
    let batches = idx.chunks(EVAL_BATCH).map(|c| p.batch(c)).collect::<Result<Vec<_>>>()?;
    accuracy(model, &batches)
}

struct RestartOutcome {
    record: RestartRecord,
    best: Option<(ParamSet, f64)>,
}

fn run_restart(config: &ModelConfig, data: &Prepared, feature_dim: usize, restart: usize) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let mut model = Model::new(config.clone(), feature_dim, &mut rng)?;
    let mut adam = Adam::new(
        AdamConfig {
            lr: config.lr,
            weight_decay: config.weight_decay,
            decoupled: config.decoupled_weight_decay,
            ..AdamConfig::default()
        },
        model.params.values(),
    );
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(ParamSet, f64)> = None;
    let mut best_epoch = 0;
    let mut status = RestartStatus::Completed;
    if config.epochs == 0 {
        let acc = accuracy(&model, &data.test_batches)?;
        best = Some((model.params.clone(), acc));
    }
    let mut order = data.train.clone();
    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for chunk in order.chunks(config.batch_size) {
            let batch = data.batch(chunk)?;
            let mut pass = model.forward(&batch, true, &mut rng)?;
            correct += argmax_rows(pass.tape.value(pass.logits))
                .iter()
                .zip(&batch.labels)
                .filter(|(p, y)| p == y)
                .count();
            let loss = pass.tape.softmax_cross_entropy(pass.logits, &batch.labels)?;
            let l = pass.tape.value(loss).data()[0];
            if !l.is_finite() {
                log::warn!(
                    "{} restart {restart}: non-finite loss at epoch {epoch}; restart aborted",
                    config.arch
                );
                status = RestartStatus::Aborted;
                break 'epochs;
            }
            loss_sum += l * batch.len() as f64;
            pass.tape.backward(loss)?;
            let grads = model.params.grads(&pass.tape, &pass.params);
            adam.step(model.params.values_mut(), &grads)?;
        }
        let test_accuracy = accuracy(&model, &data.test_batches)?;
        history.push(EpochRecord {
            epoch,
            loss: loss_sum / order.len() as f64,
            train_accuracy: correct as f64 / order.len() as f64,
            test_accuracy,
        });
        if best.as_ref().is_none_or(|(_, b)| test_accuracy > *b) {
            best = Some((model.params.clone(), test_accuracy));
            best_epoch = epoch;
        }
        if config.stop_at_perfect && test_accuracy >= 1.0 {
            status = RestartStatus::StoppedAtPerfect;
            break;
        }
    }
    if status == RestartStatus::Aborted {
        best = None;
    }
    Ok(RestartOutcome {
        record: RestartRecord {
            restart,
            status,
            best_test_accuracy: best.as_ref().map(|(_, a)| *a),
            best_epoch,
            history,
        },
        best,
    })
}

/// Trains `config.restarts` independently initialised models and keeps the
/// one with the highest test accuracy (first on ties), each restart
/// checkpointed at its best epoch.
pub fn train(config: &ModelConfig, dataset: &Dataset, spec: &FeatureSpec) -> Result<TrainedModel> {
    config.validate()?;
    let data = Prepared::new(dataset, spec)?;
    let feature_dim = spec.width_for(&dataset.graphs);
    let mut records = Vec::with_capacity(config.restarts);
    let mut kept: Option<(usize, ParamSet, f64)> = None;
    for restart in 0..config.restarts {
        if config.stop_at_perfect && kept.as_ref().is_some_and(|(_, _, a)| *a >= 1.0) {
            records.push(RestartRecord {
                restart,
                status: RestartStatus::Skipped,
                best_test_accuracy: None,
                best_epoch: 0,
                history: Vec::new(),
            });
            continue;
        }
        let out = run_restart(config, &data, feature_dim, restart)?;
        log::info!(
            "{} restart {restart}: {:?}, best test accuracy {:?} at epoch {}",
            config.arch,
            out.record.status,
            out.record.best_test_accuracy,
            out.record.best_epoch
        );
        if let Some((params, acc)) = out.best {
            if kept.as_ref().is_none_or(|(_, _, a)| acc > *a) {
                kept = Some((restart, params, acc));
            }
        }
        records.push(out.record);
    }
    let Some((restart, params, test_accuracy)) = kept else {
        return Err(Error::Runtime(format!(
            "all {} restarts of {} aborted with non-finite loss",
            config.restarts, config.arch
        )));
    };
    let model = Model {
        config: config.clone(),
        feature_dim,
        params,
    };
    let train_batches = data
        .train
        .chunks(EVAL_BATCH)
        .map(|c| data.batch(c))
        .collect::<Result<Vec<_>>>()?;
    let train_accuracy = accuracy(&model, &train_batches)?;
    let kept_record = &records[restart];
    Ok(TrainedModel {
        test_accuracy,
        train_accuracy,
        restart,
        best_epoch: kept_record.best_epoch,
        history: kept_record.history.clone(),
        model,
        features: *spec,
        restarts: records,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    config_hash: String,
    seed: u64,
    config: ModelConfig,
    features: FeatureSpec,
    feature_dim: usize,
    test_accuracy: f64,
    train_accuracy: f64,
    restart: usize,
    best_epoch: usize,
    restarts: Vec<RestartRecord>,
    weights: serde_json::Value,
}

impl TrainedModel {
    pub fn save(&self, path: &Path, provenance: &Provenance) -> Result<()> {
        let file = ModelFile {
            schema: provenance.schema.clone(),
            config_hash: provenance.config_hash.clone(),
            seed: provenance.seed,
            config: self.model.config.clone(),
            features: self.features,
            feature_dim: self.model.feature_dim,
            test_accuracy: self.test_accuracy,
            train_accuracy: self.train_accuracy,
            restart: self.restart,
            best_epoch: self.best_epoch,
            restarts: self.restarts.clone(),
            weights: serde_json::from_str(&self.model.params.to_json()?)?,
        };
        let mut f = AtomicFile::create(path)?;
        serde_json::to_writer(&mut f, &file)?;
        f.commit()
    }

    /// Loads a model file; histories are not stored and come back empty.
    pub fn load(path: &Path) -> Result<(Self, Provenance)> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingInput {
                path: path.to_path_buf(),
                producer: "graphprobe train".into(),
            },
            _ => e.into(),
        })?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if file.schema != crate::artifact::ARTIFACT_SCHEMA {
            return Err(Error::Version {
                expected: crate::artifact::ARTIFACT_SCHEMA.into(),
                found: file.schema,
            });
        }
        // a throwaway generator: every value is overwritten by the checkpoint
        let mut model = Model::new(file.config.clone(), file.feature_dim, &mut ChaCha8Rng::seed_from_u64(0))?;
        model.params.load_json(&file.weights.to_string())?;
        Ok((
            Self {
                model,
                features: file.features,
                test_accuracy: file.test_accuracy,
                train_accuracy: file.train_accuracy,
                restart: file.restart,
                best_epoch: file.best_epoch,
                history: Vec::new(),
                restarts: file.restarts,
            },
            Provenance {
                schema: file.schema,
                config_hash: file.config_hash,
                seed: file.seed,
            },
        ))
    }

    /// `restart,epoch,loss,train_accuracy,test_accuracy` for every restart run.
    pub fn write_history(&self, path: &Path, provenance: &Provenance) -> Result<()> {
        let mut f = AtomicFile::create(path)?;
        writeln!(f, "{}", provenance.line())?;
        writeln!(f, "restart,epoch,loss,train_accuracy,test_accuracy")?;
        for r in &self.restarts {
            for e in &r.history {
                writeln!(
                    f,
                    "{},{},{},{},{}",
                    r.restart, e.epoch, e.loss, e.train_accuracy, e.test_accuracy
                )?;
            }
        }
        f.commit()
    }
}
