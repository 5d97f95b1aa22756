use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{Arch, EmbeddingFormat, ModelConfig, Regularization};
use crate::graph::{FeatureSpec, GridHouseParams};
use crate::nn::PoolKind;
use crate::probe::ProbeConfig;
use crate::props::PropsConfig;

/// The whole experiment in one TOML file. Every section is optional and
/// unknown keys are rejected.
///
/// ```toml
/// seed = 0
///
/// [dataset]
/// count = 2000
///
/// [features]
/// dim = 10
///
/// [model]            # `train`: which model; `all`: overrides for every variant
/// arch = "gin"
/// regularization = "control"
/// epochs = 200
///
/// [[roster]]         # `all`: replaces the default seven variants
/// arch = "gat"
/// restarts = 5
///
/// [probe]
/// aggregation = "norm_sort"
///
/// [output]
/// embeddings_format = "binary"
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seeds generation, property sampling and (unless overridden) training.
    pub seed: u64,
    pub dataset: GridHouseParams,
    pub features: FeatureSpec,
    pub props: PropsConfig,
    pub model: ModelSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roster: Option<Vec<ModelSection>>,
    pub probe: ProbeConfig,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub embeddings_format: EmbeddingFormat,
    /// Also probe node-level layers against the local properties.
    pub node_probes: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            embeddings_format: EmbeddingFormat::Binary,
            node_probes: true,
        }
    }
}

/// A model choice plus optional overrides of its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arch: Option<Arch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularization: Option<Regularization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gnn_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mlp_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mlp_hidden: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooling: Option<PoolKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoupled_weight_decay: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learnable_eps: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_at_perfect: Option<bool>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if let Some(v) = $src.$f.clone() { $dst.$f = v; } )*
    };
}

impl ModelSection {
    pub fn variant(arch: Arch, regularization: Regularization) -> Self {
        Self {
            arch: Some(arch),
            regularization: Some(regularization),
            ..Self::default()
        }
    }

    /// Fields set here win over those set in `base`.
    pub fn over(&self, base: &ModelSection) -> ModelSection {
        macro_rules! pick {
            ($($f:ident),*) => { ModelSection { $( $f: self.$f.clone().or_else(|| base.$f.clone()), )* } };
        }
        pick!(
            name, arch, regularization, gnn_layers, mlp_layers, hidden_dim, heads, mlp_hidden, pooling, dropout,
            weight_decay, decoupled_weight_decay, learnable_eps, lr, batch_size, epochs, restarts, seed,
            stop_at_perfect
        )
    }

    /// The final model configuration: architecture defaults, then the
    /// regularisation variant, then explicit overrides. `seed` applies when
    /// the section sets none.
    pub fn resolve(&self, seed: u64) -> Result<(String, ModelConfig)> {
        let arch = self
            .arch
            .ok_or_else(|| Error::Config("model.arch is required (gcn, gin or gat)".into()))?;
        let reg = self.regularization.unwrap_or_default();
        let mut c = ModelConfig::variant(arch, reg);
        c.seed = seed;
        overlay!(
            c, self, gnn_layers, mlp_layers, hidden_dim, heads, mlp_hidden, pooling, dropout, weight_decay,
            decoupled_weight_decay, learnable_eps, lr, batch_size, epochs, restarts, seed, stop_at_perfect
        );
        c.validate()?;
        let name = self
            .name
            .clone()
            .unwrap_or_else(|| default_name(arch, reg));
        if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
            return Err(Error::Config(format!(
                "model name `{name}` must be non-empty and use only letters, digits, `_` or `-`"
            )));
        }
        Ok((name, c))
    }
}

fn default_name(arch: Arch, reg: Regularization) -> String {
    match (arch, reg) {
        // the roster has a single GAT, trained without regularisation
        (Arch::Gat, Regularization::Control) => "gat".into(),
        _ => format!("{}_{}", arch, reg.as_str()),
    }
}

/// The seven-model Grid-House roster: GCN and GIN under control, L2 and
/// dropout, and GAT.
pub fn default_roster() -> Vec<ModelSection> {
    let mut out = Vec::new();
    for arch in [Arch::Gcn, Arch::Gin] {
        for reg in [Regularization::Control, Regularization::L2, Regularization::Dropout] {
            out.push(ModelSection::variant(arch, reg));
        }
    }
    out.push(ModelSection::variant(Arch::Gat, Regularization::Control));
    out
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("config file {} not found", path.display())),
            _ => e.into(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load_or_default(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.validate()?;
        let names: Vec<String> = self.variants()?.into_iter().map(|v| v.0).collect();
        if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
            return Err(Error::Config(format!("roster has two models named `{}`", dup.1)));
        }
        Ok(())
    }

    /// The `all` roster, each entry layered over `[model]`.
    pub fn variants(&self) -> Result<Vec<(String, ModelConfig)>> {
        let roster = self.roster.clone().unwrap_or_else(default_roster);
        if roster.is_empty() {
            return Err(Error::Config("roster must list at least one model".into()));
        }
        let mut shared = self.model.clone();
        // the shared section's identity fields do not leak into roster entries
        shared.name = None;
        shared.arch = None;
        shared.regularization = None;
        roster.iter().map(|v| v.over(&shared).resolve(self.seed)).collect()
    }

    /// The single `[model]` of the `train` command.
    pub fn train_model(&self) -> Result<(String, ModelConfig)> {
        self.model.resolve(self.seed)
    }

    /// Hash of everything that shapes results; `[output]` only chooses
    /// file formats and is left out.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = OutputSection::default();
        crate::artifact::config_hash(&c)
    }
}
