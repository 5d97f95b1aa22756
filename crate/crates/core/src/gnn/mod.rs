//! GCN, GIN and GAT graph classifiers built on the `nn` tape, their training
//! loop with restarts, and per-layer embedding extraction for probing.

mod batch;
mod config;
mod extract;
mod model;
mod train;

pub use batch::{normalize_adjacency, Batch};
pub use config::{Arch, ModelConfig, Regularization, DEFAULT_DROPOUT};
pub use extract::{
    extract_embeddings, read_embeddings, read_manifest, write_embeddings, EmbeddingFormat, EmbeddingInfo,
    EmbeddingManifest, EmbeddingSet, GraphEmbedding, LayerEmbeddings, ManifestLayer, EMBEDDING_MAGIC, EMBEDDING_VERSION,
    MANIFEST_FILE,
};
pub use model::{argmax_rows, ActivationTrace, ForwardPass, Level, Model, TraceLayer, ATTENTION_SLOPE};
pub use train::{evaluate, train, EpochRecord, RestartRecord, RestartStatus, TrainedModel};
