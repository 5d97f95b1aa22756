//! Synthetic graph corpora, graph-theoretic properties, small GNNs trained
//! from scratch, and ridge probes that measure how much of each property is
//! linearly readable from every layer's embeddings.

pub mod artifact;
pub mod cli;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod linalg;
pub mod nn;
pub mod probe;
pub mod props;

pub use error::{Error, Result};
