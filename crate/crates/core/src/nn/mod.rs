//! A small dense autodiff engine: tape-recorded primitives over `f64`
//! matrices, sparse propagation, fused multi-head graph attention, Adam, and
//! JSON weight checkpoints.

mod adam;
mod gradcheck;
mod params;
mod sparse;
mod tape;

pub use adam::{Adam, AdamConfig};
pub use gradcheck::{check_gradients, relative_error, GradCheck, DEFAULT_STEP, RELATIVE_FLOOR};
pub use params::{glorot_uniform, ParamSet};
pub use sparse::SparseMatrix;
pub use tape::{softmax_rows, AttentionSpec, PoolKind, Segments, Tape, Var};
