//! Linear probes over frozen embeddings: aggregation of node-level layers,
//! cross-validated ridge regression scored by R², and the probing reports.

mod aggregate;
mod report;
mod ridge;
mod run;

pub use aggregate::{aggregate_mean, aggregate_norm_sort, Aggregation};
pub use report::{
    correlation_report, pearson, read_probes_csv, write_probes_csv, write_report, CorrelationReport, ModelSummary,
    ProbeMeta, ProbesFile, GLOBAL_LAYER, MIN_CORRELATION_MODELS, PROBES_HEADER,
};
pub use ridge::{
    display_r2, fit_ridge, fit_ridge_grouped, r2, solve_ridge, RidgeFit, Standardizer, DEFAULT_FOLDS,
    DEFAULT_LAMBDAS, DISPLAY_FLOOR,
};
pub use run::{
    graph_feature_matrix, probe_features, probe_graph_level, probe_node_level, ProbeConfig, ProbeFeatureMatrix,
    ProbeResult, ProbeStatus, MIN_TRAIN_ROWS,
};
