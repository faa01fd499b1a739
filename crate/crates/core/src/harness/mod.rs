//! Data ingestion, penalty construction and experiment orchestration.

pub mod config;
pub mod experiment;
pub mod graph;
pub mod libsvm;
pub mod synthetic;
pub mod trace;

pub use config::{BetaChoice, DataSource, ExperimentConfig, GraphSource, ProblemKind, ThetaChoice};
pub use experiment::{run_experiment, ExperimentData, ExperimentReport, RunOutcome};
pub use graph::{build_graph_matrix, correlation_graph, GraphSpec};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use trace::{read_trace, read_trace_file, write_trace, write_trace_file};
