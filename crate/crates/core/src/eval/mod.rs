//! Evaluation harness: synthetic workloads, anomaly injection, k-fold
//! cross-validation and training-subset studies.

mod kfold;
mod report;
mod workload;

pub use kfold::{kfold_evaluate, subset_study, EvalError, KFoldOptions};
pub use report::{EvaluationReport, ReportRow, METRICS};
pub use workload::{
    generate_corpus, inject_anomaly, AnomalyError, AnomalySpec, DurationDist, OperationSpec, Repetition, WorkloadError,
    WorkloadSpec, MAX_DEPTH,
};
