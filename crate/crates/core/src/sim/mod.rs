//! Monte-Carlo harness: source simulation, experiments, table and sweep.

mod experiment;
mod report;
mod source;
mod sweep;
mod table;

pub use experiment::{
    build_codes, run_experiment, Averages, CodeDesign, Counters, ExperimentCodes, ExperimentConfig, Mode, RunReport,
    Targets, TrialReport,
};
pub use report::{
    json_document, locus_csv, preamble, run_report_csv, run_report_json, sweep_csv, table_csv, SCHEMA_VERSION,
};
pub use source::{derive_seed, simulate_source};
pub use sweep::{sweep_rate_distortion, CurvePoint, MeasuredPoint, SweepCurve};
pub use table::{
    published_rows, published_theory, reproduce_table, EmpiricalColumns, OptimizerComparison, PublishedRow,
    TableRow, PUBLISHED_ROWS,
};
