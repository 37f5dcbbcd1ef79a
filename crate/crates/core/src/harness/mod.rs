//! Experiment harness: benchmark problems, run configuration, convergence
//! studies and artifact output.

pub mod config;
pub mod exact;
pub mod output;
pub mod selftest;
pub mod study;

pub use config::{presets, InitialSpec, ModelSpec, Problem, RunConfig, SnapshotFormat};
pub use exact::{
    exact_kdv_one_soliton, exact_kdv_two_soliton, exact_nls_plane_wave, kdv_state,
    nls_singular_initial, sg_initial, wrap_into, PlaneWave, SgInitial,
};
pub use output::{write_comparison, write_run, write_study};
pub use selftest::{run_selftest, Check};
pub use study::{
    compare_schemes, convergence_study, error_table, observed_order, run_scheme, ErrorRow,
    ExperimentReport, IterationRow, RunRecord, StepIterations,
};
