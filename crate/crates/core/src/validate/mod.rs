//! Checks of the frequency-divider mappings against simulated trajectories.

mod compare;
mod frequency;
mod report;
mod sweep;

pub use compare::{
    compare_methods, compare_trajectory, median, write_traces_csv, BranchTraces, CompareConfig, Comparison,
    EntityError, ErrorReport, NodeTraces, SourceTraces,
};
pub use frequency::{
    error_index, error_index_over, extract_frequency, windowed_rate, FrequencyTrace, TraceLabel, DEFAULT_WINDOW,
};
pub use report::{
    coefficient_report, coefficient_report_for_outputs, with_gfl_output, CoefficientReport, FactorSet, PointReport,
};
pub use sweep::{run_sweep, BoxStats, SweepGrid, SweepResult, SweepRun};
