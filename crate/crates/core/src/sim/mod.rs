//! Simulation engine: the fixed-step loop, telemetry, metrics and
//! controller comparison.

mod compare;
mod metrics;
mod run;
mod telemetry;

pub use compare::{compare_controllers, ComparisonReport, VariantOutcome, VariantReport};
pub use metrics::{
    metric_span, peak_to_peak, regulation_metrics, regulation_metrics_with, EregMetrics,
    RegulationMetrics,
};
pub use run::{
    build_plant, oracle_angles, run_scenario, simulate, AbortInfo, RunOptions, RunResult,
    ValveDrive,
};
pub use telemetry::{
    emit_telemetry, format_sig9, telemetry_header, write_telemetry, EregFrame, Events,
    TelemetryFrame,
};
