//! Fits of the empirical valve and feedforward constants from logged flow
//! data, plus the readers and writers for the files involved.

mod fit;
mod io;

pub use fit::{
    cv_from_sample, cv_objective, cv_objective_alpha_gradient, fit_choked_constant, fit_cv_curve,
    fit_gamma, steady_state_records, ChokedFit, CvFit, FlowSample, GammaFit, GammaRecord, Phase,
    STEADY_HOLD, STEADY_THRESHOLD,
};
pub use io::{read_flow_samples, read_telemetry, write_fit_report, FitReport, FIT_SCHEMA_VERSION};
