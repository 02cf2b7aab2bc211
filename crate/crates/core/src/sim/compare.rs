use rayon::prelude::*;

use super::metrics::{regulation_metrics, RegulationMetrics};
use super::run::run_scenario;
use super::telemetry::Events;
use crate::control::ControllerVariant;
use crate::scenario::ScenarioConfig;

/// One variant's outcome. A failed run keeps its error message so the
/// other variants still report.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantReport {
    pub variant: ControllerVariant,
    pub outcome: Result<VariantOutcome, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutcome {
    pub metrics: RegulationMetrics,
    pub events: Events,
    pub final_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub scenario: String,
    pub variants: Vec<VariantReport>,
}

/// Runs every variant on the same plant and seed, in parallel.
pub fn compare_controllers(config: &ScenarioConfig, variants: &[ControllerVariant]) -> ComparisonReport {
    let reports = variants
        .par_iter()
        .map(|&variant| {
            let cfg = config.with_variant(variant);
            let outcome = run_scenario(&cfg)
                .map(|frames| VariantOutcome {
                    metrics: regulation_metrics(&frames, &cfg),
                    events: frames.last().map(|f| f.events).unwrap_or_default(),
                    final_time: frames.last().map(|f| f.time).unwrap_or(0.0),
                })
                .map_err(|e| e.to_string());
            VariantReport { variant, outcome }
        })
        .collect();
    ComparisonReport {
        scenario: config.name.clone(),
        variants: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{baseline_file, Mode};

    #[test]
    fn duplicate_variant_gives_identical_report() {
        let mut c = baseline_file(Mode::Staticfire).resolve().unwrap();
        c.duration = 2.5;
        let v = ControllerVariant::PidOnly;
        let r = compare_controllers(&c, &[v, ControllerVariant::FfDynamic, v]);
        assert_eq!(r.variants.len(), 3);
        assert_eq!(r.variants[0], r.variants[2]);
        assert_eq!(r.variants[1].variant, ControllerVariant::FfDynamic);
        assert!(r.variants.iter().all(|v| v.outcome.is_ok()));
    }

    #[test]
    fn failed_variant_does_not_sink_the_others() {
        let mut c = baseline_file(Mode::Staticfire).resolve().unwrap();
        c.duration = 1.0;
        c.timing.dt_primary = 0.0125;
        let r = compare_controllers(&c, &ControllerVariant::ALL);
        assert!(r.variants.iter().all(|v| v.outcome.is_err()));
        assert_eq!(r.variants.len(), 3);
    }
}
