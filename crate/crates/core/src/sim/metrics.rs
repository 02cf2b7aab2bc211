//! Regulation error statistics from telemetry.
//!
//! Error is `setpoint − pressure` in bar. Accuracy figures (max, rms,
//! settling) use frames after the startup window; the oscillation figure
//! uses frames inside the early window. Everything stops at the first
//! depletion or abort, after which the setpoint is no longer reachable.

use serde::Serialize;

use super::telemetry::TelemetryFrame;
use crate::scenario::{EregId, MetricsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EregMetrics {
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Time after which |error| stays inside the settle band, s.
    pub settle_time: f64,
    /// Largest excursion past the setpoint once the error has first changed
    /// sign, bar.
    pub overshoot: f64,
    /// Largest swing between successive turning points of the error inside
    /// the early window, bar.
    pub peak_oscillation_amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegulationMetrics {
    pub eregs: [EregMetrics; 4],
}

impl RegulationMetrics {
    pub fn get(&self, id: EregId) -> &EregMetrics {
        &self.eregs[id.index()]
    }
}

/// Frames up to (excluding) the first one flagged with a depletion or an
/// abort.
pub fn metric_span(frames: &[TelemetryFrame]) -> &[TelemetryFrame] {
    let end = frames
        .iter()
        .position(|f| !f.events.is_empty() && (f.events.any_depletion() || f.events.contains(super::Events::ABORT)))
        .unwrap_or(frames.len());
    &frames[..end]
}

/// Largest difference between successive turning points, counting the
/// first and last samples as turning points.
pub fn peak_to_peak(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut extrema = vec![values[0]];
    let mut dir = 0.0f64;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if dir != 0.0 && s != dir {
            extrema.push(w[0]);
        }
        dir = s;
    }
    extrema.push(values[values.len() - 1]);
    extrema
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

fn ereg_metrics(frames: &[TelemetryFrame], id: EregId, m: &MetricsConfig) -> EregMetrics {
    let span = metric_span(frames);
    let err = |f: &TelemetryFrame| f.ereg(id).error_bar();

    let steady: Vec<f64> = span
        .iter()
        .filter(|f| f.time >= m.startup_window)
        .map(err)
        .collect();
    let (max_abs_error, rms_error) = if steady.is_empty() {
        (0.0, 0.0)
    } else {
        let max = steady.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let rms = (steady.iter().map(|e| e * e).sum::<f64>() / steady.len() as f64).sqrt();
        (max, rms)
    };

    let band = m.settle_band / 1e5;
    let settle_time = match span.iter().rposition(|f| err(f).abs() > band) {
        None => 0.0,
        Some(i) if i + 1 < span.len() => span[i + 1].time,
        Some(i) => span[i].time,
    };

    let errors: Vec<f64> = span.iter().map(err).collect();
    let overshoot = match errors.iter().find(|e| **e != 0.0) {
        None => 0.0,
        Some(first) => {
            let s0 = first.signum();
            match errors.iter().position(|e| e.signum() == -s0 && *e != 0.0) {
                None => 0.0,
                Some(i) => errors[i..].iter().fold(0.0f64, |a, e| a.max(-s0 * e)),
            }
        }
    };

    let early: Vec<f64> = span
        .iter()
        .filter(|f| f.time <= m.early_window)
        .map(err)
        .collect();

    EregMetrics {
        max_abs_error,
        rms_error,
        settle_time,
        overshoot,
        peak_oscillation_amplitude: peak_to_peak(&early),
    }
}

pub fn regulation_metrics_with(frames: &[TelemetryFrame], m: &MetricsConfig) -> RegulationMetrics {
    RegulationMetrics {
        eregs: EregId::ALL.map(|id| ereg_metrics(frames, id, m)),
    }
}

pub fn regulation_metrics(
    frames: &[TelemetryFrame],
    config: &crate::scenario::ScenarioConfig,
) -> RegulationMetrics {
    regulation_metrics_with(frames, &config.metrics)
}
