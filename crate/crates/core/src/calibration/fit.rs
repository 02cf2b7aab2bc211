use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::fluids::{ValveModel, CRITICAL_PRESSURE_RATIO};
use crate::scenario::EregId;
use crate::sim::TelemetryFrame;
use crate::units::PA_PER_BAR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Gas,
    Liquid,
}

/// One steady flow measurement through a valve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    /// Degrees.
    pub valve_angle: f64,
    pub upstream_pressure: f64,
    pub downstream_pressure: f64,
    /// kg/s for gas, m³/s for liquid.
    pub flow: f64,
    pub fluid_density: f64,
    pub phase: Phase,
}

/// Flow coefficient implied by one sample. Gas samples need the choked
/// constant and must be choked.
pub fn cv_from_sample(s: &FlowSample, choked_constant: Option<f64>) -> Result<f64, FitError> {
    let finite = [
        s.valve_angle,
        s.upstream_pressure,
        s.downstream_pressure,
        s.flow,
        s.fluid_density,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !finite || !(0.0..=90.0).contains(&s.valve_angle) {
        return Err(FitError::Rejected("non-finite sample or angle outside [0, 90]".into()));
    }
    match s.phase {
        Phase::Liquid => {
            let dp = s.upstream_pressure - s.downstream_pressure;
            if !(dp > 0.0) {
                return Err(FitError::Rejected(format!("liquid sample with Δp = {dp} Pa")));
            }
            if !(s.fluid_density > 0.0) {
                return Err(FitError::Rejected("liquid sample without a density".into()));
            }
            Ok(s.flow / (dp / s.fluid_density).sqrt())
        }
        Phase::Gas => {
            let k = choked_constant
                .filter(|k| *k > 0.0)
                .ok_or_else(|| FitError::Rejected("gas sample needs a choked constant".into()))?;
            if !(s.upstream_pressure > 0.0) {
                return Err(FitError::Rejected("gas sample with no upstream pressure".into()));
            }
            if s.downstream_pressure / s.upstream_pressure >= CRITICAL_PRESSURE_RATIO {
                return Err(FitError::Rejected("gas sample is not choked".into()));
            }
            Ok(s.flow / (k * s.upstream_pressure))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvFit {
    /// SI flow factor per degree.
    pub alpha: f64,
    pub theta_zero: f64,
    pub residual_rms: f64,
    pub sample_count: usize,
}

/// `Σ (Cvᵢ − max(0, α(θᵢ − θ₀)))²`.
pub fn cv_objective(samples: &[(f64, f64)], alpha: f64, theta_zero: f64) -> f64 {
    samples
        .iter()
        .map(|&(theta, cv)| {
            let r = cv - alpha * (theta - theta_zero).max(0.0);
            r * r
        })
        .sum()
}

/// ∂/∂α of [`cv_objective`].
pub fn cv_objective_alpha_gradient(samples: &[(f64, f64)], alpha: f64, theta_zero: f64) -> f64 {
    samples
        .iter()
        .map(|&(theta, cv)| {
            let x = (theta - theta_zero).max(0.0);
            -2.0 * x * (cv - alpha * x)
        })
        .sum()
}

const GRID_STEP: f64 = 0.1;
const GRID_POINTS: usize = 900;

/// Least-squares `Cv(θ) = max(0, α(θ − θ₀))` from `(θ, Cv)` pairs: grid
/// search over θ₀ with the optimal α in closed form at each grid point.
/// Exact ties go to the smaller θ₀.
pub fn fit_cv_curve(samples: &[(f64, f64)]) -> Result<CvFit, FitError> {
    if samples.len() < 3 {
        return Err(FitError::Degenerate(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(t, c)| !t.is_finite() || !c.is_finite()) {
        return Err(FitError::Rejected("non-finite sample".into()));
    }
    let first = samples[0].0;
    if samples.iter().all(|(t, _)| *t == first) {
        return Err(FitError::Degenerate("all samples at one angle".into()));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..GRID_POINTS {
        let theta_zero = i as f64 * GRID_STEP;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(theta, cv) in samples {
            let x = (theta - theta_zero).max(0.0);
            sxy += x * cv;
            sxx += x * x;
        }
        if sxx == 0.0 {
            continue;
        }
        let alpha = sxy / sxx;
        if !(alpha > 0.0) {
            continue;
        }
        let obj = cv_objective(samples, alpha, theta_zero);
        if best.is_none_or(|(_, _, b)| obj < b) {
            best = Some((alpha, theta_zero, obj));
        }
    }
    let (alpha, theta_zero, obj) = best.ok_or_else(|| {
        FitError::Degenerate("no grid point gives a positive slope".into())
    })?;
    Ok(CvFit {
        alpha,
        theta_zero,
        residual_rms: (obj / samples.len() as f64).sqrt(),
        sample_count: samples.len(),
    })
}

/// Steady tank-regulator operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRecord {
    /// Frame time, s.
    pub time: f64,
    /// Degrees.
    pub angle: f64,
    pub tank_setpoint: f64,
    pub supply_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    pub residual_rms: f64,
    pub sample_count: usize,
}

/// Least-squares slope of `angle − θ₀` against `min(1, s_t/p_p)` through
/// the origin.
pub fn fit_gamma(records: &[GammaRecord], theta_zero: f64) -> Result<GammaFit, FitError> {
    let mut pts = Vec::with_capacity(records.len());
    for r in records {
        if !(r.supply_pressure > r.tank_setpoint && r.tank_setpoint > 0.0) {
            return Err(FitError::Rejected(format!(
                "record needs supply above setpoint ({} vs {} Pa)",
                r.supply_pressure, r.tank_setpoint
            )));
        }
        pts.push(((r.tank_setpoint / r.supply_pressure).min(1.0), r.angle - theta_zero));
    }
    let mut ratios: Vec<f64> = pts.iter().map(|p| p.0).collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if ratios.len() < 2 {
        return Err(FitError::Degenerate(format!(
            "need at least 2 distinct pressure ratios, got {}",
            ratios.len()
        )));
    }
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let gamma = sxy / sxx;
    let ss: f64 = pts.iter().map(|(x, y)| (y - gamma * x).powi(2)).sum();
    Ok(GammaFit {
        gamma,
        residual_rms: (ss / pts.len() as f64).sqrt(),
        sample_count: pts.len(),
    })
}

/// |error| below which a tank regulator counts as settled, Pa.
pub const STEADY_THRESHOLD: f64 = 0.25 * PA_PER_BAR;
/// How long the error must stay below the threshold, s.
pub const STEADY_HOLD: f64 = 0.5;

/// Frames where the given tank regulator has been within
/// [`STEADY_THRESHOLD`] for at least [`STEADY_HOLD`], as fit records.
/// Frames after a depletion or abort are ignored.
pub fn steady_state_records(frames: &[TelemetryFrame], id: EregId) -> Vec<GammaRecord> {
    let threshold = STEADY_THRESHOLD / PA_PER_BAR;
    let mut out = Vec::new();
    let mut since: Option<f64> = None;
    for f in crate::sim::metric_span(frames) {
        let e = f.ereg(id);
        if e.error_bar().abs() < threshold {
            let start = *since.get_or_insert(f.time);
            if f.time - start >= STEADY_HOLD - 1e-9 {
                out.push(GammaRecord {
                    time: f.time,
                    angle: e.valve_angle_deg,
                    tank_setpoint: e.setpoint_bar * PA_PER_BAR,
                    supply_pressure: f.supply_pressure_bar * PA_PER_BAR,
                });
            }
        } else {
            since = None;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChokedFit {
    /// kg/(s·Pa·SI Cv).
    pub k: f64,
    pub residual_rms: f64,
    pub sample_count: usize,
}

/// Least-squares slope of gas mass flow against `Cv(θ)·p_up` through the
/// origin, using choked gas samples only. `Cv` comes from the known valve
/// curve.
pub fn fit_choked_constant(samples: &[FlowSample], valve: &ValveModel) -> Result<ChokedFit, FitError> {
    let mut pts = Vec::new();
    for s in samples {
        if s.phase != Phase::Gas || !(s.upstream_pressure > 0.0) {
            continue;
        }
        if s.downstream_pressure / s.upstream_pressure >= CRITICAL_PRESSURE_RATIO {
            continue;
        }
        let cv = valve
            .cv(s.valve_angle)
            .map_err(|e| FitError::Rejected(e.to_string()))?;
        pts.push((cv * s.upstream_pressure, s.flow));
    }
    if pts.is_empty() {
        return Err(FitError::Degenerate("no choked gas samples".into()));
    }
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate("all choked samples have zero Cv".into()));
    }
    let k = pts.iter().map(|(x, y)| x * y).sum::<f64>() / sxx;
    let ss: f64 = pts.iter().map(|(x, y)| (y - k * x).powi(2)).sum();
    Ok(ChokedFit {
        k,
        residual_rms: (ss / pts.len() as f64).sqrt(),
        sample_count: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ff_tank, FeedforwardParams, DEFAULT_DP_FLOOR};
    use crate::fluids::{choked_gas_mass_flow, liquid_volumetric_flow};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synthetic(alpha: f64, theta_zero: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let theta = 90.0 * i as f64 / (n - 1) as f64;
                (theta, alpha * (theta - theta_zero).max(0.0))
            })
            .collect()
    }

    #[test]
    fn liquid_inverse_round_trips() {
        let valve = ValveModel::new(4e-6, 10.0, 78e5, 0.0).unwrap();
        let q = liquid_volumetric_flow(&valve, 30.0, 7e5, 1141.0).unwrap();
        let s = FlowSample {
            valve_angle: 30.0,
            upstream_pressure: 42e5,
            downstream_pressure: 35e5,
            flow: q,
            fluid_density: 1141.0,
            phase: Phase::Liquid,
        };
        let cv = cv_from_sample(&s, None).unwrap();
        assert!((cv - valve.cv(30.0).unwrap()).abs() <= 1e-15 * cv);
    }

    #[test]
    fn liquid_hand_value() {
        let s = FlowSample {
            valve_angle: 40.0,
            upstream_pressure: 8e5,
            downstream_pressure: 1e5,
            flow: 9.91e-4,
            fluid_density: 1141.0,
            phase: Phase::Liquid,
        };
        let cv = cv_from_sample(&s, None).unwrap();
        let hand = 9.91e-4 / (7e5f64 / 1141.0).sqrt();
        assert!((cv - hand).abs() < 1e-18);
        assert!((cv - 4.0e-5).abs() < 0.01e-5);
        assert_eq!(cv_from_sample(&FlowSample { flow: 0.0, ..s }, None).unwrap(), 0.0);
        let flat = FlowSample { downstream_pressure: 8e5, ..s };
        assert!(matches!(cv_from_sample(&flat, None), Err(FitError::Rejected(_))));
    }

    #[test]
    fn gas_inverse_round_trips() {
        let valve = ValveModel::new(6e-5, 10.0, 415e5, 2.6e-4).unwrap();
        let m = choked_gas_mass_flow(&valve, 25.0, 300e5).unwrap();
        let s = FlowSample {
            valve_angle: 25.0,
            upstream_pressure: 300e5,
            downstream_pressure: 42e5,
            flow: m,
            fluid_density: 0.0,
            phase: Phase::Gas,
        };
        let cv = cv_from_sample(&s, Some(valve.choked_constant)).unwrap();
        assert!(((cv - valve.cv(25.0).unwrap()) / cv).abs() < 1e-12);
        assert!(cv_from_sample(&s, None).is_err());
        let unchoked = FlowSample { downstream_pressure: 200e5, ..s };
        assert!(cv_from_sample(&unchoked, Some(valve.choked_constant)).is_err());
    }

    #[test]
    fn recovers_noiseless_curve() {
        for (alpha, theta_zero) in [(4e-6, 10.0), (2.4e-5, 12.34), (1e-6, 0.0), (3e-6, 33.3)] {
            let fit = fit_cv_curve(&synthetic(alpha, theta_zero, 46)).unwrap();
            assert!(((fit.alpha - alpha) / alpha).abs() < 0.01, "{fit:?}");
            assert!((fit.theta_zero - theta_zero).abs() <= 0.1 + 1e-9, "{fit:?}");
        }
    }

    #[test]
    fn on_grid_truth_is_exact() {
        let fit = fit_cv_curve(&synthetic(5e-6, 8.0, 31)).unwrap();
        assert!((fit.theta_zero - 8.0).abs() < 1e-9);
        let regen = synthetic(fit.alpha, fit.theta_zero, 31);
        for ((_, a), (_, b)) in synthetic(5e-6, 8.0, 31).iter().zip(&regen) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-30));
        }
        assert!(fit.residual_rms < 1e-15);
    }

    #[test]
    fn dead_band_points_do_not_bias_slope() {
        let mut data = synthetic(4e-6, 20.0, 19);
        let without = fit_cv_curve(&data.iter().copied().filter(|(t, _)| *t > 20.0).collect::<Vec<_>>());
        data.extend([(2.0, 0.0), (7.0, 0.0), (15.0, 0.0)]);
        let with = fit_cv_curve(&data).unwrap();
        assert!(((with.alpha - 4e-6) / 4e-6).abs() < 1e-9);
        assert!((with.theta_zero - 20.0).abs() < 1e-9);
        assert!(without.is_ok());
    }

    #[test]
    fn single_angle_is_degenerate() {
        let data = vec![(30.0, 1e-5), (30.0, 1.1e-5), (30.0, 0.9e-5)];
        assert!(matches!(fit_cv_curve(&data), Err(FitError::Degenerate(_))));
        assert!(matches!(fit_cv_curve(&data[..2]), Err(FitError::Degenerate(_))));
    }

    #[test]
    fn residual_tracks_noise_level() {
        let (alpha, theta_zero) = (4e-6, 10.0);
        let sigma = 2e-6;
        let noise = Normal::new(0.0, sigma).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<_> = synthetic(alpha, theta_zero, 100)
                .into_iter()
                .map(|(t, c)| (t, c + noise.sample(&mut rng)))
                .collect();
            let fit = fit_cv_curve(&data).unwrap();
            let ratio = fit.residual_rms / sigma;
            assert!((1.0 / 1.5..1.5).contains(&ratio), "seed {seed}: {ratio}");
            // the true parameters lie on the grid, so the fit cannot lose to them
            assert!(cv_objective(&data, fit.alpha, fit.theta_zero) <= cv_objective(&data, alpha, theta_zero));
        }
    }

    proptest! {
        #[test]
        fn alpha_gradient_matches_finite_difference(
            alpha in 1e-6f64..1e-4, theta_zero in 0.0f64..40.0, seed in 0u64..1000
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 1e-5).unwrap();
            let data: Vec<_> = synthetic(3e-5, 12.0, 25)
                .into_iter()
                .map(|(t, c)| (t, c + noise.sample(&mut rng)))
                .collect();
            let h = alpha * 1e-4;
            let fd = (cv_objective(&data, alpha + h, theta_zero) - cv_objective(&data, alpha - h, theta_zero)) / (2.0 * h);
            let an = cv_objective_alpha_gradient(&data, alpha, theta_zero);
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-30), "{fd} vs {an}");
        }

        #[test]
        fn fitted_curve_regenerates_data(alpha in 1e-6f64..1e-4, grid_index in 0usize..500) {
            let theta_zero = grid_index as f64 * 0.1;
            let data = synthetic(alpha, theta_zero, 37);
            let fit = fit_cv_curve(&data).unwrap();
            for &(t, c) in &data {
                let regen = fit.alpha * (t - fit.theta_zero).max(0.0);
                prop_assert!((regen - c).abs() <= 1e-9 * c.abs().max(alpha));
            }
        }
    }

    fn ff(gamma: f64) -> FeedforwardParams {
        FeedforwardParams {
            gamma,
            nominal_flow: 0.0,
            fluid_density: 0.0,
            alpha: 1.0,
            theta_zero: 10.0,
            dp_floor: DEFAULT_DP_FLOOR,
        }
    }

    #[test]
    fn gamma_from_feedforward_records_is_exact() {
        let params = ff(73.25);
        let records: Vec<_> = [310e5, 250e5, 180e5, 120e5, 90e5]
            .iter()
            .map(|&p| GammaRecord {
                time: 0.0,
                angle: ff_tank(&params, 42e5, p),
                tank_setpoint: 42e5,
                supply_pressure: p,
            })
            .collect();
        let fit = fit_gamma(&records, 10.0).unwrap();
        assert!(((fit.gamma - 73.25) / 73.25).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn gamma_needs_two_ratios() {
        let r = GammaRecord {
            time: 0.0,
            angle: 20.0,
            tank_setpoint: 42e5,
            supply_pressure: 300e5,
        };
        assert!(matches!(fit_gamma(&[r, r, r], 10.0), Err(FitError::Degenerate(_))));
        let bad = GammaRecord { supply_pressure: 40e5, ..r };
        assert!(matches!(fit_gamma(&[r, bad], 10.0), Err(FitError::Rejected(_))));
    }

    #[test]
    fn choked_constant_exact_and_ignores_zero_flow() {
        let valve = ValveModel::new(6e-5, 10.0, 415e5, 2.6e-4).unwrap();
        let mut samples: Vec<_> = [(20.0, 300e5), (45.0, 200e5), (80.0, 120e5), (60.0, 250e5)]
            .iter()
            .map(|&(a, p)| FlowSample {
                valve_angle: a,
                upstream_pressure: p,
                downstream_pressure: 42e5,
                flow: choked_gas_mass_flow(&valve, a, p).unwrap(),
                fluid_density: 0.0,
                phase: Phase::Gas,
            })
            .collect();
        let fit = fit_choked_constant(&samples, &valve).unwrap();
        assert!(((fit.k - 2.6e-4) / 2.6e-4).abs() < 1e-12);
        samples.push(FlowSample { valve_angle: 5.0, flow: 0.0, ..samples[0] });
        samples.push(FlowSample { downstream_pressure: 250e5, flow: 9.9, ..samples[0] });
        let again = fit_choked_constant(&samples, &valve).unwrap();
        assert!(((again.k - 2.6e-4) / 2.6e-4).abs() < 1e-12);
        assert_eq!(again.sample_count, 5);
        assert!(matches!(fit_choked_constant(&samples[4..5], &valve), Err(FitError::Degenerate(_))));
        assert!(matches!(fit_choked_constant(&[], &valve), Err(FitError::Degenerate(_))));
    }
}
