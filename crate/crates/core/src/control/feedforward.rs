//! Model feedforward for the pressure loop.
//!
//! Tank regulators pass choked pressurant, so the inflow needed to hold the
//! ullage at `s_t` scales with `s_t/p_p`: `f = γ·min(1, s_t/p_p) + θ₀`.
//! Injector regulators pass liquid; inverting the valve law for a nominal
//! flow gives `f = Q·sqrt(ρ/(p_t − s_i))/α + θ₀`.

use crate::fluids::VALVE_FULL_THROW;

/// Default singularity floor for the injector formula, Pa (0.1 bar).
pub const DEFAULT_DP_FLOOR: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedforwardParams {
    /// Degrees.
    pub gamma: f64,
    /// m³/s.
    pub nominal_flow: f64,
    pub fluid_density: f64,
    /// Valve curve slope, SI Cv per degree.
    pub alpha: f64,
    pub theta_zero: f64,
    /// Pa; at or below this valve drop the injector feedforward commands
    /// full open.
    pub dp_floor: f64,
}

pub fn ff_tank(ff: &FeedforwardParams, tank_setpoint: f64, supply_pressure: f64) -> f64 {
    let ratio = if supply_pressure > 0.0 {
        (tank_setpoint / supply_pressure).min(1.0)
    } else {
        1.0
    };
    (ff.gamma * ratio + ff.theta_zero).clamp(0.0, VALVE_FULL_THROW)
}

pub fn ff_injector(ff: &FeedforwardParams, tank_pressure: f64, injector_setpoint: f64) -> f64 {
    let dp = tank_pressure - injector_setpoint;
    if !(dp > ff.dp_floor) {
        return VALVE_FULL_THROW;
    }
    let angle = ff.nominal_flow * (ff.fluid_density / dp).sqrt() / ff.alpha + ff.theta_zero;
    angle.clamp(0.0, VALVE_FULL_THROW)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tank_ff() -> FeedforwardParams {
        FeedforwardParams {
            gamma: 60.0,
            nominal_flow: 0.0,
            fluid_density: 0.0,
            alpha: 6e-7,
            theta_zero: 10.0,
            dp_floor: DEFAULT_DP_FLOOR,
        }
    }

    fn injector_ff() -> FeedforwardParams {
        FeedforwardParams {
            gamma: 0.0,
            nominal_flow: 1.0e-3,
            fluid_density: 1141.0,
            alpha: 4.0e-6,
            theta_zero: 10.0,
            dp_floor: DEFAULT_DP_FLOOR,
        }
    }

    #[test]
    fn tank_saturated_ratio() {
        assert_eq!(ff_tank(&tank_ff(), 42e5, 42e5), 70.0);
        assert_eq!(ff_tank(&tank_ff(), 50e5, 42e5), 70.0);
    }

    #[test]
    fn tank_half_ratio() {
        assert_eq!(ff_tank(&tank_ff(), 42e5, 84e5), 40.0);
    }

    #[test]
    fn tank_nominal_pressures() {
        let f = ff_tank(&tank_ff(), 42e5, 310e5);
        let hand = 60.0 * (42.0 / 310.0) + 10.0;
        assert!((f - hand).abs() < 1e-12);
        assert!((f - 18.13).abs() < 0.005);
    }

    #[test]
    fn tank_output_is_clamped() {
        let mut ff = tank_ff();
        ff.gamma = 200.0;
        assert_eq!(ff_tank(&ff, 42e5, 42e5), 90.0);
    }

    #[test]
    fn injector_hand_value() {
        let f = ff_injector(&injector_ff(), 42e5, 35e5);
        let hand = 1.0e-3 * (1141.0f64 / 7e5).sqrt() / 4.0e-6 + 10.0;
        assert!((f - hand).abs() < 1e-12);
        assert!((f - 20.1).abs() < 0.05);
    }

    #[test]
    fn injector_singular_branch_is_full_open() {
        let ff = injector_ff();
        assert_eq!(ff_injector(&ff, 42e5, 42e5), 90.0);
        assert_eq!(ff_injector(&ff, 42e5, 42e5 - DEFAULT_DP_FLOOR), 90.0);
        assert_eq!(ff_injector(&ff, 30e5, 35e5), 90.0);
        assert!(ff_injector(&ff, 42e5, 42e5 - 2.0 * DEFAULT_DP_FLOOR) <= 90.0);
    }

    #[test]
    fn injector_approaches_dead_band_from_above() {
        let ff = injector_ff();
        let mut last = f64::INFINITY;
        for dp in [1e5, 1e6, 1e7, 1e9, 1e12] {
            let f = ff_injector(&ff, dp + 1e5, 1e5);
            assert!(f > 10.0 && f < last);
            last = f;
        }
        assert!(last - 10.0 < 0.01);
    }

    proptest! {
        #[test]
        fn tank_depends_only_on_ratio(s in 1e5f64..5e6, p in 1e5f64..4e7, k in -20i32..20) {
            let c = 2f64.powi(k);
            let a = ff_tank(&tank_ff(), s, p);
            let b = ff_tank(&tank_ff(), s * c, p * c);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn tank_monotonicity(s in 1e5f64..5e6, p1 in 1e5f64..4e7, p2 in 1e5f64..4e7) {
            let ff = tank_ff();
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(ff_tank(&ff, s, hi) <= ff_tank(&ff, s, lo));
            prop_assert!(ff_tank(&ff, s, lo) <= ff_tank(&ff, 1.5 * s, lo));
            let f = ff_tank(&ff, s, p1);
            prop_assert!((10.0..=70.0).contains(&f));
        }
    }
}
