use super::config::ScenarioConfig;
use crate::error::ConfigError;
use crate::fluids::{flows_at_manifold_pressures, orifice_mass_flow};

/// Oxidizer-to-fuel mass ratio; `None` when there is no fuel flow.
pub fn of_ratio(mdot_ox: f64, mdot_fuel: f64) -> Option<f64> {
    (mdot_fuel > 0.0).then(|| mdot_ox / mdot_fuel)
}

const PC_TOLERANCE: f64 = 1e-3;
const MAX_ITERATIONS: usize = 500;

/// Injector manifold pressures (ox, fuel) that deliver `target_of` at
/// `thrust_fraction` of the nominal total flow, accounting for the chamber
/// back pressure at that flow.
pub fn paired_setpoints_for_of(
    target_of: f64,
    thrust_fraction: f64,
    baseline: &ScenarioConfig,
) -> Result<[f64; 2], ConfigError> {
    if !(target_of > 0.0) {
        return Err(ConfigError::Invalid(format!("target OF {target_of} must be positive")));
    }
    if !(thrust_fraction > 0.0 && thrust_fraction <= 1.0) {
        return Err(ConfigError::Invalid(format!(
            "thrust fraction {thrust_fraction} outside (0, 1]"
        )));
    }
    let total = thrust_fraction * baseline.engine.nominal_mdot;
    let mdot = [total * target_of / (1.0 + target_of), total / (1.0 + target_of)];
    let rho = baseline.densities();
    let inj = &baseline.injectors;
    let chamber = baseline.chamber();

    let manifold_for = |pc: f64| -> [f64; 2] {
        std::array::from_fn(|i| {
            let cda = inj[i].cd * inj[i].area;
            pc + mdot[i] * mdot[i] / (2.0 * rho[i] * cda * cda)
        })
    };
    let mut pc = baseline.ambient_pressure;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let p = manifold_for(pc);
        let next = flows_at_manifold_pressures(p, inj, rho, chamber, baseline.ambient_pressure)
            .chamber_pressure;
        let done = (next - pc).abs() < PC_TOLERANCE;
        pc = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ConfigError::InfeasibleThrottle(
            "chamber pressure iteration did not converge".into(),
        ));
    }
    let p = manifold_for(pc);
    for i in 0..2 {
        let limit = baseline.tank_setpoints[i] - baseline.controllers[2 + i].feedforward.dp_floor;
        if p[i] > limit {
            return Err(ConfigError::InfeasibleThrottle(format!(
                "{} injector needs {:.2} bar but tank setpoint allows at most {:.2} bar",
                if i == 0 { "ox" } else { "fuel" },
                p[i] / 1e5,
                limit / 1e5
            )));
        }
    }
    Ok(p)
}

/// Orifice area that passes `target_mdot` between the given pressures.
pub fn size_mock_injector(
    target_mdot: f64,
    rho: f64,
    upstream: f64,
    downstream: f64,
    cd: f64,
) -> Result<f64, ConfigError> {
    let dp = upstream - downstream;
    if !(dp > 0.0) {
        return Err(ConfigError::InfeasibleThrottle(format!(
            "orifice sizing needs a positive pressure drop, got {dp} Pa"
        )));
    }
    if !(cd > 0.0 && cd <= 1.0) || !(rho > 0.0) || !(target_mdot > 0.0) {
        return Err(ConfigError::Invalid(
            "orifice sizing needs Cd in (0, 1], positive density and flow".into(),
        ));
    }
    let area = target_mdot / (cd * (2.0 * rho * dp).sqrt());
    debug_assert!((orifice_mass_flow(cd, area, rho, dp) - target_mdot).abs() <= 1e-12 * target_mdot);
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn of_ratio_cases() {
        assert_eq!(of_ratio(0.7, 0.7), Some(1.0));
        assert!((of_ratio(1.14, 0.49).unwrap() - 2.327).abs() < 0.0005);
        assert_eq!(of_ratio(0.0, 0.49), Some(0.0));
        assert_eq!(of_ratio(1.0, 0.0), None);
    }

    #[test]
    fn mock_injector_hand_value() {
        let a = size_mock_injector(1.14, 1141.0, 41e5 + 101_325.0, 101_325.0, 0.7).unwrap();
        let hand = 1.14 / (0.7 * (2.0f64 * 1141.0 * 41e5).sqrt());
        assert!(((a - hand) / hand).abs() < 1e-12);
        assert!((a - 1.68e-5).abs() < 0.005e-5);
    }

    #[test]
    fn mock_injector_rejects_adverse_drop() {
        assert!(matches!(
            size_mock_injector(1.0, 1000.0, 1e5, 2e5, 0.7),
            Err(ConfigError::InfeasibleThrottle(_))
        ));
        assert!(size_mock_injector(1.0, 1000.0, 2e5, 2e5, 0.7).is_err());
    }

    proptest! {
        #[test]
        fn mock_injector_round_trip(m in 0.01f64..5.0, rho in 400.0f64..1200.0,
                                    up in 2e5f64..60e5, cd in 0.3f64..1.0) {
            let down = 101_325.0;
            let a = size_mock_injector(m, rho, up, down, cd).unwrap();
            let back = orifice_mass_flow(cd, a, rho, up - down);
            prop_assert!(((back - m) / m).abs() < 1e-12);
            let a2 = size_mock_injector(2.0 * m, rho, up, down, cd).unwrap();
            prop_assert!(((a2 - 2.0 * a) / a).abs() < 1e-15);
        }
    }

    fn staticfire() -> ScenarioConfig {
        crate::scenario::baseline_file(super::super::Mode::Staticfire)
            .resolve()
            .unwrap()
    }

    fn solved_of(p: [f64; 2], c: &ScenarioConfig) -> f64 {
        let s = flows_at_manifold_pressures(p, &c.injectors, c.densities(), c.chamber(), c.ambient_pressure);
        of_ratio(s.mdot[0], s.mdot[1]).unwrap()
    }

    #[test]
    fn symmetric_plant_gives_equal_setpoints() {
        let mut c = staticfire();
        c.tanks[1].liquid_density = c.tanks[0].liquid_density;
        c.injectors[1] = c.injectors[0];
        let p = paired_setpoints_for_of(1.0, 0.6, &c).unwrap();
        assert!(((p[0] - p[1]) / p[0]).abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn unreachable_mixture_is_infeasible() {
        let c = staticfire();
        assert!(matches!(
            paired_setpoints_for_of(9.0, 1.0, &c),
            Err(ConfigError::InfeasibleThrottle(_))
        ));
        let mut low = c.clone();
        low.tank_setpoints = [30e5, 30e5];
        assert!(matches!(
            paired_setpoints_for_of(c.engine.nominal_of, 1.0, &low),
            Err(ConfigError::InfeasibleThrottle(_))
        ));
        assert!(matches!(paired_setpoints_for_of(2.0, 1.2, &c), Err(ConfigError::Invalid(_))));
        assert!(matches!(paired_setpoints_for_of(0.0, 0.5, &c), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn higher_fraction_needs_higher_pressure() {
        let c = staticfire();
        let lo = paired_setpoints_for_of(2.3, 0.6, &c).unwrap();
        let hi = paired_setpoints_for_of(2.3, 0.9, &c).unwrap();
        assert!(hi[0] > lo[0] && hi[1] > lo[1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn paired_setpoints_close_the_mixture(of in 1.8f64..2.9, fraction in 0.4f64..1.0) {
            let c = staticfire();
            let p = paired_setpoints_for_of(of, fraction, &c).unwrap();
            prop_assert!((solved_of(p, &c) - of).abs() < 1e-6 * of);
            let s = flows_at_manifold_pressures(p, &c.injectors, c.densities(), c.chamber(), c.ambient_pressure);
            let total = s.mdot[0] + s.mdot[1];
            prop_assert!((total - fraction * c.engine.nominal_mdot).abs() < 1e-6 * total);
        }

        #[test]
        fn removing_back_pressure_raises_flow(ox in 26e5f64..40e5, fuel in 26e5f64..40e5) {
            let c = staticfire();
            let hot = flows_at_manifold_pressures([ox, fuel], &c.injectors, c.densities(), c.chamber(), c.ambient_pressure);
            let cold = flows_at_manifold_pressures([ox, fuel], &c.injectors, c.densities(), None, c.ambient_pressure);
            prop_assert!(cold.mdot[0] > hot.mdot[0] && cold.mdot[1] > hot.mdot[1]);
        }
    }
}
