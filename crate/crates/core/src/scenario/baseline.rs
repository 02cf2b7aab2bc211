//! Reconstructed baseline scenarios. The operating point (flows, chamber
//! pressure, thrust, supply and tank pressures) is the engine's rated point; the
//! throttle profile, tank sizes, valve curves and gains are tuned
//! reconstructions. The shipped `scenarios/*.toml` files are generated from
//! these builders.

use super::config::Mode;
use super::file::{
    ControllerFile, EngineFile, InjectorFile, LimitsFile, LineFile, MetricsFile, PerPropellant,
    PerValve, PointFile, ProfileFile, ScenarioFile, SegmentFile, SensorFile, SizingFile,
    SupplyFile, TankFile, TimingFile, ValveFile, SCHEMA_VERSION,
};
use crate::units::{AMBIENT_PRESSURE, GAS_TEMPERATURE, NITROGEN_GAS_CONSTANT, PA_PER_BAR};

const LOX_DENSITY: f64 = 1141.0;
const PROPANE_DENSITY: f64 = 493.0;
const WATER_DENSITY: f64 = 999.0;

const NOMINAL_OX: f64 = 1.14;
const NOMINAL_FUEL: f64 = 0.49;
const CHAMBER_BAR: f64 = 24.0;
const THRUST_N: f64 = 3000.0;
const CSTAR: f64 = 1600.0;
/// Injector manifold pressure at full throttle.
const MANIFOLD_BAR: f64 = 35.0;

const SUPPLY_BAR: f64 = 310.0;
const TANK_SETPOINT_BAR: f64 = 42.0;
const TANK_VALVE_RATED_BAR: f64 = 415.0;
const INJECTOR_VALVE_RATED_BAR: f64 = 78.0;

const TANK_CV_PER_DEG: f64 = 0.025;
const INJECTOR_CV_PER_DEG: f64 = 0.06;
const THETA_ZERO: f64 = 10.0;
/// Gas valve passes 0.39 kg/s fully open at supply pressure.
const FULL_OPEN_GAS_FLOW: f64 = 0.39;

fn gas_valve() -> ValveFile {
    let cv_max = TANK_CV_PER_DEG * (90.0 - THETA_ZERO);
    ValveFile {
        cv_per_deg: TANK_CV_PER_DEG,
        theta_zero_deg: THETA_ZERO,
        rated_bar: TANK_VALVE_RATED_BAR,
        choked_k: FULL_OPEN_GAS_FLOW / (cv_max * SUPPLY_BAR),
    }
}

fn liquid_valve() -> ValveFile {
    ValveFile {
        cv_per_deg: INJECTOR_CV_PER_DEG,
        theta_zero_deg: THETA_ZERO,
        rated_bar: INJECTOR_VALVE_RATED_BAR,
        choked_k: 0.0,
    }
}

fn tank_controller(gamma: f64) -> ControllerFile {
    ControllerFile {
        fixed_angle_deg: None,
        kp: 15.0,
        ki: 10.0,
        kd: 0.0,
        integral_limit: 60.0,
        ramp_time_s: 1.0,
        gamma_deg: gamma,
        nominal_flow_m3_s: None,
        ff_reference: None,
        dp_floor_bar: 0.1,
        ff_cv_per_deg: None,
        ff_theta_zero_deg: None,
        secondary_kp: 0.2,
        secondary_ki: 0.0,
        secondary_kd: 0.0,
        secondary_integral_limit: 1.0,
        actuator_time_constant_s: 0.02,
        actuator_rate_max_deg_s: 180.0,
        encoder_counts_per_deg: None,
        backlash_deg: None,
    }
}

fn injector_controller() -> ControllerFile {
    ControllerFile {
        kp: 0.5,
        ki: 25.0,
        integral_limit: 10.0,
        ..tank_controller(0.0)
    }
}

fn line() -> LineFile {
    LineFile {
        friction_factor: 0.02,
        length_m: 2.0,
        diameter_m: 0.0127,
    }
}

fn tank(volume: f64, density: f64) -> TankFile {
    TankFile {
        volume_m3: volume,
        ullage_fraction: 0.05,
        boiloff_ullage_fraction: 0.0,
        density_kg_m3: density,
        initial_pressure_bar: TANK_SETPOINT_BAR,
        setpoint_bar: TANK_SETPOINT_BAR,
        collapse_coefficient: 0.0,
    }
}

fn fraction(f: f64) -> PointFile {
    PointFile {
        thrust_fraction: Some(f),
        ..PointFile::default()
    }
}

fn segment(point: PointFile, hold: f64, rate: f64) -> SegmentFile {
    SegmentFile {
        point,
        hold_s: hold,
        ramp_rate_bar_s: rate,
    }
}

fn hotfire_injector(mdot: f64) -> InjectorFile {
    InjectorFile {
        cd: 0.7,
        area_m2: None,
        sizing: Some(SizingFile {
            mdot_kg_s: mdot,
            upstream_bar: MANIFOLD_BAR,
            downstream_bar: CHAMBER_BAR,
        }),
    }
}

fn staticfire() -> ScenarioFile {
    let ambient_bar = AMBIENT_PRESSURE / PA_PER_BAR;
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: "baseline-staticfire".into(),
        notes: Some(
            "Operating point: 1.14/0.49 kg/s, Pc 24 bar, 3 kN, supply 310 bar, tanks 42 bar. \
             Throttle profile, tank volumes, valve curves and gains are reconstructions."
                .into(),
        ),
        mode: Mode::Staticfire,
        duration_s: 14.0,
        seed: 0,
        controller: "ff+dyn".into(),
        ambient_bar,
        gas_temperature_k: GAS_TEMPERATURE,
        timing: TimingFile {
            dt_phys_s: 0.001,
            dt_secondary_s: 0.001,
            dt_primary_s: 0.01,
            decimation: 1,
        },
        supply: SupplyFile {
            volume_m3: 0.005,
            pressure_bar: SUPPLY_BAR,
            gas_constant: NITROGEN_GAS_CONSTANT,
            adiabatic: false,
            meop_bar: SUPPLY_BAR,
        },
        tanks: PerPropellant {
            ox: tank(0.0135, LOX_DENSITY),
            fuel: tank(0.01222, PROPANE_DENSITY),
        },
        valves: PerValve {
            ox_tank: gas_valve(),
            fuel_tank: gas_valve(),
            ox_inj: liquid_valve(),
            fuel_inj: liquid_valve(),
        },
        lines: PerPropellant {
            ox: line(),
            fuel: line(),
        },
        injectors: PerPropellant {
            ox: hotfire_injector(NOMINAL_OX),
            fuel: hotfire_injector(NOMINAL_FUEL),
        },
        engine: EngineFile {
            nominal_ox_kg_s: NOMINAL_OX,
            nominal_fuel_kg_s: NOMINAL_FUEL,
            chamber_pressure_bar: CHAMBER_BAR,
            thrust_n: THRUST_N,
            cstar_m_s: CSTAR,
        },
        controllers: PerValve {
            ox_tank: tank_controller(73.0),
            fuel_tank: tank_controller(73.0),
            ox_inj: injector_controller(),
            fuel_inj: injector_controller(),
        },
        profile: ProfileFile {
            start: fraction(0.6),
            segments: vec![
                segment(fraction(0.85), 3.0, 8.0),
                segment(fraction(1.0), 3.5, 8.0),
                segment(fraction(0.7), 0.0, 8.0),
            ],
        },
        sensors: SensorFile::default(),
        metrics: MetricsFile::default(),
        limits: LimitsFile {
            abort_fraction: 1.1,
            injector_meop_bar: TANK_SETPOINT_BAR,
        },
    }
}

fn coldflow() -> ScenarioFile {
    let mut f = staticfire();
    f.name = "baseline-coldflow".into();
    f.notes = Some(
        "Static-fire hardware and injector setpoints with the chamber removed, plus a \
         boil-off ullage perturbation."
            .into(),
    );
    f.mode = Mode::Coldflow;
    f.duration_s = 8.0;
    for t in [&mut f.tanks.ox, &mut f.tanks.fuel] {
        t.boiloff_ullage_fraction = 0.02;
    }
    // same manifold pressures as the static-fire full-throttle hold
    let hot = staticfire().resolve().expect("static-fire baseline resolves");
    let p = hot.profile.segments[1].target;
    let bar = |pa: f64| (pa / PA_PER_BAR * 1e4).round() / 1e4;
    let [ox_bar, fuel_bar] = [bar(p[0]), bar(p[1])];
    let s = hot.profile.start;
    f.profile = ProfileFile {
        start: PointFile {
            ox_bar: Some(bar(s[0])),
            fuel_bar: Some(bar(s[1])),
            ..PointFile::default()
        },
        segments: vec![segment(
            PointFile {
                ox_bar: Some(ox_bar),
                fuel_bar: Some(fuel_bar),
                ..PointFile::default()
            },
            0.0,
            5.0,
        )],
    };
    f
}

fn waterflow() -> ScenarioFile {
    let mut f = staticfire();
    f.name = "baseline-waterflow".into();
    f.notes = Some(
        "Water in both tanks through mock orifices, injector valves fixed open, tank \
         regulators only. Sized so the water runs out late in the supply blowdown."
            .into(),
    );
    f.mode = Mode::Waterflow;
    f.duration_s = 18.0;
    f.tanks.ox = tank(0.0192, WATER_DENSITY);
    f.tanks.fuel = tank(0.0192, WATER_DENSITY);
    let mock = |vdot: f64| InjectorFile {
        cd: 0.7,
        area_m2: None,
        sizing: Some(SizingFile {
            mdot_kg_s: vdot * WATER_DENSITY,
            upstream_bar: MANIFOLD_BAR,
            downstream_bar: AMBIENT_PRESSURE / PA_PER_BAR,
        }),
    };
    f.injectors.ox = mock(NOMINAL_OX / LOX_DENSITY);
    f.injectors.fuel = mock(NOMINAL_FUEL / PROPANE_DENSITY);
    f.controllers.ox_inj.fixed_angle_deg = Some(90.0);
    f.controllers.fuel_inj.fixed_angle_deg = Some(90.0);
    f.profile = ProfileFile {
        start: PointFile {
            ox_bar: Some(MANIFOLD_BAR),
            fuel_bar: Some(MANIFOLD_BAR),
            ..PointFile::default()
        },
        segments: vec![segment(
            PointFile {
                ox_bar: Some(MANIFOLD_BAR),
                fuel_bar: Some(MANIFOLD_BAR),
                ..PointFile::default()
            },
            0.0,
            2.0,
        )],
    };
    f
}

/// Baseline scenario file for a test mode.
pub fn baseline_file(mode: Mode) -> ScenarioFile {
    match mode {
        Mode::Staticfire => staticfire(),
        Mode::Coldflow => coldflow(),
        Mode::Waterflow => waterflow(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluids::flows_at_manifold_pressures;
    use crate::scenario::{of_ratio, paired_setpoints_for_of, EregId, ScenarioConfig};

    const MODES: [Mode; 3] = [Mode::Staticfire, Mode::Coldflow, Mode::Waterflow];

    fn steady(c: &ScenarioConfig, fraction: f64) -> (f64, f64, f64, f64) {
        let p = paired_setpoints_for_of(c.engine.nominal_of, fraction, c).unwrap();
        let s = flows_at_manifold_pressures(p, &c.injectors, c.densities(), c.chamber(), c.ambient_pressure);
        let total = s.mdot[0] + s.mdot[1];
        (s.chamber_pressure, s.thrust, of_ratio(s.mdot[0], s.mdot[1]).unwrap(), total)
    }

    #[test]
    fn all_baselines_resolve() {
        for m in MODES {
            let c = baseline_file(m).resolve().unwrap();
            assert_eq!(c.mode, m);
            assert_eq!(c.chamber().is_some(), m == Mode::Staticfire);
        }
    }

    #[test]
    fn full_throttle_closes_on_operating_point() {
        let c = baseline_file(Mode::Staticfire).resolve().unwrap();
        let (pc, thrust, of, mdot) = steady(&c, 1.0);
        assert!((pc - 24e5).abs() < 0.1e5, "Pc {pc}");
        assert!((thrust - 3000.0).abs() < 10.0, "F {thrust}");
        assert!((of - 2.33).abs() < 0.01, "OF {of}");
        assert!((mdot - 1.63).abs() < 1e-6);
    }

    #[test]
    fn seventy_percent_is_near_2100_newtons() {
        let c = baseline_file(Mode::Staticfire).resolve().unwrap();
        let (_, thrust, of, _) = steady(&c, 0.7);
        assert!((thrust - 2100.0).abs() < 0.05 * 2100.0, "F {thrust}");
        assert!((of - 1.14 / 0.49).abs() < 1e-6);
    }

    #[test]
    fn full_throttle_manifold_matches_injector_sizing() {
        let c = baseline_file(Mode::Staticfire).resolve().unwrap();
        let p = paired_setpoints_for_of(c.engine.nominal_of, 1.0, &c).unwrap();
        for v in p {
            assert!((v - MANIFOLD_BAR * PA_PER_BAR).abs() < 0.1e5, "{v}");
        }
    }

    #[test]
    fn waterflow_holds_injector_valves_open() {
        let c = baseline_file(Mode::Waterflow).resolve().unwrap();
        assert_eq!(c.controller(EregId::OxInjector).fixed_angle, Some(90.0));
        assert_eq!(c.controller(EregId::FuelInjector).fixed_angle, Some(90.0));
        assert!(c.controller(EregId::OxTank).fixed_angle.is_none());
    }

    #[test]
    fn shipped_files_match_builders() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
        for (m, name) in MODES.iter().zip(["staticfire", "coldflow", "waterflow"]) {
            let path = dir.join(format!("{name}.toml"));
            let shipped = ScenarioFile::load(&path).unwrap();
            assert_eq!(shipped, baseline_file(*m), "{} is stale; regenerate with `ereg template`", path.display());
        }
    }
}
