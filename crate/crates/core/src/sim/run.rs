//! Fixed-step co-simulation of plant and regulators.
//!
//! Every physics tick advances the plant by one RK4 step. Controller ticks
//! fall on integer multiples of the physics period and run before the
//! physics step that starts at the same instant. A frame is recorded at the
//! end of every `decimation` primary periods.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::telemetry::{EregFrame, Events, TelemetryFrame};
use crate::control::{actuator_step, quantize_angle, ActuatorState, EregController, PrimaryInput};
use crate::error::Error;
use crate::fluids::{
    chamber_state, flows_at_manifold_pressures, FeedSolution, GasTankState, Plant, PlantRates,
    PlantState, PropellantTankState, ValveAngles, CRITICAL_PRESSURE_RATIO, VALVE_FULL_THROW,
};
use crate::scenario::{of_ratio, EregId, ScenarioConfig};
use crate::units::{pa_to_bar, PA_PER_BAR};

/// How valve angles are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValveDrive {
    /// Cascaded regulators driving the actuators.
    #[default]
    Controllers,
    /// Each valve is set directly to the angle that holds its setpoint in
    /// steady flow, recomputed at every primary tick.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub drive: ValveDrive,
}

/// Why and when a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct AbortInfo {
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub frames: Vec<TelemetryFrame>,
    pub abort: Option<AbortInfo>,
    pub initial_state: PlantState,
    pub final_state: PlantState,
    /// Gas removed from the ullages by the collapse sink, kg.
    pub collapsed_gas: f64,
    /// Largest `|pV − mRT| / (mRT)` seen after any step, over all gas
    /// volumes.
    pub max_ideal_gas_residual: f64,
    /// Time of first depletion of (ox, fuel).
    pub depletion_times: [Option<f64>; 2],
}

pub fn build_plant(config: &ScenarioConfig) -> Result<Plant, Error> {
    let t = config.gas_temperature;
    let r = config.supply.gas_constant;
    let mut supply = GasTankState::new(config.supply.pressure, config.supply.volume, t, r)?;
    if config.supply.adiabatic {
        supply = supply.adiabatic(1.4);
    }
    let tanks: [PropellantTankState; 2] = {
        let mk = |i: usize| {
            let c = &config.tanks[i];
            PropellantTankState::new(
                c.total_volume,
                c.effective_ullage_fraction(),
                c.liquid_density,
                c.initial_pressure,
                t,
                r,
            )
        };
        [mk(0)?, mk(1)?]
    };
    Ok(Plant {
        valves: config.valves,
        lines: config.lines,
        injectors: config.injectors,
        chamber: config.chamber().copied(),
        ambient_pressure: config.ambient_pressure,
        collapse_coefficient: [
            config.tanks[0].collapse_coefficient,
            config.tanks[1].collapse_coefficient,
        ],
        state: PlantState { supply, tanks },
    })
}

/// Valve angles (ox tank, fuel tank, ox injector, fuel injector) that hold
/// the given setpoints in steady flow at the plant's current state.
pub fn oracle_angles(plant: &Plant, config: &ScenarioConfig, setpoints: &[f64; 4], dt: f64) -> ValveAngles {
    let state = &plant.state;
    let rho = config.densities();
    let mut angles = [0.0; 4];

    // injector valves: manifold at setpoint needs the flow the injector
    // passes there; the valve takes whatever drop is left after the line
    let manifold = flows_at_manifold_pressures(
        [setpoints[2], setpoints[3]],
        &config.injectors,
        rho,
        config.chamber(),
        config.ambient_pressure,
    );
    let mut vdot = [0.0; 2];
    for i in 0..2 {
        let tank = &state.tanks[i];
        let q = manifold.mdot[i] / rho[i];
        let valve = &config.valves[2 + i];
        let dp = tank.pressure() - config.lines[i].pressure_drop(rho[i], q) - setpoints[2 + i];
        angles[2 + i] = if tank.liquid_volume <= 0.0 {
            0.0
        } else if dp <= 0.0 {
            VALVE_FULL_THROW
        } else {
            valve.angle_for_cv(q / (dp / rho[i]).sqrt())
        };
        vdot[i] = if tank.liquid_volume > 0.0 { q } else { 0.0 };
    }

    // tank valves: replace the displaced volume at setpoint density and
    // close the present mass error over one primary period
    for i in 0..2 {
        let tank = &state.tanks[i];
        let ullage = &tank.ullage;
        let rt = ullage.specific_gas_constant * ullage.temperature;
        let target_mass = setpoints[i] * ullage.volume / rt;
        let needed = setpoints[i] / rt * vdot[i]
            + (target_mass - ullage.gas_mass) / dt
            + config.tanks[i].collapse_coefficient * ullage.gas_mass;
        let valve = &config.valves[i];
        let p_up = state.supply.pressure;
        let ratio = tank.pressure() / p_up;
        let fade = if ratio < CRITICAL_PRESSURE_RATIO {
            1.0
        } else {
            ((1.0 - ratio) / (1.0 - CRITICAL_PRESSURE_RATIO)).max(0.0)
        };
        let per_cv = valve.choked_constant * p_up * fade;
        angles[i] = if needed <= 0.0 {
            0.0
        } else if per_cv <= 0.0 {
            VALVE_FULL_THROW
        } else {
            valve.angle_for_cv(needed / per_cv)
        };
    }
    angles
}

struct Channel {
    controller: EregController,
    /// Open-loop angle target; the position loop still drives the valve.
    fixed: Option<f64>,
    /// Moved by the actuator model rather than set directly.
    driven: bool,
    /// Motor side of the drive; equals the valve angle without backlash.
    motor: ActuatorState,
    valve_angle: f64,
}

struct Sensors {
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Sensors {
    fn read(&mut self, truth: f64) -> f64 {
        match &self.noise {
            Some(n) => truth + n.sample(&mut self.rng),
            None => truth,
        }
    }
}

fn abort_check(config: &ScenarioConfig, state: &PlantState) -> Option<String> {
    let f = config.limits.abort_fraction;
    let supply_rating = config.valves[0].rated_pressure.min(config.valves[1].rated_pressure);
    if state.supply.pressure > f * supply_rating {
        return Some(format!(
            "supply pressure {:.2} bar exceeds {:.0}% of rated {:.1} bar",
            pa_to_bar(state.supply.pressure),
            f * 100.0,
            pa_to_bar(supply_rating)
        ));
    }
    let tank_rating = config.valves[2].rated_pressure.min(config.valves[3].rated_pressure);
    for (i, t) in state.tanks.iter().enumerate() {
        if t.pressure() > f * tank_rating {
            return Some(format!(
                "{} tank pressure {:.2} bar exceeds {:.0}% of rated {:.1} bar",
                if i == 0 { "ox" } else { "fuel" },
                pa_to_bar(t.pressure()),
                f * 100.0,
                pa_to_bar(tank_rating)
            ));
        }
    }
    None
}

fn gas_residual(g: &GasTankState) -> f64 {
    let mrt = g.gas_mass * g.specific_gas_constant * g.temperature;
    if mrt == 0.0 {
        (g.pressure * g.volume).abs()
    } else {
        ((g.pressure * g.volume - mrt) / mrt).abs()
    }
}

/// Runs a validated scenario and returns its telemetry.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<TelemetryFrame>, Error> {
    Ok(simulate(config, &RunOptions::default())?.frames)
}

pub fn simulate(config: &ScenarioConfig, options: &RunOptions) -> Result<RunResult, Error> {
    config.validate()?;
    let timing = config.timing;
    let dt = timing.dt_phys;
    let primary_every = timing.primary_every();
    let secondary_every = timing.secondary_every();
    let frame_every = primary_every * timing.decimation as u64;
    let n_steps = (config.duration / dt).round() as u64;

    let mut plant = build_plant(config)?;
    let initial_state = plant.state;
    let mut channels: Vec<Channel> = EregId::ALL
        .iter()
        .map(|&id| {
            let c = config.controller(id);
            Channel {
                controller: c.build(config.variant),
                fixed: c.fixed_angle,
                driven: c.fixed_angle.is_some() || options.drive == ValveDrive::Controllers,
                motor: ActuatorState::default(),
                valve_angle: 0.0,
            }
        })
        .collect();
    let mut sensors = Sensors {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        noise: (config.sensors.pressure_noise_std > 0.0)
            .then(|| Normal::new(0.0, config.sensors.pressure_noise_std).expect("finite sigma")),
    };

    let mut frames = Vec::with_capacity((n_steps / frame_every.max(1)) as usize + 1);
    let mut events = Events::empty();
    let mut depletion_times = [None; 2];
    let mut collapsed_gas = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut abort = None;
    let mut feed: FeedSolution = plant.feed(&angles_of(&channels))?;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        if k % primary_every == 0 {
            let setpoints = config.setpoints_at(t);
            for ch in channels.iter_mut() {
                if let Some(a) = ch.fixed {
                    ch.controller.outputs.feedforward = 0.0;
                    ch.controller.outputs.u1 = a;
                }
            }
            match options.drive {
                ValveDrive::Controllers => {
                    let supply = sensors.read(plant.state.supply.pressure);
                    let tanks = [
                        sensors.read(plant.state.tanks[0].pressure()),
                        sensors.read(plant.state.tanks[1].pressure()),
                    ];
                    let manifolds = [
                        sensors.read(feed.branches[0].manifold_pressure),
                        sensors.read(feed.branches[1].manifold_pressure),
                    ];
                    for id in EregId::ALL {
                        let p = id.propellant();
                        let (downstream, upstream) = if id.is_tank() {
                            (tanks[p], supply)
                        } else {
                            (manifolds[p], tanks[p])
                        };
                        let input = PrimaryInput {
                            downstream,
                            upstream,
                            setpoint: setpoints[id.index()],
                            tank_setpoint: setpoints[p],
                        };
                        let ch = &mut channels[id.index()];
                        if ch.fixed.is_none() {
                            ch.controller.primary_tick(&input, t, timing.dt_primary)?;
                        }
                    }
                }
                ValveDrive::Oracle => {
                    let target = oracle_angles(&plant, config, &setpoints, timing.dt_primary);
                    for (ch, a) in channels.iter_mut().zip(target) {
                        if !ch.driven {
                            ch.valve_angle = a;
                            ch.motor.angle = a;
                            ch.controller.outputs.u1 = a;
                        }
                    }
                }
            }
        }
        if k % secondary_every == 0 {
            for (ch, id) in channels.iter_mut().zip(EregId::ALL) {
                if ch.driven {
                    let measured = match config.controller(id).encoder_counts_per_deg {
                        Some(counts) => quantize_angle(ch.valve_angle, counts),
                        None => ch.valve_angle,
                    };
                    ch.controller.secondary_tick(measured, timing.dt_secondary)?;
                }
            }
        }

        // actuator motion over this step, sampled inside the step for RK4
        let start_angles = angles_of(&channels);
        let motion: Vec<Option<(ActuatorState, f64)>> = channels
            .iter()
            .map(|ch| ch.driven.then_some((ch.motor, ch.controller.outputs.u2)))
            .collect();
        let angle_at = |s: f64| -> ValveAngles {
            let mut a = start_angles;
            for (i, m) in motion.iter().enumerate() {
                if let Some((motor, u2)) = m {
                    let params = &config.controllers[i].actuator;
                    let mo = if s > 0.0 {
                        actuator_step(motor, params, *u2, s * dt).angle
                    } else {
                        motor.angle
                    };
                    a[i] = match config.controllers[i].backlash {
                        Some(b) => b.follow(start_angles[i], mo),
                        None => mo,
                    };
                }
            }
            a
        };
        let end_angles = angle_at(1.0);
        let rates = plant.step(&angle_at, dt)?;
        for (i, ch) in channels.iter_mut().enumerate() {
            if let Some((motor, u2)) = motion[i] {
                ch.motor = actuator_step(&motor, &config.controllers[i].actuator, u2, dt);
                ch.valve_angle = end_angles[i];
                ch.controller.actuator = ch.motor;
            }
        }
        collapsed_gas += (rates.collapse[0] + rates.collapse[1]) * dt;

        let s = &plant.state;
        max_residual = max_residual
            .max(gas_residual(&s.supply))
            .max(gas_residual(&s.tanks[0].ullage))
            .max(gas_residual(&s.tanks[1].ullage));
        let t_end = (k + 1) as f64 * dt;
        for (i, flag) in [Events::OX_DEPLETED, Events::FUEL_DEPLETED].into_iter().enumerate() {
            if s.tanks[i].depleted && !events.contains(flag) {
                events |= flag;
                depletion_times[i] = Some(t_end);
            }
        }
        if s.supply.depleted {
            events |= Events::SUPPLY_DEPLETED;
        }
        let reason = abort_check(config, s);
        if reason.is_some() {
            events |= Events::ABORT;
        }
        feed = plant.feed(&angles_of(&channels))?;

        if (k + 1) % frame_every == 0 || reason.is_some() {
            frames.push(frame(
                config,
                &plant,
                &channels,
                &feed,
                &rates,
                config.setpoints_at(t_end),
                t_end,
                events,
            ));
        }
        if let Some(reason) = reason {
            abort = Some(AbortInfo { time: t_end, reason });
            break;
        }
    }
    Ok(RunResult {
        frames,
        abort,
        initial_state,
        final_state: plant.state,
        collapsed_gas,
        max_ideal_gas_residual: max_residual,
        depletion_times,
    })
}

fn angles_of(channels: &[Channel]) -> ValveAngles {
    [
        channels[0].valve_angle,
        channels[1].valve_angle,
        channels[2].valve_angle,
        channels[3].valve_angle,
    ]
}

#[allow(clippy::too_many_arguments)]
fn frame(
    config: &ScenarioConfig,
    plant: &Plant,
    channels: &[Channel],
    feed: &FeedSolution,
    rates: &PlantRates,
    setpoints: [f64; 4],
    time: f64,
    events: Events,
) -> TelemetryFrame {
    let s = &plant.state;
    let pressures = [
        s.tanks[0].pressure(),
        s.tanks[1].pressure(),
        feed.branches[0].manifold_pressure,
        feed.branches[1].manifold_pressure,
    ];
    let eregs: [EregFrame; 4] = std::array::from_fn(|i| {
        let ch = &channels[i];
        let o = &ch.controller.outputs;
        let (ff, u1, u2) = (o.feedforward, o.u1, o.u2);
        EregFrame {
            setpoint_bar: setpoints[i] / PA_PER_BAR,
            pressure_bar: pressures[i] / PA_PER_BAR,
            valve_angle_deg: ch.valve_angle,
            feedforward_deg: ff,
            u1_deg: u1,
            u2,
        }
    });
    let mdot_ox = feed.branches[0].mdot;
    let mdot_fuel = feed.branches[1].mdot;
    let (pc, thrust) = match config.chamber() {
        Some(c) => (feed.chamber_pressure, chamber_state(mdot_ox + mdot_fuel, c).thrust),
        None => (config.ambient_pressure, 0.0),
    };
    TelemetryFrame {
        time,
        eregs,
        supply_pressure_bar: s.supply.pressure / PA_PER_BAR,
        mdot_ox,
        mdot_fuel,
        mdot_gas: rates.supply_out(),
        chamber_pressure_bar: pc / PA_PER_BAR,
        thrust,
        of_ratio: of_ratio(mdot_ox, mdot_fuel),
        events,
    }
}
