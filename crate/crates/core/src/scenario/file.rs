//! On-disk scenario format (TOML). Pressures are bar, angles degrees, times
//! seconds; valve coefficients are catalog US Cv. Everything is converted to
//! SI by [`ScenarioFile::resolve`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{
    ControllerConfig, EngineConfig, LimitsConfig, MetricsConfig, Mode, ScenarioConfig,
    SensorConfig, SupplyConfig, TankConfig, Timing,
};
use super::profile::{ThrottleProfile, ThrottleSegment};
use super::throttle::{paired_setpoints_for_of, size_mock_injector};
use super::EregId;
use crate::control::{
    ActuatorParams, Backlash, ControllerVariant, EregKind, FeedforwardParams,
    InjectorFfReference, PidGains, RampSchedule, DEFAULT_DP_FLOOR,
};
use crate::error::{ConfigError, Error};
use crate::fluids::{ChamberModel, FeedLine, Injector, ValveModel};
use crate::units::{bar_to_pa, choked_constant_to_si, us_cv_to_si, PA_PER_BAR};

pub const SCHEMA_VERSION: u32 = 1;

fn default_decimation() -> u32 {
    1
}
fn default_ramp_rate() -> f64 {
    2.0
}
fn default_abort_fraction() -> f64 {
    1.1
}
fn default_dp_floor() -> f64 {
    DEFAULT_DP_FLOOR / PA_PER_BAR
}
fn default_startup() -> f64 {
    MetricsConfig::default().startup_window
}
fn default_early() -> f64 {
    MetricsConfig::default().early_window
}
fn default_settle_band() -> f64 {
    MetricsConfig::default().settle_band / PA_PER_BAR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    /// Free-form note on where the constants come from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub mode: Mode,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    /// `pid`, `ff` or `ff+dyn`.
    pub controller: String,
    pub ambient_bar: f64,
    pub gas_temperature_k: f64,
    pub timing: TimingFile,
    pub supply: SupplyFile,
    pub tanks: PerPropellant<TankFile>,
    pub valves: PerValve<ValveFile>,
    pub lines: PerPropellant<LineFile>,
    pub injectors: PerPropellant<InjectorFile>,
    pub engine: EngineFile,
    pub controllers: PerValve<ControllerFile>,
    pub profile: ProfileFile,
    #[serde(default)]
    pub sensors: SensorFile,
    #[serde(default)]
    pub metrics: MetricsFile,
    pub limits: LimitsFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerPropellant<T> {
    pub ox: T,
    pub fuel: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerValve<T> {
    pub ox_tank: T,
    pub fuel_tank: T,
    pub ox_inj: T,
    pub fuel_inj: T,
}

impl<T> PerValve<T> {
    fn get(&self, id: EregId) -> &T {
        match id {
            EregId::OxTank => &self.ox_tank,
            EregId::FuelTank => &self.fuel_tank,
            EregId::OxInjector => &self.ox_inj,
            EregId::FuelInjector => &self.fuel_inj,
        }
    }
}

impl<T> PerPropellant<T> {
    fn get(&self, i: usize) -> &T {
        if i == 0 {
            &self.ox
        } else {
            &self.fuel
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingFile {
    pub dt_phys_s: f64,
    pub dt_secondary_s: f64,
    pub dt_primary_s: f64,
    #[serde(default = "default_decimation")]
    pub decimation: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyFile {
    pub volume_m3: f64,
    pub pressure_bar: f64,
    pub gas_constant: f64,
    #[serde(default)]
    pub adiabatic: bool,
    pub meop_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TankFile {
    pub volume_m3: f64,
    pub ullage_fraction: f64,
    #[serde(default)]
    pub boiloff_ullage_fraction: f64,
    pub density_kg_m3: f64,
    pub initial_pressure_bar: f64,
    pub setpoint_bar: f64,
    /// Pressurant collapse, fraction of inflow lost on contact with the
    /// liquid.
    #[serde(default)]
    pub collapse_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValveFile {
    /// US Cv per degree.
    pub cv_per_deg: f64,
    pub theta_zero_deg: f64,
    pub rated_bar: f64,
    /// kg/(s·bar·US Cv); gas service only.
    #[serde(default)]
    pub choked_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineFile {
    pub friction_factor: f64,
    pub length_m: f64,
    pub diameter_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectorFile {
    pub cd: f64,
    /// Give either the area or a sizing point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizing: Option<SizingFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizingFile {
    pub mdot_kg_s: f64,
    pub upstream_bar: f64,
    pub downstream_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineFile {
    pub nominal_ox_kg_s: f64,
    pub nominal_fuel_kg_s: f64,
    pub chamber_pressure_bar: f64,
    pub thrust_n: f64,
    pub cstar_m_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    /// Hold the valve here instead of regulating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_angle_deg: Option<f64>,
    /// deg/bar, deg/(bar·s), deg·s/bar.
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// bar·s.
    pub integral_limit: f64,
    pub ramp_time_s: f64,
    /// Tank regulators.
    #[serde(default)]
    pub gamma_deg: f64,
    /// Injector regulators; defaults to the engine's nominal flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_flow_m3_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ff_reference: Option<FfReferenceFile>,
    #[serde(default = "default_dp_floor")]
    pub dp_floor_bar: f64,
    /// Valve curve assumed by the feedforward; defaults to the plant's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ff_cv_per_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ff_theta_zero_deg: Option<f64>,
    /// Position loop: 1/deg, 1/(deg·s), s/deg.
    pub secondary_kp: f64,
    pub secondary_ki: f64,
    pub secondary_kd: f64,
    /// deg·s.
    pub secondary_integral_limit: f64,
    pub actuator_time_constant_s: f64,
    pub actuator_rate_max_deg_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder_counts_per_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backlash_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FfReferenceFile {
    InjectorSetpoint,
    TankSetpoint,
}

/// Injector pressures given directly or as a fraction of nominal flow at
/// the target mixture ratio.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ox_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thrust_fraction: Option<f64>,
    /// Defaults to the engine's nominal ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_of: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    #[serde(flatten)]
    pub point: PointFile,
    pub hold_s: f64,
    #[serde(default = "default_ramp_rate")]
    pub ramp_rate_bar_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub start: PointFile,
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorFile {
    #[serde(default)]
    pub pressure_noise_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    #[serde(default = "default_startup")]
    pub startup_window_s: f64,
    #[serde(default = "default_early")]
    pub early_window_s: f64,
    #[serde(default = "default_settle_band")]
    pub settle_band_bar: f64,
}

impl Default for MetricsFile {
    fn default() -> Self {
        MetricsFile {
            startup_window_s: default_startup(),
            early_window_s: default_early(),
            settle_band_bar: default_settle_band(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsFile {
    #[serde(default = "default_abort_fraction")]
    pub abort_fraction: f64,
    pub injector_meop_bar: f64,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        // check the version first so old files get a clear message
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            ConfigError::Parse(e.message().to_string())
        })?;
        match raw.get("schema_version").and_then(|v| v.as_integer()) {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => {
                return Err(ConfigError::SchemaVersion {
                    found: v.clamp(0, u32::MAX as i64) as u32,
                    expected: SCHEMA_VERSION,
                })
            }
            None => return Err(ConfigError::Parse("missing integer field `schema_version`".into())),
        }
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse(message) => Error::Format {
                path: path.to_path_buf(),
                message,
            },
            other => Error::Config(other),
        })
    }

    /// Converts to SI, sizes injectors, resolves the throttle profile and
    /// validates the result.
    pub fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let variant: ControllerVariant = self.controller.parse().map_err(ConfigError::Invalid)?;
        let ambient = bar_to_pa(self.ambient_bar);

        let valves = {
            let mut out = Vec::with_capacity(4);
            for id in EregId::ALL {
                let v = self.valves.get(id);
                out.push(ValveModel {
                    alpha: us_cv_to_si(v.cv_per_deg),
                    theta_zero: v.theta_zero_deg,
                    theta_max: crate::fluids::VALVE_FULL_THROW,
                    rated_pressure: bar_to_pa(v.rated_bar),
                    choked_constant: choked_constant_to_si(v.choked_k),
                });
            }
            [out[0], out[1], out[2], out[3]]
        };

        let tanks: [TankConfig; 2] = std::array::from_fn(|i| {
            let t = self.tanks.get(i);
            TankConfig {
                total_volume: t.volume_m3,
                initial_ullage_fraction: t.ullage_fraction,
                boiloff_ullage_fraction: t.boiloff_ullage_fraction,
                liquid_density: t.density_kg_m3,
                initial_pressure: bar_to_pa(t.initial_pressure_bar),
                collapse_coefficient: t.collapse_coefficient,
            }
        });
        let tank_setpoints = [
            bar_to_pa(self.tanks.ox.setpoint_bar),
            bar_to_pa(self.tanks.fuel.setpoint_bar),
        ];

        let lines: [FeedLine; 2] = std::array::from_fn(|i| {
            let l = self.lines.get(i);
            FeedLine {
                friction_factor: l.friction_factor,
                length: l.length_m,
                diameter: l.diameter_m,
            }
        });

        let mut injectors = [Injector { cd: 0.0, area: 0.0 }; 2];
        for (i, inj) in injectors.iter_mut().enumerate() {
            let f = self.injectors.get(i);
            let area = match (f.area_m2, &f.sizing) {
                (Some(a), None) => a,
                (None, Some(s)) => size_mock_injector(
                    s.mdot_kg_s,
                    tanks[i].liquid_density,
                    bar_to_pa(s.upstream_bar),
                    bar_to_pa(s.downstream_bar),
                    f.cd,
                )?,
                _ => return invalid("each injector needs exactly one of `area_m2` or `sizing`"),
            };
            *inj = Injector { cd: f.cd, area };
        }

        let e = &self.engine;
        let nominal_mdot = e.nominal_ox_kg_s + e.nominal_fuel_kg_s;
        if !(e.nominal_ox_kg_s > 0.0 && e.nominal_fuel_kg_s > 0.0) {
            return invalid("engine nominal flows must be positive");
        }
        let chamber = ChamberModel::calibrated(
            nominal_mdot,
            bar_to_pa(e.chamber_pressure_bar),
            e.thrust_n,
            e.cstar_m_s,
            ambient,
        )
        .map_err(|err| ConfigError::Invalid(format!("engine: {err}")))?;
        let engine = EngineConfig {
            nominal_mdot,
            nominal_of: e.nominal_ox_kg_s / e.nominal_fuel_kg_s,
            chamber,
        };
        let nominal_mdots = [e.nominal_ox_kg_s, e.nominal_fuel_kg_s];

        let mut controllers = Vec::with_capacity(4);
        for id in EregId::ALL {
            let c = self.controllers.get(id);
            let valve = &valves[id.index()];
            let p = id.propellant();
            let gains = PidGains::new(c.kp / PA_PER_BAR, c.ki / PA_PER_BAR, c.kd / PA_PER_BAR)
                .map_err(|err| ConfigError::Invalid(format!("{}: {err}", id.name())))?;
            let secondary = PidGains::new(c.secondary_kp, c.secondary_ki, c.secondary_kd)
                .map_err(|err| ConfigError::Invalid(format!("{}: {err}", id.name())))?;
            let ramp = RampSchedule::new(c.ramp_time_s)
                .map_err(|err| ConfigError::Invalid(format!("{}: {err}", id.name())))?;
            let density = tanks[p].liquid_density;
            controllers.push(ControllerConfig {
                kind: if id.is_tank() { EregKind::Tank } else { EregKind::Injector },
                fixed_angle: c.fixed_angle_deg,
                primary: gains,
                primary_integral_limit: c.integral_limit * PA_PER_BAR,
                ramp,
                feedforward: FeedforwardParams {
                    gamma: c.gamma_deg,
                    nominal_flow: c.nominal_flow_m3_s.unwrap_or(nominal_mdots[p] / density),
                    fluid_density: density,
                    alpha: c.ff_cv_per_deg.map(us_cv_to_si).unwrap_or(valve.alpha),
                    theta_zero: c.ff_theta_zero_deg.unwrap_or(valve.theta_zero),
                    dp_floor: bar_to_pa(c.dp_floor_bar),
                },
                ff_reference: match c.ff_reference {
                    Some(FfReferenceFile::TankSetpoint) => InjectorFfReference::TankSetpoint,
                    _ => InjectorFfReference::InjectorSetpoint,
                },
                secondary,
                secondary_integral_limit: c.secondary_integral_limit,
                actuator: ActuatorParams {
                    time_constant: c.actuator_time_constant_s,
                    rate_max: c.actuator_rate_max_deg_s,
                },
                encoder_counts_per_deg: c.encoder_counts_per_deg,
                backlash: c.backlash_deg.map(|width| Backlash { width }),
            });
        }
        let controllers: [ControllerConfig; 4] = controllers
            .try_into()
            .unwrap_or_else(|_| unreachable!("four regulators"));

        let mut config = ScenarioConfig {
            name: self.name.clone(),
            mode: self.mode,
            duration: self.duration_s,
            seed: self.seed,
            variant,
            timing: Timing {
                dt_phys: self.timing.dt_phys_s,
                dt_secondary: self.timing.dt_secondary_s,
                dt_primary: self.timing.dt_primary_s,
                decimation: self.timing.decimation,
            },
            ambient_pressure: ambient,
            gas_temperature: self.gas_temperature_k,
            supply: SupplyConfig {
                volume: self.supply.volume_m3,
                pressure: bar_to_pa(self.supply.pressure_bar),
                gas_constant: self.supply.gas_constant,
                adiabatic: self.supply.adiabatic,
                meop: bar_to_pa(self.supply.meop_bar),
            },
            tanks,
            tank_setpoints,
            valves,
            controllers,
            lines,
            injectors,
            engine,
            profile: ThrottleProfile {
                start: [ambient; 2],
                segments: Vec::new(),
            },
            sensors: SensorConfig {
                pressure_noise_std: bar_to_pa(self.sensors.pressure_noise_bar),
            },
            metrics: MetricsConfig {
                startup_window: self.metrics.startup_window_s,
                early_window: self.metrics.early_window_s,
                settle_band: bar_to_pa(self.metrics.settle_band_bar),
            },
            limits: LimitsConfig {
                abort_fraction: self.limits.abort_fraction,
                injector_meop: bar_to_pa(self.limits.injector_meop_bar),
            },
        };
        config.validate_plant()?;

        let start = resolve_point(&self.profile.start, &config, "start")?;
        let mut segments = Vec::with_capacity(self.profile.segments.len());
        for (i, s) in self.profile.segments.iter().enumerate() {
            segments.push(ThrottleSegment {
                target: resolve_point(&s.point, &config, &format!("segment {i}"))?,
                hold: s.hold_s,
                ramp_rate: bar_to_pa(s.ramp_rate_bar_s),
            });
        }
        if segments.is_empty() {
            return invalid("profile needs at least one segment");
        }
        config.profile = ThrottleProfile { start, segments };
        config.validate()?;
        Ok(config)
    }
}

fn resolve_point(p: &PointFile, config: &ScenarioConfig, what: &str) -> Result<[f64; 2], ConfigError> {
    match (p.ox_bar, p.fuel_bar, p.thrust_fraction) {
        (Some(ox), Some(fuel), None) if p.target_of.is_none() => Ok([bar_to_pa(ox), bar_to_pa(fuel)]),
        (None, None, Some(fraction)) => {
            let of = p.target_of.unwrap_or(config.engine.nominal_of);
            paired_setpoints_for_of(of, fraction, config).map_err(|e| match e {
                ConfigError::InfeasibleThrottle(m) => {
                    ConfigError::InfeasibleThrottle(format!("profile {what}: {m}"))
                }
                other => other,
            })
        }
        _ => invalid(format!(
            "profile {what}: give either `ox_bar` and `fuel_bar`, or `thrust_fraction` (with optional `target_of`)"
        )),
    }
}
