use std::path::Path;

use serde::{Deserialize, Serialize};

use super::file::ScenarioFile;
use super::profile::ThrottleProfile;
use super::EregId;
use crate::control::{
    ActuatorParams, Backlash, ControllerVariant, EregController, EregKind, FeedforwardParams,
    InjectorFfReference, PidGains, RampSchedule,
};
use crate::error::{ConfigError, Error};
use crate::fluids::{ChamberModel, FeedLine, Injector, ValveModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Water through mock orifices, tank regulators only.
    Waterflow,
    /// Cryogenic liquids, no combustion back pressure.
    Coldflow,
    /// Hot fire against the chamber.
    Staticfire,
}

impl Mode {
    pub fn has_chamber(self) -> bool {
        self == Mode::Staticfire
    }
}

/// Tick periods. Physics drives everything; controller periods are integer
/// multiples of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub dt_phys: f64,
    pub dt_secondary: f64,
    pub dt_primary: f64,
    /// Primary ticks per telemetry frame.
    pub decimation: u32,
}

fn integer_ratio(num: f64, den: f64) -> Option<u64> {
    let r = num / den;
    let n = r.round();
    if n >= 1.0 && ((r - n) / n).abs() < 1e-9 {
        Some(n as u64)
    } else {
        None
    }
}

impl Timing {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt_phys > 0.0 && self.dt_secondary > 0.0 && self.dt_primary > 0.0) {
            return Err(ConfigError::Invalid("tick periods must be positive".into()));
        }
        if self.dt_secondary > self.dt_primary {
            return Err(ConfigError::Invalid(
                "secondary tick period must not exceed the primary period".into(),
            ));
        }
        if integer_ratio(self.dt_secondary, self.dt_phys).is_none()
            || integer_ratio(self.dt_primary, self.dt_phys).is_none()
        {
            return Err(ConfigError::Invalid(
                "controller tick periods must be integer multiples of dt_phys".into(),
            ));
        }
        if self.decimation == 0 {
            return Err(ConfigError::Invalid("telemetry decimation must be >= 1".into()));
        }
        Ok(())
    }

    pub fn secondary_every(&self) -> u64 {
        integer_ratio(self.dt_secondary, self.dt_phys).unwrap_or(1)
    }

    pub fn primary_every(&self) -> u64 {
        integer_ratio(self.dt_primary, self.dt_phys).unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyConfig {
    pub volume: f64,
    pub pressure: f64,
    pub gas_constant: f64,
    pub adiabatic: bool,
    /// Maximum expected operating pressure of the pressurant side, Pa.
    pub meop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankConfig {
    pub total_volume: f64,
    pub initial_ullage_fraction: f64,
    /// Extra initial ullage from boil-off venting.
    pub boiloff_ullage_fraction: f64,
    pub liquid_density: f64,
    pub initial_pressure: f64,
    pub collapse_coefficient: f64,
}

impl TankConfig {
    pub fn effective_ullage_fraction(&self) -> f64 {
        self.initial_ullage_fraction + self.boiloff_ullage_fraction
    }
}

/// Engine design point. The chamber model is derived from it and only
/// present in static-fire runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub nominal_mdot: f64,
    pub nominal_of: f64,
    pub chamber: ChamberModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    /// Standard deviation of pressure-transducer noise, Pa.
    pub pressure_noise_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub startup_window: f64,
    pub early_window: f64,
    pub settle_band: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            startup_window: 1.0,
            early_window: 2.0,
            settle_band: 0.5e5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitsConfig {
    /// Multiple of a rated pressure that aborts the run.
    pub abort_fraction: f64,
    pub injector_meop: f64,
}

/// One regulator's settings in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub kind: EregKind,
    /// Drive the valve to a fixed angle instead of regulating.
    pub fixed_angle: Option<f64>,
    pub primary: PidGains,
    pub primary_integral_limit: f64,
    pub ramp: RampSchedule,
    pub feedforward: FeedforwardParams,
    pub ff_reference: InjectorFfReference,
    pub secondary: PidGains,
    pub secondary_integral_limit: f64,
    pub actuator: ActuatorParams,
    pub encoder_counts_per_deg: Option<f64>,
    pub backlash: Option<Backlash>,
}

impl ControllerConfig {
    pub fn is_regulating(&self) -> bool {
        self.fixed_angle.is_none()
    }

    pub fn build(&self, variant: ControllerVariant) -> EregController {
        let mut c = EregController::new(
            self.kind,
            self.primary,
            self.primary_integral_limit,
            self.secondary,
            self.secondary_integral_limit,
            self.ramp,
            self.feedforward,
            self.actuator,
            variant.mode(),
        );
        c.ff_reference = self.ff_reference;
        c
    }
}

/// Validated, SI-unit description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub duration: f64,
    pub seed: u64,
    pub variant: ControllerVariant,
    pub timing: Timing,
    pub ambient_pressure: f64,
    pub gas_temperature: f64,
    pub supply: SupplyConfig,
    pub tanks: [TankConfig; 2],
    pub tank_setpoints: [f64; 2],
    pub valves: [ValveModel; 4],
    pub controllers: [ControllerConfig; 4],
    pub lines: [FeedLine; 2],
    pub injectors: [Injector; 2],
    pub engine: EngineConfig,
    pub profile: ThrottleProfile,
    pub sensors: SensorConfig,
    pub metrics: MetricsConfig,
    pub limits: LimitsConfig,
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        ScenarioFile::load(path)?.resolve().map_err(Error::from)
    }

    pub fn chamber(&self) -> Option<&ChamberModel> {
        self.mode.has_chamber().then_some(&self.engine.chamber)
    }

    pub fn controller(&self, id: EregId) -> &ControllerConfig {
        &self.controllers[id.index()]
    }

    pub fn with_variant(&self, variant: ControllerVariant) -> Self {
        let mut c = self.clone();
        c.variant = variant;
        c
    }

    pub fn setpoints_at(&self, t: f64) -> [f64; 4] {
        super::profile::setpoints_at(&self.profile, self.tank_setpoints, t)
    }

    pub fn densities(&self) -> [f64; 2] {
        [self.tanks[0].liquid_density, self.tanks[1].liquid_density]
    }

    /// Structural checks that do not need the profile resolved.
    pub(crate) fn validate_plant(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return invalid("duration must be positive".into());
        }
        self.timing.validate()?;
        if !(self.ambient_pressure > 0.0 && self.gas_temperature > 0.0) {
            return invalid("ambient pressure and gas temperature must be positive".into());
        }
        let s = &self.supply;
        if !(s.volume > 0.0 && s.pressure > self.ambient_pressure && s.gas_constant > 0.0) {
            return invalid("supply volume, pressure and gas constant must be positive".into());
        }
        if s.pressure > s.meop {
            return invalid(format!(
                "supply pressure {:.1} bar exceeds pressurant MEOP {:.1} bar",
                s.pressure / 1e5,
                s.meop / 1e5
            ));
        }
        for id in [EregId::OxTank, EregId::FuelTank] {
            let rated = self.valves[id.index()].rated_pressure;
            if s.pressure > rated || s.meop > rated {
                return invalid(format!(
                    "supply pressure {:.1} bar / MEOP {:.1} bar exceeds {} valve rating {:.1} bar",
                    s.pressure / 1e5,
                    s.meop / 1e5,
                    id.name(),
                    rated / 1e5
                ));
            }
        }
        for id in [EregId::OxInjector, EregId::FuelInjector] {
            let rated = self.valves[id.index()].rated_pressure;
            if self.limits.injector_meop > rated {
                return invalid(format!(
                    "injector MEOP {:.1} bar exceeds {} valve rating {:.1} bar",
                    self.limits.injector_meop / 1e5,
                    id.name(),
                    rated / 1e5
                ));
            }
        }
        for (i, t) in self.tanks.iter().enumerate() {
            let u = t.effective_ullage_fraction();
            if !(t.initial_ullage_fraction > 0.0 && u < 1.0 && t.boiloff_ullage_fraction >= 0.0) {
                return invalid(format!("tank {i} initial ullage fraction {u} outside (0, 1)"));
            }
            if !(t.total_volume > 0.0 && t.liquid_density > 0.0 && t.collapse_coefficient >= 0.0) {
                return invalid(format!("tank {i} volume and density must be positive"));
            }
            if !(t.initial_pressure > self.ambient_pressure) {
                return invalid(format!("tank {i} initial pressure must exceed ambient"));
            }
            for p in [t.initial_pressure, self.tank_setpoints[i]] {
                if p > self.limits.injector_meop {
                    return invalid(format!(
                        "tank {i} pressure {:.1} bar exceeds injector MEOP {:.1} bar",
                        p / 1e5,
                        self.limits.injector_meop / 1e5
                    ));
                }
            }
        }
        for v in &self.valves {
            v.validate()
                .map_err(|e| ConfigError::Invalid(format!("valve: {e}")))?;
        }
        for inj in &self.injectors {
            if !(inj.cd > 0.0 && inj.cd <= 1.0 && inj.area > 0.0) {
                return invalid("injector Cd must be in (0, 1] and area positive".into());
            }
        }
        for l in &self.lines {
            if !(l.friction_factor >= 0.0 && l.length >= 0.0 && l.diameter > 0.0) {
                return invalid("feed line parameters must be non-negative".into());
            }
        }
        self.engine
            .chamber
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("chamber: {e}")))?;
        if !(self.limits.abort_fraction >= 1.0) {
            return invalid("abort fraction must be >= 1".into());
        }
        if !(self.sensors.pressure_noise_std >= 0.0) {
            return invalid("sensor noise must be non-negative".into());
        }
        for (id, c) in EregId::ALL.iter().zip(&self.controllers) {
            if let Some(a) = c.fixed_angle {
                if !(0.0..=90.0).contains(&a) {
                    return invalid(format!("{} fixed angle {a} outside [0, 90]", id.name()));
                }
            }
            if !(c.actuator.time_constant > 0.0 && c.actuator.rate_max > 0.0) {
                return invalid(format!("{} actuator parameters must be positive", id.name()));
            }
            if c.is_regulating() && id.is_tank() && !(c.feedforward.gamma > 0.0) {
                return invalid(format!("{} feedforward gamma must be positive", id.name()));
            }
            if c.is_regulating()
                && !id.is_tank()
                && !(c.feedforward.nominal_flow > 0.0 && c.feedforward.fluid_density > 0.0)
            {
                return invalid(format!(
                    "{} feedforward nominal flow and density must be positive",
                    id.name()
                ));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_plant()?;
        self.profile.validate(self.ambient_pressure)
    }
}
