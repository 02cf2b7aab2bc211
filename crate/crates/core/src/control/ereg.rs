use std::fmt;
use std::str::FromStr;

use super::actuator::{ActuatorParams, ActuatorState};
use super::feedforward::{ff_injector, ff_tank, FeedforwardParams};
use super::pid::{PidGains, PidState};
use super::schedule::{dynamic_gains, RampSchedule};
use crate::error::ControlError;
use crate::fluids::VALVE_FULL_THROW;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EregKind {
    /// Regulates ullage pressure with pressurant from the supply bottle.
    Tank,
    /// Regulates injector manifold pressure by throttling liquid.
    Injector,
}

/// Which setpoint appears in the injector feedforward's pressure drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InjectorFfReference {
    #[default]
    InjectorSetpoint,
    TankSetpoint,
}

/// Which parts of the primary loop are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlMode {
    pub feedforward: bool,
    pub feedback: bool,
    pub dynamic_gains: bool,
}

/// Controller configurations compared in ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerVariant {
    /// Static-gain PID, no feedforward.
    PidOnly,
    /// Feedforward alone; the pressure feedback is disabled.
    FfOnly,
    /// Feedforward plus PID with ramped gains.
    FfDynamic,
}

impl ControllerVariant {
    pub const ALL: [ControllerVariant; 3] = [
        ControllerVariant::PidOnly,
        ControllerVariant::FfOnly,
        ControllerVariant::FfDynamic,
    ];

    pub fn mode(self) -> ControlMode {
        match self {
            ControllerVariant::PidOnly => ControlMode {
                feedforward: false,
                feedback: true,
                dynamic_gains: false,
            },
            ControllerVariant::FfOnly => ControlMode {
                feedforward: true,
                feedback: false,
                dynamic_gains: false,
            },
            ControllerVariant::FfDynamic => ControlMode {
                feedforward: true,
                feedback: true,
                dynamic_gains: true,
            },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControllerVariant::PidOnly => "pid",
            ControllerVariant::FfOnly => "ff",
            ControllerVariant::FfDynamic => "ff+dyn",
        }
    }
}

impl fmt::Display for ControllerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pid" | "pid-only" => Ok(ControllerVariant::PidOnly),
            "ff" | "ff-only" => Ok(ControllerVariant::FfOnly),
            "ff+dyn" | "ff+dynamic" | "ff-dyn" => Ok(ControllerVariant::FfDynamic),
            other => Err(format!("unknown controller variant '{other}' (pid, ff, ff+dyn)")),
        }
    }
}

/// Measurements and targets seen by the pressure loop at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryInput {
    /// Regulated pressure, Pa.
    pub downstream: f64,
    /// Supply pressure for tank regulators, tank pressure for injector
    /// regulators, Pa.
    pub upstream: f64,
    pub setpoint: f64,
    /// Tank setpoint of the same propellant; only read by the injector
    /// feedforward when configured for [`InjectorFfReference::TankSetpoint`].
    pub tank_setpoint: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EregOutputs {
    pub feedforward: f64,
    /// Valve angle target, degrees.
    pub u1: f64,
    /// Motor command.
    pub u2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EregController {
    pub kind: EregKind,
    pub primary_gains: PidGains,
    pub primary_state: PidState,
    pub secondary_gains: PidGains,
    pub secondary_state: PidState,
    pub ramp: RampSchedule,
    pub feedforward: FeedforwardParams,
    pub ff_reference: InjectorFfReference,
    pub mode: ControlMode,
    pub actuator: ActuatorState,
    pub actuator_params: ActuatorParams,
    pub outputs: EregOutputs,
}

impl EregController {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: EregKind,
        primary_gains: PidGains,
        primary_integral_limit: f64,
        secondary_gains: PidGains,
        secondary_integral_limit: f64,
        ramp: RampSchedule,
        feedforward: FeedforwardParams,
        actuator_params: ActuatorParams,
        mode: ControlMode,
    ) -> Self {
        EregController {
            kind,
            primary_gains,
            primary_state: PidState::new(
                (0.0, VALVE_FULL_THROW),
                (-primary_integral_limit, primary_integral_limit),
            ),
            secondary_gains,
            secondary_state: PidState::new(
                (-1.0, 1.0),
                (-secondary_integral_limit, secondary_integral_limit),
            ),
            ramp,
            feedforward,
            ff_reference: InjectorFfReference::default(),
            mode,
            actuator: ActuatorState::default(),
            actuator_params,
            outputs: EregOutputs::default(),
        }
    }

    pub fn feedforward_angle(&self, input: &PrimaryInput) -> f64 {
        match self.kind {
            EregKind::Tank => ff_tank(&self.feedforward, input.setpoint, input.upstream),
            EregKind::Injector => {
                let reference = match self.ff_reference {
                    InjectorFfReference::InjectorSetpoint => input.setpoint,
                    InjectorFfReference::TankSetpoint => input.tank_setpoint,
                };
                ff_injector(&self.feedforward, input.upstream, reference)
            }
        }
    }

    /// Pressure loop: `u₁ = clamp(ff + PID(λ(t)·K, s − p), 0, 90)`.
    pub fn primary_tick(&mut self, input: &PrimaryInput, t: f64, dt: f64) -> Result<f64, ControlError> {
        for (name, v) in [
            ("downstream pressure", input.downstream),
            ("upstream pressure", input.upstream),
            ("setpoint", input.setpoint),
            ("tank setpoint", input.tank_setpoint),
            ("time", t),
        ] {
            if !v.is_finite() {
                return Err(ControlError::NonFinite(name));
            }
        }
        let ff = if self.mode.feedforward {
            self.feedforward_angle(input)
        } else {
            0.0
        };
        let feedback = if self.mode.feedback {
            let gains = if self.mode.dynamic_gains {
                dynamic_gains(&self.primary_gains, t, &self.ramp)
            } else {
                self.primary_gains
            };
            // the sum is what saturates, so the PID sees the room left by ff
            self.primary_state.output_limits = (-ff, VALVE_FULL_THROW - ff);
            self.primary_state.step(&gains, input.setpoint, input.downstream, dt)?
        } else {
            0.0
        };
        let u1 = (ff + feedback).clamp(0.0, VALVE_FULL_THROW);
        self.outputs.feedforward = ff;
        self.outputs.u1 = u1;
        Ok(u1)
    }

    /// Position loop toward the latest `u₁`, from a measured valve angle.
    pub fn secondary_tick(&mut self, measured_angle: f64, dt: f64) -> Result<f64, ControlError> {
        let u2 = self
            .secondary_state
            .step(&self.secondary_gains, self.outputs.u1, measured_angle, dt)?;
        self.outputs.u2 = u2;
        Ok(u2)
    }

    /// Both loops at one shared tick, measuring the actuator's own angle.
    pub fn ereg_step(&mut self, input: &PrimaryInput, t: f64, dt: f64) -> Result<f64, ControlError> {
        self.primary_tick(input, t, dt)?;
        self.secondary_tick(self.actuator.angle, dt)
    }
}
