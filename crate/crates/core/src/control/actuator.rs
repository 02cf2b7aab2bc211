//! Lumped valve drive: the motor's angular rate relaxes toward
//! `u₂·rate_max` with a first-order lag, and travel is bounded by hard stops
//! at 0° and 90°.

use crate::fluids::VALVE_FULL_THROW;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorParams {
    /// s.
    pub time_constant: f64,
    /// deg/s at full command.
    pub rate_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorState {
    /// Degrees.
    pub angle: f64,
    /// deg/s.
    pub angular_rate: f64,
    /// Last applied command in [-1, 1].
    pub command: f64,
}

/// Exact solution of the first-order rate lag over `dt` with the command
/// held constant.
pub fn actuator_step(act: &ActuatorState, params: &ActuatorParams, u2: f64, dt: f64) -> ActuatorState {
    let command = if u2.is_finite() { u2.clamp(-1.0, 1.0) } else { 0.0 };
    let target = command * params.rate_max;
    let decay = (-dt / params.time_constant).exp();
    let mut rate = target + (act.angular_rate - target) * decay;
    let mut angle =
        act.angle + target * dt + (act.angular_rate - target) * params.time_constant * (1.0 - decay);
    if angle >= VALVE_FULL_THROW {
        angle = VALVE_FULL_THROW;
        rate = rate.min(0.0);
    } else if angle <= 0.0 {
        angle = 0.0;
        rate = rate.max(0.0);
    }
    ActuatorState {
        angle,
        angular_rate: rate,
        command,
    }
}

/// Mechanical free play between motor and valve stem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backlash {
    /// Total dead zone, degrees.
    pub width: f64,
}

impl Backlash {
    /// New valve angle given the previous valve angle and the motor angle.
    pub fn follow(&self, valve_angle: f64, motor_angle: f64) -> f64 {
        let half = self.width / 2.0;
        let v = if motor_angle - valve_angle > half {
            motor_angle - half
        } else if valve_angle - motor_angle > half {
            motor_angle + half
        } else {
            valve_angle
        };
        v.clamp(0.0, VALVE_FULL_THROW)
    }
}

/// Encoder reading with `counts_per_degree` resolution.
pub fn quantize_angle(angle: f64, counts_per_degree: f64) -> f64 {
    (angle * counts_per_degree).round() / counts_per_degree
}
