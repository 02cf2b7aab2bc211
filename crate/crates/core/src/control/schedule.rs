use super::pid::PidGains;
use crate::error::ControlError;

/// Linear gain ramp, `λ(t) = min(1, t/T)`. Soft-starts the pressure loop
/// while the ullage is small and the plant is at its most sensitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub ramp_time: f64,
}

impl RampSchedule {
    pub fn new(ramp_time: f64) -> Result<Self, ControlError> {
        if !(ramp_time > 0.0 && ramp_time.is_finite()) {
            return Err(ControlError::InvalidParameter(format!(
                "ramp time must be positive, got {ramp_time}"
            )));
        }
        Ok(RampSchedule { ramp_time })
    }

    pub fn lambda(&self, t: f64) -> f64 {
        (t.max(0.0) / self.ramp_time).min(1.0)
    }
}

pub fn dynamic_gains(base: &PidGains, t: f64, ramp: &RampSchedule) -> PidGains {
    base.scaled(ramp.lambda(t))
}
