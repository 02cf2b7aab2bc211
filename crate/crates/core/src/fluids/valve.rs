use crate::error::ModelError;

/// Full mechanical throw of a quarter-turn ball valve, degrees.
pub const VALVE_FULL_THROW: f64 = 90.0;

/// Piecewise-linear ball valve: `Cv(θ) = max(0, α·(θ − θ₀))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValveModel {
    /// SI flow factor per degree.
    pub alpha: f64,
    /// Dead-band end, degrees.
    pub theta_zero: f64,
    pub theta_max: f64,
    /// Pa.
    pub rated_pressure: f64,
    /// kg/(s·Pa·Cv). Only meaningful for gas service.
    pub choked_constant: f64,
}

impl ValveModel {
    pub fn new(
        alpha: f64,
        theta_zero: f64,
        rated_pressure: f64,
        choked_constant: f64,
    ) -> Result<Self, ModelError> {
        let valve = ValveModel {
            alpha,
            theta_zero,
            theta_max: VALVE_FULL_THROW,
            rated_pressure,
            choked_constant,
        };
        valve.validate()?;
        Ok(valve)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "valve alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(0.0..self.theta_max).contains(&self.theta_zero) {
            return Err(ModelError::InvalidParameter(format!(
                "valve theta_zero {} outside [0, {})",
                self.theta_zero, self.theta_max
            )));
        }
        if !(self.rated_pressure > 0.0) {
            return Err(ModelError::InvalidParameter(
                "valve rated pressure must be positive".into(),
            ));
        }
        if !(self.choked_constant >= 0.0 && self.choked_constant.is_finite()) {
            return Err(ModelError::InvalidParameter(
                "choked constant must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn cv(&self, theta: f64) -> Result<f64, ModelError> {
        cv_of_angle(self, theta)
    }

    /// Largest flow coefficient the valve can reach.
    pub fn cv_max(&self) -> f64 {
        self.alpha * (self.theta_max - self.theta_zero)
    }

    /// Smallest angle achieving `cv`, clamped to the valve's travel.
    pub fn angle_for_cv(&self, cv: f64) -> f64 {
        if cv <= 0.0 {
            return 0.0;
        }
        (self.theta_zero + cv / self.alpha).min(self.theta_max)
    }
}

pub fn cv_of_angle(valve: &ValveModel, theta: f64) -> Result<f64, ModelError> {
    if !(0.0..=valve.theta_max).contains(&theta) {
        return Err(ModelError::AngleOutOfRange(theta));
    }
    Ok((valve.alpha * (theta - valve.theta_zero)).max(0.0))
}
