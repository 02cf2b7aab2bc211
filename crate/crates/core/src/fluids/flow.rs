//! Algebraic flow laws. All of them return zero for an adverse pressure
//! difference: the plumbing carries check valves, so reverse flow is blocked.

use super::valve::{cv_of_angle, ValveModel};
use crate::error::ModelError;

/// Downstream/upstream pressure ratio below which gas flow through the valve
/// is treated as choked (diatomic gas).
pub const CRITICAL_PRESSURE_RATIO: f64 = 0.528;

/// Choked pressurant flow, `Q = k·Cv(θ)·p_up`, in kg/s.
pub fn choked_gas_mass_flow(valve: &ValveModel, theta: f64, p_up: f64) -> Result<f64, ModelError> {
    let cv = cv_of_angle(valve, theta)?;
    if p_up <= 0.0 {
        return Ok(0.0);
    }
    Ok(valve.choked_constant * cv * p_up)
}

/// Pressurant flow including the approach to pressure equalization: the
/// choked law applies below the critical ratio and is faded linearly to zero
/// as the ratio rises from the critical value to one.
pub fn gas_valve_mass_flow(
    valve: &ValveModel,
    theta: f64,
    p_up: f64,
    p_down: f64,
) -> Result<f64, ModelError> {
    let choked = choked_gas_mass_flow(valve, theta, p_up)?;
    if choked == 0.0 {
        return Ok(0.0);
    }
    let ratio = p_down / p_up;
    let fade = if ratio < CRITICAL_PRESSURE_RATIO {
        1.0
    } else if ratio < 1.0 {
        (1.0 - ratio) / (1.0 - CRITICAL_PRESSURE_RATIO)
    } else {
        0.0
    };
    Ok(choked * fade)
}

/// Incompressible valve law, `Q = Cv(θ)·sqrt(Δp/ρ)`, in m³/s.
pub fn liquid_volumetric_flow(
    valve: &ValveModel,
    theta: f64,
    dp: f64,
    rho: f64,
) -> Result<f64, ModelError> {
    if !(rho > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "density must be positive, got {rho}"
        )));
    }
    let cv = cv_of_angle(valve, theta)?;
    if dp <= 0.0 {
        return Ok(0.0);
    }
    Ok(cv * (dp / rho).sqrt())
}

/// Sharp-edged orifice, `ṁ = Cd·A·sqrt(2ρΔp)`, in kg/s.
pub fn orifice_mass_flow(cd: f64, area: f64, rho: f64, dp: f64) -> f64 {
    if dp <= 0.0 {
        return 0.0;
    }
    cd * area * (2.0 * rho * dp).sqrt()
}

/// Darcy–Weisbach friction loss, `Δp = f·(L/D)·ρv²/2`, in Pa.
pub fn darcy_weisbach_dp(
    friction_factor: f64,
    length: f64,
    diameter: f64,
    rho: f64,
    velocity: f64,
) -> f64 {
    friction_factor * (length / diameter) * (rho * velocity * velocity / 2.0)
}
