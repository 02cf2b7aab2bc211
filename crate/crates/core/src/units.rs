//! Unit conversions used at the file and telemetry boundaries.
//!
//! Everything inside the crate is SI. Valve flow coefficients are stored in
//! flow-factor form: `Q [m³/s] = Cv · sqrt(Δp [Pa] / ρ [kg/m³])`.

pub const PA_PER_BAR: f64 = 1.0e5;

/// Standard atmosphere, Pa.
pub const AMBIENT_PRESSURE: f64 = 101_325.0;

/// Isothermal gas temperature, K.
pub const GAS_TEMPERATURE: f64 = 293.0;

/// Specific gas constant of nitrogen, J/(kg·K).
pub const NITROGEN_GAS_CONSTANT: f64 = 296.8;

const M3_S_PER_US_GPM: f64 = 6.309_019_64e-5;
const PA_PER_PSI: f64 = 6_894.757_293;
/// Reference water density for catalog Cv ratings (60 °F).
const CV_REFERENCE_DENSITY: f64 = 999.0;

/// Multiply a catalog (US gpm, psi, specific gravity) Cv by this to get the
/// SI flow factor. Roughly 2.40e-5.
pub fn us_cv_to_si_factor() -> f64 {
    M3_S_PER_US_GPM * (CV_REFERENCE_DENSITY / PA_PER_PSI).sqrt()
}

pub fn bar_to_pa(bar: f64) -> f64 {
    bar * PA_PER_BAR
}

pub fn pa_to_bar(pa: f64) -> f64 {
    pa / PA_PER_BAR
}

pub fn us_cv_to_si(cv: f64) -> f64 {
    cv * us_cv_to_si_factor()
}

pub fn si_cv_to_us(cv: f64) -> f64 {
    cv / us_cv_to_si_factor()
}

/// Choked-flow constant from file units, kg/(s·bar·US-Cv), to
/// kg/(s·Pa·SI-Cv).
pub fn choked_constant_to_si(k: f64) -> f64 {
    k / (PA_PER_BAR * us_cv_to_si_factor())
}

pub fn choked_constant_from_si(k: f64) -> f64 {
    k * PA_PER_BAR * us_cv_to_si_factor()
}
