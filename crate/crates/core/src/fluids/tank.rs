use crate::error::ModelError;

/// Thermodynamic path followed by a gas volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GasProcess {
    Isothermal,
    /// Reversible adiabatic expansion, `T = T_ref·(ρ/ρ_ref)^(γ−1)`.
    Adiabatic {
        heat_capacity_ratio: f64,
        reference_density: f64,
        reference_temperature: f64,
    },
}

/// Ideal-gas volume: pressurant supply bottle or propellant-tank ullage.
///
/// Pressure is always derived from mass, volume and temperature, so
/// `p·V = m·R·T` holds to rounding after every update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasTankState {
    pub pressure: f64,
    pub volume: f64,
    pub gas_mass: f64,
    pub temperature: f64,
    pub specific_gas_constant: f64,
    pub process: GasProcess,
    /// Set once the mass has been clamped at zero; never cleared.
    pub depleted: bool,
}

impl GasTankState {
    pub fn new(
        pressure: f64,
        volume: f64,
        temperature: f64,
        specific_gas_constant: f64,
    ) -> Result<Self, ModelError> {
        if !(volume > 0.0) {
            return Err(ModelError::NonPositiveVolume(volume));
        }
        if !(pressure > 0.0 && temperature > 0.0 && specific_gas_constant > 0.0) {
            return Err(ModelError::InvalidParameter(
                "gas pressure, temperature and gas constant must be positive".into(),
            ));
        }
        let gas_mass = pressure * volume / (specific_gas_constant * temperature);
        let mut state = GasTankState {
            pressure,
            volume,
            gas_mass,
            temperature,
            specific_gas_constant,
            process: GasProcess::Isothermal,
            depleted: false,
        };
        state.pressure = state.ideal_gas_pressure();
        Ok(state)
    }

    /// Switches to adiabatic expansion referenced to the current state.
    pub fn adiabatic(mut self, heat_capacity_ratio: f64) -> Self {
        self.process = GasProcess::Adiabatic {
            heat_capacity_ratio,
            reference_density: self.density(),
            reference_temperature: self.temperature,
        };
        self
    }

    pub fn density(&self) -> f64 {
        self.gas_mass / self.volume
    }

    fn ideal_gas_pressure(&self) -> f64 {
        self.gas_mass * self.specific_gas_constant * self.temperature / self.volume
    }

    /// Relative residual of the ideal gas law.
    pub fn ideal_gas_residual(&self) -> f64 {
        let pv = self.pressure * self.volume;
        let mrt = self.gas_mass * self.specific_gas_constant * self.temperature;
        if pv == 0.0 {
            return mrt.abs();
        }
        ((pv - mrt) / pv).abs()
    }

    pub(crate) fn with_mass_and_volume(&self, gas_mass: f64, volume: f64) -> Result<Self, ModelError> {
        if !(volume > 0.0) {
            return Err(ModelError::NonPositiveVolume(volume));
        }
        let mut next = *self;
        if gas_mass < 0.0 {
            next.gas_mass = 0.0;
            next.depleted = true;
        } else {
            next.gas_mass = gas_mass;
        }
        next.volume = volume;
        if let GasProcess::Adiabatic {
            heat_capacity_ratio,
            reference_density,
            reference_temperature,
        } = self.process
        {
            let density = next.gas_mass / volume;
            if density > 0.0 {
                next.temperature =
                    reference_temperature * (density / reference_density).powf(heat_capacity_ratio - 1.0);
            }
        }
        next.pressure = next.ideal_gas_pressure();
        Ok(next)
    }
}

/// Advances a gas volume by one explicit step of length `dt`.
pub fn step_gas_tank(
    state: &GasTankState,
    mdot_in: f64,
    mdot_out: f64,
    dvolume_dt: f64,
    dt: f64,
) -> Result<GasTankState, ModelError> {
    if !(dt > 0.0) {
        return Err(ModelError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mass = state.gas_mass + (mdot_in - mdot_out) * dt;
    let volume = state.volume + dvolume_dt * dt;
    state.with_mass_and_volume(mass, volume)
}

/// Propellant tank: liquid inventory below a pressurant ullage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropellantTankState {
    pub total_volume: f64,
    pub liquid_volume: f64,
    pub liquid_density: f64,
    pub ullage: GasTankState,
    /// Set once the liquid has run out; never cleared.
    pub depleted: bool,
}

impl PropellantTankState {
    pub fn new(
        total_volume: f64,
        ullage_fraction: f64,
        liquid_density: f64,
        pressure: f64,
        temperature: f64,
        specific_gas_constant: f64,
    ) -> Result<Self, ModelError> {
        if !(ullage_fraction > 0.0 && ullage_fraction <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "ullage fraction {ullage_fraction} outside (0, 1]"
            )));
        }
        if !(liquid_density > 0.0) {
            return Err(ModelError::InvalidParameter("liquid density must be positive".into()));
        }
        let liquid_volume = total_volume * (1.0 - ullage_fraction);
        let ullage = GasTankState::new(
            pressure,
            total_volume - liquid_volume,
            temperature,
            specific_gas_constant,
        )?;
        Ok(PropellantTankState {
            total_volume,
            liquid_volume,
            liquid_density,
            ullage,
            depleted: false,
        })
    }

    pub fn ullage_fraction(&self) -> f64 {
        1.0 - self.liquid_volume / self.total_volume
    }

    pub fn pressure(&self) -> f64 {
        self.ullage.pressure
    }

    pub fn liquid_mass(&self) -> f64 {
        self.liquid_volume * self.liquid_density
    }
}

/// Drains `liquid_vdot_out` from the tank while `pressurant_mdot_in` enters
/// the ullage (a negative inflow removes gas).
pub fn step_propellant_tank(
    state: &PropellantTankState,
    pressurant_mdot_in: f64,
    liquid_vdot_out: f64,
    dt: f64,
) -> Result<PropellantTankState, ModelError> {
    if !(dt > 0.0) {
        return Err(ModelError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut next = *state;
    let mut liquid = state.liquid_volume - liquid_vdot_out * dt;
    if liquid <= 0.0 {
        if liquid_vdot_out > 0.0 {
            next.depleted = true;
        }
        liquid = 0.0;
    }
    liquid = liquid.min(state.total_volume);
    next.liquid_volume = liquid;
    let mass = state.ullage.gas_mass + pressurant_mdot_in * dt;
    next.ullage = state
        .ullage
        .with_mass_and_volume(mass, state.total_volume - liquid)?;
    Ok(next)
}
