use crate::error::ModelError;

/// Lumped thrust chamber with a choked nozzle: `Pc = ṁ·c*/At`,
/// `F = Cf·Pc·At`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberModel {
    pub throat_area: f64,
    pub characteristic_velocity: f64,
    pub thrust_coefficient: f64,
    pub ambient_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberState {
    pub chamber_pressure: f64,
    pub thrust: f64,
}

impl ChamberModel {
    /// Solves throat area and thrust coefficient from one operating point
    /// and an assumed characteristic velocity.
    pub fn calibrated(
        mdot: f64,
        chamber_pressure: f64,
        thrust: f64,
        characteristic_velocity: f64,
        ambient_pressure: f64,
    ) -> Result<Self, ModelError> {
        if !(mdot > 0.0 && chamber_pressure > 0.0 && thrust > 0.0 && characteristic_velocity > 0.0) {
            return Err(ModelError::InvalidParameter(
                "chamber calibration point must be positive".into(),
            ));
        }
        let throat_area = mdot * characteristic_velocity / chamber_pressure;
        let thrust_coefficient = thrust / (chamber_pressure * throat_area);
        let chamber = ChamberModel {
            throat_area,
            characteristic_velocity,
            thrust_coefficient,
            ambient_pressure,
        };
        chamber.validate()?;
        Ok(chamber)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = [
            self.throat_area,
            self.characteristic_velocity,
            self.thrust_coefficient,
            self.ambient_pressure,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(
                "chamber parameters must be positive and finite".into(),
            ))
        }
    }

    /// `c*/At`: chamber pressure per unit total mass flow.
    pub fn pressure_per_mass_flow(&self) -> f64 {
        self.characteristic_velocity / self.throat_area
    }
}

/// Chamber pressure and thrust at a given total propellant flow. Pressure is
/// floored at ambient; thrust stays linear in flow and vanishes with it.
pub fn chamber_state(mdot_total: f64, chamber: &ChamberModel) -> ChamberState {
    let mdot = mdot_total.max(0.0);
    let pc = mdot * chamber.characteristic_velocity / chamber.throat_area;
    ChamberState {
        chamber_pressure: pc.max(chamber.ambient_pressure),
        thrust: chamber.thrust_coefficient * pc * chamber.throat_area,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::AMBIENT_PRESSURE;

    fn nominal() -> ChamberModel {
        ChamberModel::calibrated(1.63, 24e5, 3000.0, 1600.0, AMBIENT_PRESSURE).unwrap()
    }

    #[test]
    fn zero_flow_is_ambient_and_no_thrust() {
        let s = chamber_state(0.0, &nominal());
        assert_eq!(s.chamber_pressure, AMBIENT_PRESSURE);
        assert_eq!(s.thrust, 0.0);
    }

    #[test]
    fn calibration_back_substitution() {
        let c = nominal();
        assert!((c.throat_area - 1.087e-3).abs() < 0.0005e-3);
        assert!((c.thrust_coefficient - 1.15).abs() < 0.005);
        let s = chamber_state(1.63, &c);
        assert!((s.chamber_pressure - 24e5).abs() < 1e-6);
        assert!((s.thrust - 3000.0).abs() < 1e-9);
    }

    #[test]
    fn halving_flow_halves_pressure_and_thrust() {
        let c = nominal();
        let full = chamber_state(1.63, &c);
        let half = chamber_state(0.815, &c);
        assert!((half.chamber_pressure - full.chamber_pressure / 2.0).abs() < 1e-6);
        assert!((half.thrust - full.thrust / 2.0).abs() < 1e-9);
    }

    #[test]
    fn low_flow_floors_pressure_only() {
        let c = nominal();
        let s = chamber_state(0.01, &c);
        assert_eq!(s.chamber_pressure, AMBIENT_PRESSURE);
        assert!(s.thrust > 0.0);
    }
}
