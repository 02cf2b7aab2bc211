//! Run descriptions: plant constants, controller settings, throttle
//! profiles, and the scenario file format.

mod baseline;
mod config;
mod file;
mod profile;
mod throttle;

pub use baseline::baseline_file;
pub use config::{
    ControllerConfig, EngineConfig, LimitsConfig, MetricsConfig, Mode, ScenarioConfig,
    SensorConfig, SupplyConfig, TankConfig, Timing,
};
pub use file::{
    ControllerFile, EngineFile, FfReferenceFile, InjectorFile, LimitsFile, LineFile, MetricsFile,
    PerPropellant, PerValve, PointFile, ProfileFile, ScenarioFile, SegmentFile, SensorFile,
    SizingFile, SupplyFile, TankFile, TimingFile, ValveFile, SCHEMA_VERSION,
};
pub use profile::{setpoints_at, HoldWindow, ThrottleProfile, ThrottleSegment};
pub use throttle::{of_ratio, paired_setpoints_for_of, size_mock_injector};

/// Regulator positions, in telemetry column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EregId {
    OxTank,
    FuelTank,
    OxInjector,
    FuelInjector,
}

impl EregId {
    pub const ALL: [EregId; 4] = [
        EregId::OxTank,
        EregId::FuelTank,
        EregId::OxInjector,
        EregId::FuelInjector,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EregId::OxTank => "ox_tank",
            EregId::FuelTank => "fuel_tank",
            EregId::OxInjector => "ox_inj",
            EregId::FuelInjector => "fuel_inj",
        }
    }

    /// 0 for oxidizer, 1 for fuel.
    pub fn propellant(self) -> usize {
        self.index() % 2
    }

    pub fn is_tank(self) -> bool {
        self.index() < 2
    }
}
