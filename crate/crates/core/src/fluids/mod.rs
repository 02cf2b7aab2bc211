//! Physical models of the feed system.

mod chamber;
mod flow;
mod network;
mod plant;
mod tank;
mod valve;

pub use chamber::{chamber_state, ChamberModel, ChamberState};
pub use flow::{
    choked_gas_mass_flow, darcy_weisbach_dp, gas_valve_mass_flow, liquid_volumetric_flow,
    orifice_mass_flow, CRITICAL_PRESSURE_RATIO,
};
pub use network::{
    flows_at_manifold_pressures, solve_feed, BranchFlow, FeedBranch, FeedLine, FeedSolution,
    Injector, ManifoldSolution,
};
pub use plant::{Plant, PlantRates, PlantState, ValveAngles};
pub use tank::{step_gas_tank, step_propellant_tank, GasProcess, GasTankState, PropellantTankState};
pub use valve::{cv_of_angle, ValveModel, VALVE_FULL_THROW};
