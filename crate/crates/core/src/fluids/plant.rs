//! Feed-system plant advanced by classical fourth-order Runge–Kutta.
//!
//! The integrated states are the gas masses and liquid volumes; pressures are
//! recomputed from the ideal gas law inside every stage. The flow laws are
//! algebraic and evaluated per stage.

use std::ops::{Add, Mul};

use super::chamber::ChamberModel;
use super::flow::gas_valve_mass_flow;
use super::network::{solve_feed, FeedBranch, FeedLine, FeedSolution, Injector};
use super::tank::{step_gas_tank, step_propellant_tank, GasTankState, PropellantTankState};
use super::valve::ValveModel;
use crate::error::ModelError;

/// Valve angles in degrees: ox tank, fuel tank, ox injector, fuel injector.
pub type ValveAngles = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantRates {
    /// Pressurant into each ullage, kg/s.
    pub gas_in: [f64; 2],
    /// Ullage mass sink standing in for pressurant collapse, kg/s.
    pub collapse: [f64; 2],
    /// Liquid leaving each tank, m³/s.
    pub liquid_out: [f64; 2],
}

impl PlantRates {
    pub fn supply_out(&self) -> f64 {
        self.gas_in[0] + self.gas_in[1]
    }
}

impl Add for PlantRates {
    type Output = PlantRates;
    fn add(self, o: PlantRates) -> PlantRates {
        let add2 = |a: [f64; 2], b: [f64; 2]| [a[0] + b[0], a[1] + b[1]];
        PlantRates {
            gas_in: add2(self.gas_in, o.gas_in),
            collapse: add2(self.collapse, o.collapse),
            liquid_out: add2(self.liquid_out, o.liquid_out),
        }
    }
}

impl Mul<f64> for PlantRates {
    type Output = PlantRates;
    fn mul(self, s: f64) -> PlantRates {
        let mul2 = |a: [f64; 2]| [a[0] * s, a[1] * s];
        PlantRates {
            gas_in: mul2(self.gas_in),
            collapse: mul2(self.collapse),
            liquid_out: mul2(self.liquid_out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub supply: GasTankState,
    pub tanks: [PropellantTankState; 2],
}

impl PlantState {
    pub fn total_gas_mass(&self) -> f64 {
        self.supply.gas_mass + self.tanks[0].ullage.gas_mass + self.tanks[1].ullage.gas_mass
    }
}

#[derive(Debug, Clone)]
pub struct Plant {
    pub valves: [ValveModel; 4],
    pub lines: [FeedLine; 2],
    pub injectors: [Injector; 2],
    pub chamber: Option<ChamberModel>,
    pub ambient_pressure: f64,
    /// Fraction of ullage mass lost per second; zero disables the effect.
    pub collapse_coefficient: [f64; 2],
    pub state: PlantState,
}

impl Plant {
    pub fn supply(&self) -> &GasTankState {
        &self.state.supply
    }

    pub fn tank(&self, i: usize) -> &PropellantTankState {
        &self.state.tanks[i]
    }

    fn branches(&self, state: &PlantState, angles: &ValveAngles) -> [FeedBranch; 2] {
        std::array::from_fn(|i| {
            let tank = &state.tanks[i];
            FeedBranch {
                tank_pressure: tank.pressure(),
                density: tank.liquid_density,
                line: self.lines[i],
                valve: self.valves[2 + i],
                angle: angles[2 + i],
                injector: self.injectors[i],
                liquid_available: tank.liquid_volume > 0.0,
            }
        })
    }

    /// Flow solution of the liquid network at the current state.
    pub fn feed(&self, angles: &ValveAngles) -> Result<FeedSolution, ModelError> {
        self.feed_at(&self.state, angles)
    }

    fn feed_at(&self, state: &PlantState, angles: &ValveAngles) -> Result<FeedSolution, ModelError> {
        solve_feed(
            &self.branches(state, angles),
            self.chamber.as_ref(),
            self.ambient_pressure,
        )
    }

    pub fn rates(&self, state: &PlantState, angles: &ValveAngles) -> Result<PlantRates, ModelError> {
        let feed = self.feed_at(state, angles)?;
        let mut rates = PlantRates::default();
        for i in 0..2 {
            rates.gas_in[i] = gas_valve_mass_flow(
                &self.valves[i],
                angles[i],
                state.supply.pressure,
                state.tanks[i].pressure(),
            )?;
            rates.collapse[i] = self.collapse_coefficient[i] * state.tanks[i].ullage.gas_mass;
            rates.liquid_out[i] = feed.branches[i].vdot;
        }
        Ok(rates)
    }

    fn advance(&self, state: &PlantState, r: &PlantRates, dt: f64) -> Result<PlantState, ModelError> {
        let supply = step_gas_tank(&state.supply, 0.0, r.supply_out(), 0.0, dt)?;
        let mut tanks = state.tanks;
        for (i, tank) in tanks.iter_mut().enumerate() {
            *tank = step_propellant_tank(tank, r.gas_in[i] - r.collapse[i], r.liquid_out[i], dt)?;
        }
        Ok(PlantState { supply, tanks })
    }

    /// One RK4 step. `angles_at(s)` gives the valve angles at fraction
    /// `s ∈ [0, 1]` of the step. Returns the step-averaged rates.
    pub fn step<F>(&mut self, angles_at: F, dt: f64) -> Result<PlantRates, ModelError>
    where
        F: Fn(f64) -> ValveAngles,
    {
        let s0 = self.state;
        let (a0, a_half, a1) = (angles_at(0.0), angles_at(0.5), angles_at(1.0));
        let k1 = self.rates(&s0, &a0)?;
        let k2 = self.rates(&self.advance(&s0, &k1, dt / 2.0)?, &a_half)?;
        let k3 = self.rates(&self.advance(&s0, &k2, dt / 2.0)?, &a_half)?;
        let k4 = self.rates(&self.advance(&s0, &k3, dt)?, &a1)?;
        let avg = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0);
        self.state = self.advance(&s0, &avg, dt)?;
        Ok(avg)
    }

    /// Forward-Euler step, used as an independent reference integrator.
    pub fn euler_step(&mut self, angles: &ValveAngles, dt: f64) -> Result<PlantRates, ModelError> {
        let r = self.rates(&self.state, angles)?;
        self.state = self.advance(&self.state, &r, dt)?;
        Ok(r)
    }
}
