//! Simulation of a pressure-fed bipropellant feed system regulated by
//! motorized ball-valve pressure regulators (eRegs).
//!
//! The crate is split along the physical/control boundary:
//!
//! * [`fluids`]: valve flow laws, tank thermodynamics, feed-line losses,
//!   injector orifices, the lumped thrust chamber and the fixed-step plant
//!   integrator.
//! * [`control`]: the cascaded regulator (pressure loop over valve-position
//!   loop) with model feedforward and a ramped gain schedule.
//! * [`scenario`]: declarative run descriptions, throttle profiles and
//!   injector sizing.
//! * [`calibration`]: fits for the valve curve, the tank feedforward constant
//!   and the choked-flow constant.
//! * [`sim`]: the co-simulation loop, telemetry CSV and regulation metrics.

pub mod calibration;
pub mod control;
pub mod error;
pub mod fluids;
pub mod scenario;
pub mod sim;
pub mod units;

pub use error::{Error, Result};
