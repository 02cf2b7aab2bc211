//! Cascaded eReg controller: an outer pressure loop with model feedforward
//! and ramped gains sets the valve-angle target, and an inner loop drives
//! the valve motor toward it.

mod actuator;
mod ereg;
mod feedforward;
mod pid;
mod schedule;

pub use actuator::{actuator_step, quantize_angle, ActuatorParams, ActuatorState, Backlash};
pub use ereg::{
    ControlMode, ControllerVariant, EregController, EregKind, EregOutputs, InjectorFfReference,
    PrimaryInput,
};
pub use feedforward::{ff_injector, ff_tank, FeedforwardParams, DEFAULT_DP_FLOOR};
pub use pid::{pid_step, PidGains, PidState};
pub use schedule::{dynamic_gains, RampSchedule};
