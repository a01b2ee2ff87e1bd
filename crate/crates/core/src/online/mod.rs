//! Event-driven simulation of online scheduling policies.

mod policy;
mod sim;
mod speed;
mod trace;

pub use policy::{lssf_crossing, next_dispatch, thrashing_activation, PolicyKind, PolicySpec};
pub use sim::{simulate, simulated_schedule, SimState};
pub use speed::SpeedModel;
pub use trace::{busy_time_in_window, max_stretch, Event, EventKind, SimTrace};
