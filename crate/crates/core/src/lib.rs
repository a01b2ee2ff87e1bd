//! Scheduling for procrastinators.
//!
//! Jobs execute at a speed that grows linearly from their release time, so
//! work done late is cheaper than work done early. The crate provides the
//! optimal offline policy (latest release time, swept backward), an
//! event-driven online simulator with five policies, and generators for
//! lower-bound and hardness instances. All arithmetic runs at a configurable
//! binary precision with explicit tolerance verdicts.

pub mod error;
pub mod generators;
pub mod job;
pub mod numeric;
pub mod offline;
pub mod online;
pub mod schedule;

pub use error::{Error, Result};
pub use job::{rightmost_running_time, Instance, Job, JobId, SpeedFunction};
pub use numeric::{Comparison, PrecisionContext, Real, DEFAULT_BITS};
pub use schedule::{Direction, Schedule, Segment};
