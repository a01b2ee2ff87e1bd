//! Offline scheduling: the backward latest-release-first sweep, feasibility
//! verdicts, schedule validation and a grid search oracle.

mod brute;
mod fill;
mod lrtb;
mod validate;

use std::collections::BTreeMap;

pub use brute::brute_force_optimal;
pub use fill::nonlazy_fill;
pub use lrtb::lrtb;
pub use validate::{validate_schedule, validate_schedule_with, ValidationReport, Violation};

use crate::job::JobId;
use crate::numeric::Real;
use crate::schedule::Schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    /// Some deciding comparison fell inside the tolerance band; retrying at
    /// higher precision may settle it.
    Indeterminate,
}

impl FeasibilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeasibilityStatus::Feasible => "feasible",
            FeasibilityStatus::Infeasible => "infeasible",
            FeasibilityStatus::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    /// Present when the status is `Feasible`.
    pub witness: Option<Schedule>,
    /// Unfinished work per job; empty unless infeasible.
    pub deficit: BTreeMap<JobId, Real>,
    /// Smallest signed slack encountered, in work units. Negative values are
    /// deficits.
    pub margin: Real,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}
