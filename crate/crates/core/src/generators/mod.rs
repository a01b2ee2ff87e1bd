//! Adversarial and random instance generators.

mod adversary;
mod lower_bounds;
mod lssf;
mod random;
mod rational;
mod reduction;

pub use adversary::{
    adaptive_adversary, adaptive_adversary_rounds, AdaptiveAdversary, AdversaryCase,
    AdversaryOutcome, AdversaryRound, AdversaryStage,
};
pub use lower_bounds::{gen_edd, gen_fifo, gen_srpt};
pub use lssf::gen_lssf;
pub use random::{gen_random_feasible, gen_random_feasible_with, RandomConfig};
pub use rational::rationalize;
pub use reduction::{check_reduction, reduce_ssr, SsrQuery};
