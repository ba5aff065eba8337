//! Fair allocation of indivisible items under two-sided capacity constraints.
//!
//! The centerpiece is [`crr::w_crr`], a round-robin picker that only accepts
//! picks a completion oracle certifies as extendable to an allocation meeting
//! a welfare target ([`welfare::WelfareGoal`]). [`fairness`] audits the result
//! with envy-based criteria, and [`io`] covers instance files, preference
//! ingestion, Mallows sampling and experiment sweeps.

pub mod crr;
pub mod error;
pub mod fairness;
pub mod io;
pub mod model;
pub mod par;
pub mod welfare;

pub use error::{CrrError, FairnessError, FlowError, IoError, ModelError, WelfareError};
