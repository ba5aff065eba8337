//! Core domain types: instances with weak ordinal preferences and cardinal
//! utilities, two-sided capacity intervals, allocations and rank vectors.

mod allocation;
mod instance;
mod objective;
mod rank;

pub use allocation::{is_balanced, Allocation, AllocationStatus};
pub use instance::{borda_utilities, build_instance, Capacity, Instance, UtilitySign, WeakOrder};
pub use objective::{lsowa_weights, welfare, Objective, WelfareValue};
pub use rank::{rank_vector, RankVector};
