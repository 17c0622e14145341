//! Flying Sidekick TSP toolkit: one truck and one drone deliver to a set of
//! customers, minimizing the time both are back at the depot.
//!
//! - [`instance`]: problem data, travel-time matrices, feasible sorties.
//! - [`solution`]: plans, the synchronized timeline and feasibility rules.
//! - [`milp`]: the mixed-integer model, LP export and solution decoding.
//! - [`exact`]: enumeration oracle and branch-and-bound.
//! - [`hgenfs`]: the hybrid genetic algorithm.

pub mod exact;
pub mod hgenfs;
pub mod instance;
pub mod milp;
pub mod solution;

pub use instance::{FleetParams, GeneratorParams, Instance, InstanceError, NodePoint, SortieTriple};
pub use solution::{check_feasibility, evaluate, objective, Solution, SolutionError, Timeline, Violation};
