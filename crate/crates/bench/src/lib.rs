//! Fixed instances and plans shared by the benchmarks.

use fstsp_core::exact::solve_exact;
use fstsp_core::{GeneratorParams, Instance, Solution};
use std::time::Duration;

/// Generated instance with default area, eligibility ratio and fleet.
pub fn instance(customers: usize, seed: u64) -> Instance {
    Instance::generate_random(&GeneratorParams {
        customers,
        seed,
        ..GeneratorParams::default()
    })
    .expect("generator parameters are valid")
}

/// Optimal plan for a small instance, used as a realistic input to the
/// evaluator.
pub fn optimal_plan(inst: &Instance) -> Solution {
    solve_exact(inst, Duration::from_secs(60))
        .expect("instance within exact solver limits")
        .solution
}
