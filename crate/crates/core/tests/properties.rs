use std::time::Duration;

use fstsp_core::exact::{brute_force, solve_exact, SolveStatus};
use fstsp_core::hgenfs::{
    crossover_dx2, crossover_swap, decode_chromosome, eval_chromosome, random_individual, run,
    Chromosome, GaParams,
};
use fstsp_core::milp::build_model;
use fstsp_core::solution::{route_cost, structural_violations};
use fstsp_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(c: usize, seed: u64, ratio: f64) -> Instance {
    Instance::generate_random(&GeneratorParams {
        customers: c,
        eligible_ratio: ratio,
        seed,
        ..Default::default()
    })
    .unwrap()
}

/// Structurally valid plan drawn through the GA's random individual.
fn random_plan(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
    let ch = random_individual(inst, &GaParams::default(), rng);
    decode_chromosome(inst, &ch).unwrap()
}

fn decomposition(inst: &Instance, sol: &Solution, tl: &Timeline) -> f64 {
    let legs: f64 = sol.truck_route.windows(2).map(|w| inst.truck(w[0], w[1])).sum();
    let launches: f64 = sol.sorties.iter().map(|s| inst.launch_time_at(s.launch)).sum();
    legs + launches + inst.sigma_recover() * sol.sorties.len() as f64 + tl.total_wait()
}

fn chromosome(c: usize, rng: &mut ChaCha8Rng) -> Chromosome {
    let mut order: Vec<usize> = (1..=c).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let means = (0..c).map(|_| rng.gen_bool(0.5)).collect();
    Chromosome::new(order, means)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_hold_invariants(c in 1usize..12, seed in any::<u64>(), ratio in 0.0f64..=1.0) {
        let inst = instance(c, seed, ratio);
        let n = c + 2;
        prop_assert_eq!(inst.node_count(), n);
        prop_assert_eq!(inst.drone_eligible().len(), (ratio * c as f64).round() as usize);
        for i in 0..n {
            prop_assert_eq!(inst.truck(i, i), 0.0);
            prop_assert_eq!(inst.drone(i, i), 0.0);
        }
        prop_assert_eq!(inst.truck(0, n - 1), 0.0);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn feasible_sorties_respect_endurance(c in 1usize..9, seed in any::<u64>(), e in 0.0f64..30.0) {
        let inst = instance(c, seed, 0.85).with_endurance(e);
        let f = inst.feasible_sorties();
        prop_assert!(f.windows(2).all(|w| w[0] < w[1]));
        for s in &f {
            prop_assert!(s.launch != s.customer && s.customer != s.rendezvous && s.launch != s.rendezvous);
            prop_assert!(s.launch <= c && s.rendezvous >= 1 && inst.is_drone_eligible(s.customer));
            prop_assert!(inst.flight_time(*s) + inst.sigma_recover() <= e);
        }
    }

    #[test]
    fn timeline_is_monotone_and_decomposes(c in 1usize..10, seed in any::<u64>(), draw in any::<u64>()) {
        let inst = instance(c, seed, 0.85);
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let sol = random_plan(&inst, &mut rng);
        prop_assert!(structural_violations(&inst, &sol).is_empty());
        let tl = evaluate(&inst, &sol).unwrap();
        let times: Vec<f64> = sol.truck_route.iter().map(|&v| tl.t[v]).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(tl.w.iter().all(|&w| w >= 0.0));
        prop_assert!((tl.completion - decomposition(&inst, &sol, &tl)).abs() < 1e-9);
        let (fast, excess) = route_cost(&inst, &sol.truck_route, &sol.sorties);
        prop_assert_eq!(fast, tl.completion);
        prop_assert!((excess - tl.total_excess()).abs() < 1e-12);
    }

    #[test]
    fn eval_matches_objective_when_feasible(c in 1usize..10, seed in any::<u64>(), draw in any::<u64>()) {
        let inst = instance(c, seed, 0.85);
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let mut ch = random_individual(&inst, &GaParams::default(), &mut rng);
        let sol = decode_chromosome(&inst, &ch).unwrap();
        let tl = evaluate(&inst, &sol).unwrap();
        let cost = eval_chromosome(&inst, &mut ch, 1000.0);
        prop_assert!((cost - (tl.completion + 1000.0 * tl.total_excess())).abs() < 1e-9);
        if tl.endurance_ok() {
            prop_assert_eq!(cost, objective(&inst, &sol).unwrap());
        }
    }

    #[test]
    fn crossovers_preserve_permutations(c in 2usize..15, draw in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let p1 = chromosome(c, &mut rng);
        let p2 = chromosome(c, &mut rng);
        let (s1, s2) = crossover_swap(&p1, &p2);
        prop_assert!(s1.is_permutation() && s2.is_permutation());
        let (d1, d2) = crossover_dx2(&p1, &p2, &mut rng);
        prop_assert!(d1.is_permutation() && d2.is_permutation());
    }

    #[test]
    fn milp_accepts_induced_assignments(c in 1usize..7, seed in any::<u64>(), draw in any::<u64>()) {
        let inst = instance(c, seed, 0.85);
        let model = build_model(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let sol = random_plan(&inst, &mut rng);
        prop_assume!(check_feasibility(&inst, &sol).is_empty());
        let values = model.assignment_for(&inst, &sol).unwrap();
        prop_assert!(model.violated_rows(&values, 1e-7).is_empty());
        let obj = objective(&inst, &sol).unwrap();
        prop_assert!((model.objective_value(&values) - obj).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_matches_oracle(c in 1usize..6, seed in any::<u64>()) {
        let inst = instance(c, seed, 0.85);
        let (_, oracle) = brute_force(&inst).unwrap();
        let r = solve_exact(&inst, Duration::from_secs(10)).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!((r.cost - oracle).abs() < 1e-9);
        prop_assert!(check_feasibility(&inst, &r.solution).is_empty());
    }
}

#[test]
fn dx2_children_trace_to_parents() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..10_000 {
        let c = rng.gen_range(2..12);
        let p1 = chromosome(c, &mut rng);
        let p2 = chromosome(c, &mut rng);
        let (child, _) = crossover_dx2(&p1, &p2, &mut rng);
        assert!(child.is_permutation());
        for (p, &j) in child.order.iter().enumerate() {
            let in_p1 = p1.order[p] == j && p1.means[p] == child.means[p];
            let q = p2.order.iter().position(|&x| x == j).unwrap();
            let in_p2 = p2.means[q] == child.means[p];
            assert!(in_p1 || in_p2, "position {p} of {child:?}");
        }
    }
}

#[test]
fn decoded_random_individuals_are_structurally_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = GaParams::default();
    for k in 0..10_000u64 {
        let inst = instance(1 + (k % 10) as usize, k / 10, 0.85);
        let ch = random_individual(&inst, &params, &mut rng);
        let sol = decode_chromosome(&inst, &ch).unwrap();
        assert!(structural_violations(&inst, &sol).is_empty(), "draw {k}");
    }
}

#[test]
fn elitism_keeps_population_best_non_increasing() {
    for seed in 0..5 {
        let inst = instance(8, 500 + seed, 0.85);
        let params = GaParams {
            restarts: 1,
            seed,
            max_generations: Some(30),
            time_limit: Duration::from_secs(600),
            ..GaParams::preset("case1").unwrap()
        };
        let res = run(&inst, &params).unwrap();
        let trace = &res.population_best[0];
        assert_eq!(trace.len(), 31);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(check_feasibility(&inst, &res.solution).is_empty());
    }
}
