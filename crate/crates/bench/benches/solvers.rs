use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fstsp_bench::{instance, optimal_plan};
use fstsp_core::exact::{brute_force, solve_exact};
use fstsp_core::hgenfs::{self, create_route, random_individual, GaParams, RouteMode};
use fstsp_core::milp::build_model;
use fstsp_core::evaluate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn evaluator(c: &mut Criterion) {
    let inst = instance(10, 1);
    let plan = optimal_plan(&inst);
    c.bench_function("evaluate/c10", |b| b.iter(|| evaluate(black_box(&inst), black_box(&plan))));
}

fn route_repair(c: &mut Criterion) {
    let mut group = c.benchmark_group("create_route");
    let inst = instance(10, 2);
    let params = GaParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let base = random_individual(&inst, &params, &mut rng);
    for mode in [RouteMode::Random, RouteMode::Best] {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| {
                let mut ch = base.clone();
                ch.invalidate();
                create_route(&inst, &mut ch, mode, 1000.0, &mut rng);
                ch
            })
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    group.sample_size(10);
    for n in [6usize, 8, 10] {
        let inst = instance(n, 3);
        group.bench_with_input(BenchmarkId::new("branch_and_bound", n), &inst, |b, inst| {
            b.iter(|| solve_exact(inst, Duration::from_secs(600)).unwrap().cost)
        });
    }
    let small = instance(6, 3);
    group.bench_function("brute_force/6", |b| b.iter(|| brute_force(&small).unwrap().1));
    group.finish();
}

fn model(c: &mut Criterion) {
    let inst = instance(10, 4);
    c.bench_function("milp/build_and_export/c10", |b| {
        b.iter(|| build_model(black_box(&inst)).export_lp().len())
    });
}

fn genetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("hgenfs");
    group.sample_size(10);
    let inst = instance(10, 5);
    for name in ["case2", "case4"] {
        let params = GaParams {
            restarts: 1,
            max_generations: Some(10),
            time_limit: Duration::from_secs(600),
            ..GaParams::preset(name).unwrap()
        };
        group.bench_function(format!("{name}/10_generations"), |b| {
            b.iter(|| hgenfs::run(&inst, &params).unwrap().cost)
        });
    }
    group.finish();
}

criterion_group!(benches, evaluator, route_repair, exact, model, genetic);
criterion_main!(benches);
