//! Hybrid genetic algorithm for the truck-and-drone routing problem.
//!
//! Individuals are a delivery sequence plus a truck/drone flag per position.
//! Each generation keeps an elite, breeds children by SWAP or DX2 crossover,
//! tops the population up with random individuals and runs a two-phase
//! local search on everything but the elite. Independent restarts run on
//! scoped threads and the best feasible plan wins.

mod chromosome;
mod operators;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use chromosome::{decode_chromosome, eval_chromosome, Chromosome, DecodeError};
pub use operators::{
    create_route, crossover_dx2, crossover_dx2_at, crossover_swap, drone_phase, local_search,
    mutate, offspring, random_individual, select_parent, MutationKind,
};

use crate::exact::nearest_neighbor_tour;
use crate::instance::Instance;
use crate::solution::Solution;

const TARGET_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverKind {
    Swap,
    Dx2,
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossoverKind::Swap => "SWAP",
            CrossoverKind::Dx2 => "DX2",
        })
    }
}

/// How [`create_route`] chooses among candidate launch/rendezvous pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteMode {
    Random,
    Best,
}

impl FromStr for RouteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(RouteMode::Random),
            "best" => Ok(RouteMode::Best),
            other => Err(format!("unknown route mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub pop_size: usize,
    pub n_elite: usize,
    /// Children bred per generation (individuals, not pairs).
    pub n_crossover: usize,
    pub mutation_rate: f64,
    pub n_swap_search: usize,
    pub n_drone_search: usize,
    pub crossover: CrossoverKind,
    pub route_selection: RouteMode,
    /// Cost added per minute of endurance excess.
    pub penalty_weight: f64,
    pub time_limit: Duration,
    pub target_cost: Option<f64>,
    /// Optional generation cap, for runs that must not depend on the clock.
    pub max_generations: Option<u64>,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pop_size: 50,
            n_elite: 2,
            n_crossover: 40,
            mutation_rate: 0.2,
            n_swap_search: 10,
            n_drone_search: 10,
            crossover: CrossoverKind::Dx2,
            route_selection: RouteMode::Random,
            penalty_weight: 1000.0,
            time_limit: Duration::from_secs(30),
            target_cost: None,
            max_generations: None,
            seed: 0,
            restarts: 10,
        }
    }
}

pub const PRESET_NAMES: [&str; 6] = ["case1", "case2", "case3", "case4", "case5", "case6"];

impl GaParams {
    /// Named crossover and local-search settings `case1` to `case6`.
    pub fn preset(name: &str) -> Option<Self> {
        use CrossoverKind::*;
        let (crossover, n_swap_search, n_drone_search) = match name {
            "case1" => (Dx2, 10, 10),
            "case2" => (Dx2, 1, 20),
            "case3" => (Dx2, 20, 1),
            "case4" => (Swap, 10, 10),
            "case5" => (Swap, 1, 20),
            "case6" => (Swap, 20, 1),
            _ => return None,
        };
        Some(Self {
            crossover,
            n_swap_search,
            n_drone_search,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.pop_size == 0 {
            return Err("pop_size must be positive".into());
        }
        if self.n_elite + self.n_crossover > self.pop_size {
            return Err(format!(
                "n_elite + n_crossover = {} exceeds pop_size {}",
                self.n_elite + self.n_crossover,
                self.pop_size
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(format!("mutation_rate {} outside [0, 1]", self.mutation_rate));
        }
        if self.penalty_weight < 0.0 {
            return Err("penalty_weight must be non-negative".into());
        }
        if self.restarts == 0 {
            return Err("restarts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryPoint {
    pub generation: u64,
    pub elapsed_s: f64,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub solution: Solution,
    pub cost: f64,
    /// Improvements of the best feasible cost across all restarts, in time
    /// order.
    pub history: Vec<HistoryPoint>,
    /// Seconds until the target was first reached, if it was.
    pub time_to_target: Option<f64>,
    pub generations: u64,
    pub elapsed_s: f64,
    /// Per restart, the lowest penalized cost in the population after each
    /// generation (generation 0 first).
    pub population_best: Vec<Vec<f64>>,
}

impl GaResult {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("elapsed_s,best_cost\n");
        for h in &self.history {
            out.push_str(&format!("{},{}\n", h.elapsed_s, h.best_cost));
        }
        out
    }
}

struct RestartOutcome {
    best: Option<(f64, Chromosome)>,
    history: Vec<HistoryPoint>,
    generations: u64,
    population_best: Vec<f64>,
}

/// Runs `params.restarts` independent searches and returns the best
/// feasible plan found.
pub fn run(inst: &Instance, params: &GaParams) -> Result<GaResult, String> {
    params.validate()?;
    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let outcomes: Vec<RestartOutcome> = if params.restarts == 1 {
        vec![run_restart(inst, params, 0, &stop, started)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..params.restarts)
                .map(|r| {
                    let stop = &stop;
                    scope.spawn(move || run_restart(inst, params, r as u64, stop, started))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("restart worker panicked"))
                .collect()
        })
    };

    let mut best: Option<(f64, Chromosome)> = None;
    let mut points = Vec::new();
    let mut generations = 0;
    let mut population_best = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        generations += o.generations;
        population_best.push(o.population_best);
        points.extend(o.history);
        if let Some((cost, ch)) = o.best {
            if best.as_ref().is_none_or(|b| cost < b.0) {
                best = Some((cost, ch));
            }
        }
    }
    points.sort_by(|a, b| a.elapsed_s.total_cmp(&b.elapsed_s));
    let mut history: Vec<HistoryPoint> = Vec::new();
    for p in points {
        if history.last().is_none_or(|h| p.best_cost < h.best_cost) {
            history.push(p);
        }
    }
    let time_to_target = params.target_cost.and_then(|target| {
        history
            .iter()
            .find(|h| h.best_cost <= target + TARGET_EPS)
            .map(|h| h.elapsed_s)
    });
    let (cost, ch) = best.expect("the all-truck individual is always feasible");
    let solution = decode_chromosome(inst, &ch).expect("best individual decodes");
    Ok(GaResult {
        solution,
        cost,
        history,
        time_to_target,
        generations,
        elapsed_s: started.elapsed().as_secs_f64(),
        population_best,
    })
}

/// Seeded generator for restart `r`: one seed, one stream per restart.
pub fn restart_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

struct Tracker<'a> {
    inst: &'a Instance,
    params: &'a GaParams,
    started: Instant,
    stop: &'a AtomicBool,
    best: Option<(f64, Chromosome)>,
    history: Vec<HistoryPoint>,
    population_best: Vec<f64>,
}

impl Tracker<'_> {
    /// Records feasible improvements in a sorted `pop`; true once the target
    /// is met.
    fn observe(&mut self, pop: &[Chromosome], generation: u64) -> bool {
        self.population_best.push(pop[0].cost);
        for ch in pop {
            let improves = self.best.as_ref().is_none_or(|b| ch.cost < b.0);
            if improves && is_feasible_individual(self.inst, ch) {
                self.best = Some((ch.cost, ch.clone()));
                self.history.push(HistoryPoint {
                    generation,
                    elapsed_s: self.started.elapsed().as_secs_f64(),
                    best_cost: ch.cost,
                });
            }
        }
        let hit = match (self.params.target_cost, &self.best) {
            (Some(target), Some((cost, _))) => *cost <= target + TARGET_EPS,
            _ => false,
        };
        if hit {
            self.stop.store(true, Ordering::Relaxed);
        }
        hit
    }

    fn done(&self, generation: u64) -> bool {
        self.stop.load(Ordering::Relaxed)
            || self.started.elapsed() >= self.params.time_limit
            || self.params.max_generations.is_some_and(|g| generation >= g)
    }
}

/// Decodable with no endurance excess; the cached cost is then the exact
/// objective.
fn is_feasible_individual(inst: &Instance, ch: &Chromosome) -> bool {
    ch.cost.is_finite()
        && decode_chromosome(inst, ch).is_ok_and(|sol| {
            let (_, excess) = crate::solution::route_cost(inst, &sol.truck_route, &sol.sorties);
            excess <= 0.0
        })
}

fn sort_population(pop: &mut [Chromosome]) {
    pop.sort_by(|a, b| a.cost.total_cmp(&b.cost));
}

fn audit(pop: &[Chromosome]) {
    debug_assert!(pop.iter().all(Chromosome::is_permutation), "non-permutation in population");
}

fn run_restart(
    inst: &Instance,
    params: &GaParams,
    r: u64,
    stop: &AtomicBool,
    started: Instant,
) -> RestartOutcome {
    let mut rng = restart_rng(params.seed, r);
    let mut tracker = Tracker {
        inst,
        params,
        started,
        stop,
        best: None,
        history: Vec::new(),
        population_best: Vec::new(),
    };

    let (_, tour) = nearest_neighbor_tour(inst);
    let mut seed_ch = Chromosome::truck_only(tour.truck_route[1..tour.truck_route.len() - 1].to_vec());
    eval_chromosome(inst, &mut seed_ch, params.penalty_weight);
    let mut pop = Vec::with_capacity(params.pop_size);
    pop.push(seed_ch);
    while pop.len() < params.pop_size {
        pop.push(random_individual(inst, params, &mut rng));
    }
    sort_population(&mut pop);
    audit(&pop);
    let mut generation = 0;
    if tracker.observe(&pop, generation) {
        return finish(tracker, generation);
    }

    while !tracker.done(generation) {
        generation += 1;
        let costs: Vec<f64> = pop.iter().map(|c| c.cost).collect();
        let mut next: Vec<Chromosome> = pop.iter().take(params.n_elite).cloned().collect();
        let bred = params.n_elite + params.n_crossover;
        while next.len() < bred {
            let p1 = &pop[select_parent(&costs, &mut rng)];
            let p2 = &pop[select_parent(&costs, &mut rng)];
            let (c1, c2) = offspring(inst, p1, p2, params, &mut rng);
            next.push(c1);
            if next.len() < bred {
                next.push(c2);
            }
        }
        while next.len() < params.pop_size {
            next.push(random_individual(inst, params, &mut rng));
        }
        let elite = params.n_elite.min(next.len());
        for ch in &mut next[elite..] {
            local_search(inst, ch, params, &mut rng);
        }
        pop = next;
        sort_population(&mut pop);
        audit(&pop);
        if tracker.observe(&pop, generation) {
            break;
        }
    }
    finish(tracker, generation)
}

fn finish(tracker: Tracker<'_>, generation: u64) -> RestartOutcome {
    RestartOutcome {
        best: tracker.best,
        history: tracker.history,
        generations: generation,
        population_best: tracker.population_best,
    }
}
