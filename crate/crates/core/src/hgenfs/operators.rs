use rand::seq::SliceRandom;
use rand::Rng;

use super::chromosome::{eval_chromosome, Chromosome};
use super::{GaParams, RouteMode};
use crate::instance::{Instance, SortieTriple};
use crate::solution::route_cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    Swap,
    Flip,
}

/// Roulette selection by stochastic acceptance with fitness `1 / cost`.
pub fn select_parent<R: Rng + ?Sized>(costs: &[f64], rng: &mut R) -> usize {
    assert!(!costs.is_empty(), "empty population");
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    loop {
        let u = rng.gen_range(0..costs.len());
        if rng.gen::<f64>() < best / costs[u] {
            return u;
        }
    }
}

/// Each child takes the order of one parent and the means of the other.
pub fn crossover_swap(p1: &Chromosome, p2: &Chromosome) -> (Chromosome, Chromosome) {
    (
        Chromosome::new(p1.order.clone(), p2.means.clone()),
        Chromosome::new(p2.order.clone(), p1.means.clone()),
    )
}

/// Ordered crossover carrying each customer's means bit, with random cuts.
pub fn crossover_dx2<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let n = p1.len();
    let mut a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    crossover_dx2_at(p1, p2, a, b)
}

/// [`crossover_dx2`] with the kept segment fixed to positions `a..=b`.
pub fn crossover_dx2_at(
    p1: &Chromosome,
    p2: &Chromosome,
    a: usize,
    b: usize,
) -> (Chromosome, Chromosome) {
    (dx2_child(p1, p2, a, b), dx2_child(p2, p1, a, b))
}

fn dx2_child(keep: &Chromosome, fill: &Chromosome, a: usize, b: usize) -> Chromosome {
    let n = keep.len();
    let mut order = vec![0; n];
    let mut means = vec![false; n];
    let mut taken = vec![false; n + 1];
    for p in a..=b {
        order[p] = keep.order[p];
        means[p] = keep.means[p];
        taken[keep.order[p]] = true;
    }
    let mut slots = (0..a).chain(b + 1..n);
    for (q, &j) in fill.order.iter().enumerate() {
        if !taken[j] {
            let p = slots.next().expect("slot count matches missing customers");
            order[p] = j;
            means[p] = fill.means[q];
        }
    }
    Chromosome::new(order, means)
}

/// Swaps two positions of `order` or flips one means bit, with equal odds.
/// Either way the chromosome needs [`create_route`] before evaluation.
pub fn mutate<R: Rng + ?Sized>(ch: &mut Chromosome, rng: &mut R) -> MutationKind {
    let n = ch.len();
    if n >= 2 && rng.gen_bool(0.5) {
        swap_positions(ch, rng);
        MutationKind::Swap
    } else {
        flip_means(ch, rng);
        MutationKind::Flip
    }
}

fn swap_positions<R: Rng + ?Sized>(ch: &mut Chromosome, rng: &mut R) {
    let (i, j) = distinct_pair(ch.len(), rng);
    ch.order.swap(i, j);
    ch.invalidate_at(i);
    ch.invalidate_at(j);
}

fn flip_means<R: Rng + ?Sized>(ch: &mut Chromosome, rng: &mut R) {
    let p = rng.gen_range(0..ch.len());
    ch.means[p] = !ch.means[p];
    ch.invalidate_at(p);
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Gives every drone-flagged position a launch and rendezvous node, in
/// sequence order. A sortie launches from a truck node sequenced before its
/// customer and lands at one sequenced after it, must be in the feasible
/// sortie set and must not overlap an earlier sortie. Existing pairs that
/// still meet these rules are kept; the rest are re-picked. Positions with
/// no candidate, or whose customer the drone may not serve, fall back to
/// the truck.
pub fn create_route<R: Rng + ?Sized>(
    inst: &Instance,
    ch: &mut Chromosome,
    mode: RouteMode,
    penalty_weight: f64,
    rng: &mut R,
) {
    for p in 0..ch.len() {
        if ch.means[p] && !inst.is_drone_eligible(ch.order[p]) {
            ch.means[p] = false;
        }
        if !ch.means[p] {
            ch.endpoints[p] = None;
        }
    }
    ch.cost = f64::INFINITY;
    let mut route = ch.truck_route(inst);
    let mut pos = vec![usize::MAX; inst.node_count()];
    let mut assigned: Vec<SortieTriple> = Vec::new();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let mut trial: Vec<SortieTriple> = Vec::new();
    let mut truck_before = 0;
    for p in 0..ch.len() {
        let j = ch.order[p];
        if !ch.means[p] {
            truck_before += 1;
            continue;
        }
        pos.iter_mut().for_each(|x| *x = usize::MAX);
        for (q, &v) in route.iter().enumerate() {
            pos[v] = q;
        }
        let clashes = |assigned: &[SortieTriple], a: usize, b: usize| {
            assigned.iter().any(|t| {
                let (x, y) = (pos[t.launch], pos[t.rendezvous]);
                a < y && x < b
            })
        };
        if let Some((i, k)) = ch.endpoints[p] {
            let (a, b) = (pos[i], pos[k]);
            let keep = a <= truck_before
                && b != usize::MAX
                && b > truck_before
                && inst.is_feasible_sortie(SortieTriple::new(i, j, k))
                && !clashes(&assigned, a, b);
            if keep {
                assigned.push(SortieTriple::new(i, j, k));
                continue;
            }
            ch.endpoints[p] = None;
        }
        candidates.clear();
        for a in 0..=truck_before {
            for b in truck_before + 1..route.len() {
                let s = SortieTriple::new(route[a], j, route[b]);
                if !inst.is_feasible_sortie(s) {
                    continue;
                }
                if !clashes(&assigned, a, b) {
                    candidates.push((a, b));
                }
            }
        }
        let pick = match mode {
            _ if candidates.is_empty() => None,
            RouteMode::Random => candidates.choose(rng).copied(),
            RouteMode::Best => {
                let mut best = (f64::INFINITY, None);
                for &(a, b) in &candidates {
                    trial.clear();
                    trial.extend_from_slice(&assigned);
                    trial.push(SortieTriple::new(route[a], j, route[b]));
                    trial.sort_by_key(|s| pos[s.launch]);
                    let (completion, excess) = route_cost(inst, &route, &trial);
                    let cost = completion + penalty_weight * excess;
                    if cost < best.0 {
                        best = (cost, Some((a, b)));
                    }
                }
                best.1
            }
        };
        match pick {
            Some((a, b)) => {
                let s = SortieTriple::new(route[a], j, route[b]);
                assigned.push(s);
                ch.endpoints[p] = Some((s.launch, s.rendezvous));
            }
            None => {
                ch.means[p] = false;
                route.insert(truck_before + 1, j);
                truck_before += 1;
            }
        }
    }
}

/// Rebuilds sorties and re-evaluates.
fn repair<R: Rng + ?Sized>(
    inst: &Instance,
    ch: &mut Chromosome,
    mode: RouteMode,
    params: &GaParams,
    rng: &mut R,
) {
    create_route(inst, ch, mode, params.penalty_weight, rng);
    eval_chromosome(inst, ch, params.penalty_weight);
}

/// `n_swap_search` rounds of: swap two positions (kept unconditionally),
/// then `n_drone_search` means flips that are rolled back when they do not
/// help.
pub fn local_search<R: Rng + ?Sized>(
    inst: &Instance,
    ch: &mut Chromosome,
    params: &GaParams,
    rng: &mut R,
) {
    let n = ch.len();
    for _ in 0..params.n_swap_search {
        if n >= 2 {
            swap_positions(ch, rng);
            repair(inst, ch, params.route_selection, params, rng);
        }
        drone_phase(inst, ch, params.n_drone_search, params, rng);
    }
}

/// `rounds` means flips, each kept only if the cost does not rise.
pub fn drone_phase<R: Rng + ?Sized>(
    inst: &Instance,
    ch: &mut Chromosome,
    rounds: usize,
    params: &GaParams,
    rng: &mut R,
) {
    if ch.is_empty() {
        return;
    }
    if !ch.cost.is_finite() {
        eval_chromosome(inst, ch, params.penalty_weight);
    }
    for _ in 0..rounds {
        let back = ch.clone();
        flip_means(ch, rng);
        repair(inst, ch, RouteMode::Best, params, rng);
        if ch.cost > back.cost {
            *ch = back;
        }
    }
}

/// Random order and random means, repaired and evaluated.
pub fn random_individual<R: Rng + ?Sized>(
    inst: &Instance,
    params: &GaParams,
    rng: &mut R,
) -> Chromosome {
    let c = inst.customers();
    let mut order: Vec<usize> = (1..=c).collect();
    order.shuffle(rng);
    let means = (0..c).map(|_| rng.gen_bool(0.5)).collect();
    let mut ch = Chromosome::new(order, means);
    repair(inst, &mut ch, params.route_selection, params, rng);
    ch
}

/// Crossover per `params`, optional mutation, then repair and evaluation.
pub fn offspring<R: Rng + ?Sized>(
    inst: &Instance,
    p1: &Chromosome,
    p2: &Chromosome,
    params: &GaParams,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let (mut c1, mut c2) = match params.crossover {
        super::CrossoverKind::Swap => crossover_swap(p1, p2),
        super::CrossoverKind::Dx2 => crossover_dx2(p1, p2, rng),
    };
    for ch in [&mut c1, &mut c2] {
        if rng.gen::<f64>() < params.mutation_rate {
            mutate(ch, rng);
        }
        repair(inst, ch, params.route_selection, params, rng);
    }
    (c1, c2)
}
