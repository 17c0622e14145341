//! Exact optimization for small instances.
//!
//! [`brute_force`] enumerates every plan and is meant as a test oracle.
//! [`solve_exact`] is a depth-first branch-and-bound over truck-route
//! prefixes. A sortie's customer is fixed when the drone is launched and its
//! rendezvous when the truck reaches it, so every prefix has an exact
//! timeline.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::instance::{Instance, SortieTriple};
use crate::solution::{route_cost, Solution};

/// Largest customer count [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_CUSTOMERS: usize = 7;
/// Largest customer count [`solve_exact`] accepts (customer sets are
/// bitmasks).
pub const EXACT_MAX_CUSTOMERS: usize = 63;

const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("{customers} customers exceeds the limit of {limit}")]
    TooLarge { customers: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub solution: Solution,
    pub cost: f64,
    pub status: SolveStatus,
    /// Search nodes expanded.
    pub nodes: u64,
    /// Incumbent improvements as `(nodes expanded, cost)`.
    pub incumbents: Vec<(u64, f64)>,
}

/// Search switches; pruning off turns the search into plain enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub prune: bool,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            prune: true,
            time_limit: None,
        }
    }
}

fn better(cost: f64, sol: &Solution, best: &Option<(f64, Solution)>) -> bool {
    match best {
        None => true,
        Some((bc, bs)) => cost < bc - EPS || ((cost - bc).abs() <= EPS && sol < bs),
    }
}

/// Minimum-cost feasible plan by exhaustive enumeration: every split of the
/// customers into truck- and drone-served, every truck order and every
/// non-overlapping sortie assignment. Ties go to the lexicographically
/// smallest route, then sortie list.
pub fn brute_force(inst: &Instance) -> Result<(Solution, f64), ExactError> {
    let c = inst.customers();
    if c > BRUTE_FORCE_MAX_CUSTOMERS {
        return Err(ExactError::TooLarge {
            customers: c,
            limit: BRUTE_FORCE_MAX_CUSTOMERS,
        });
    }
    let end = inst.end_depot();
    let eligible = inst.drone_eligible();
    let mut best: Option<(f64, Solution)> = None;
    for mask in 0u32..(1 << eligible.len()) {
        let drone: Vec<usize> = eligible
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &j)| j)
            .collect();
        let mut truck: Vec<usize> = (1..=c).filter(|j| !drone.contains(j)).collect();
        loop {
            let mut route = Vec::with_capacity(truck.len() + 2);
            route.push(0);
            route.extend_from_slice(&truck);
            route.push(end);
            let mut intervals = Vec::new();
            assign_sorties(inst, &route, &drone, &mut intervals, &mut best);
            if !next_permutation(&mut truck) {
                break;
            }
        }
    }
    let (cost, sol) = best.expect("the all-truck tour is always feasible");
    Ok((sol, cost))
}

fn assign_sorties(
    inst: &Instance,
    route: &[usize],
    drone: &[usize],
    intervals: &mut Vec<(usize, usize, SortieTriple)>,
    best: &mut Option<(f64, Solution)>,
) {
    let Some((&j, rest)) = drone.split_first() else {
        let mut placed = intervals.clone();
        placed.sort();
        let sorties: Vec<SortieTriple> = placed.into_iter().map(|p| p.2).collect();
        let (cost, excess) = route_cost(inst, route, &sorties);
        if excess <= 0.0 {
            let sol = Solution::new(route.to_vec(), sorties);
            if better(cost, &sol, best) {
                *best = Some((cost, sol));
            }
        }
        return;
    };
    for a in 0..route.len() {
        for b in a + 1..route.len() {
            let s = SortieTriple::new(route[a], j, route[b]);
            if !inst.is_feasible_sortie(s) {
                continue;
            }
            if intervals.iter().any(|&(p, q, _)| a < q && p < b) {
                continue;
            }
            intervals.push((a, b, s));
            assign_sorties(inst, route, rest, intervals, best);
            intervals.pop();
        }
    }
}

/// Next lexicographic permutation in place; false when `v` was the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Branch-and-bound with the default configuration and a wall-clock limit.
pub fn solve_exact(inst: &Instance, time_limit: Duration) -> Result<ExactResult, ExactError> {
    solve_with(
        inst,
        SearchConfig {
            prune: true,
            time_limit: Some(time_limit),
        },
    )
}

pub fn solve_with(inst: &Instance, config: SearchConfig) -> Result<ExactResult, ExactError> {
    let c = inst.customers();
    if c > EXACT_MAX_CUSTOMERS {
        return Err(ExactError::TooLarge {
            customers: c,
            limit: EXACT_MAX_CUSTOMERS,
        });
    }
    let mut search = Search::new(inst, config);
    let (cost, sol) = nearest_neighbor_tour(inst);
    search.offer(cost, sol);
    search.route.push(0);
    search.expand(SearchNode {
        node: 0,
        clock: 0.0,
        drone: Drone::Aboard,
    });
    let status = if search.timed_out {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Optimal
    };
    let (_, mut solution) = search.best.expect("seeded with a feasible tour");
    solution.normalize();
    let (cost, _) = route_cost(inst, &solution.truck_route, &solution.sorties);
    Ok(ExactResult {
        solution,
        cost,
        status,
        nodes: search.nodes,
        incumbents: search.incumbents,
    })
}

/// All-truck tour built by always driving to the nearest unvisited customer.
pub fn nearest_neighbor_tour(inst: &Instance) -> (f64, Solution) {
    let c = inst.customers();
    let mut left: Vec<usize> = (1..=c).collect();
    let mut order = Vec::with_capacity(c);
    let mut cur = 0;
    while !left.is_empty() {
        let (k, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| inst.truck(cur, *a.1).total_cmp(&inst.truck(cur, *b.1)))
            .unwrap();
        cur = left.remove(k);
        order.push(cur);
    }
    let sol = Solution::truck_only(inst, &order);
    let (cost, _) = route_cost(inst, &sol.truck_route, &[]);
    (cost, sol)
}

#[derive(Debug, Clone, Copy)]
enum Drone {
    Aboard,
    Airborne { launch: usize, customer: usize, departure: f64 },
}

/// Truck at `node`, ready to leave at `clock`. The route prefix, committed
/// sorties and served set live in [`Search`].
#[derive(Debug, Clone, Copy)]
struct SearchNode {
    node: usize,
    clock: f64,
    drone: Drone,
}

struct Search<'a> {
    inst: &'a Instance,
    config: SearchConfig,
    started: Instant,
    /// Shortest-path closure of the truck matrix.
    closure: Vec<Vec<f64>>,
    /// Cheapest drone leg out of each customer, for the airborne bound.
    min_return: Vec<f64>,
    full: u64,
    served: u64,
    route: Vec<usize>,
    sorties: Vec<SortieTriple>,
    best: Option<(f64, Solution)>,
    incumbents: Vec<(u64, f64)>,
    memo: HashMap<(u64, usize), f64>,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, config: SearchConfig) -> Self {
        let n = inst.node_count();
        let mut closure: Vec<Vec<f64>> = inst.truck_matrix().to_vec();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = closure[i][k] + closure[k][j];
                    if via < closure[i][j] {
                        closure[i][j] = via;
                    }
                }
            }
        }
        let end = inst.end_depot();
        let min_return = (0..n)
            .map(|j| {
                (1..=end)
                    .filter(|&k| k != j)
                    .map(|k| inst.drone(j, k))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let c = inst.customers();
        Self {
            inst,
            config,
            started: Instant::now(),
            closure,
            min_return,
            full: if c == 64 { u64::MAX } else { (1u64 << c) - 1 },
            served: 0,
            route: Vec::with_capacity(c + 2),
            sorties: Vec::new(),
            best: None,
            incumbents: Vec::new(),
            memo: HashMap::new(),
            nodes: 0,
            timed_out: false,
        }
    }

    fn bit(j: usize) -> u64 {
        1u64 << (j - 1)
    }

    fn offer(&mut self, cost: f64, sol: Solution) {
        if better(cost, &sol, &self.best) {
            let improves = self.best.as_ref().is_none_or(|(bc, _)| cost < *bc - EPS);
            if improves {
                self.incumbents.push((self.nodes, cost));
            }
            self.best = Some((cost, sol));
        }
    }

    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.0)
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if let Some(limit) = self.config.time_limit {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() >= limit {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    /// Prim's MST over `node`, the end depot and the unserved customers the
    /// truck must visit, in the shortest-path metric.
    fn truck_bound(&self, node: usize) -> f64 {
        let end = self.inst.end_depot();
        let mut pts = vec![node, end];
        for j in 1..end {
            if self.served & Self::bit(j) == 0 && !self.inst.is_drone_eligible(j) {
                pts.push(j);
            }
        }
        let mut dist: Vec<f64> = pts
            .iter()
            .map(|&p| self.closure[node][p].min(self.closure[p][node]))
            .collect();
        let mut used = vec![false; pts.len()];
        used[0] = true;
        let mut total = 0.0;
        for _ in 1..pts.len() {
            let mut k = usize::MAX;
            for (q, &d) in dist.iter().enumerate() {
                if !used[q] && (k == usize::MAX || d < dist[k]) {
                    k = q;
                }
            }
            used[k] = true;
            total += dist[k];
            for q in 0..pts.len() {
                if !used[q] {
                    let (a, b) = (pts[k], pts[q]);
                    let d = self.closure[a][b].min(self.closure[b][a]);
                    if d < dist[q] {
                        dist[q] = d;
                    }
                }
            }
        }
        total
    }

    fn lower_bound(&self, at: &SearchNode) -> f64 {
        let mut lb = at.clock + self.truck_bound(at.node);
        if let Drone::Airborne {
            launch,
            customer,
            departure,
        } = at.drone
        {
            let ready = departure
                + self.inst.drone(launch, customer)
                + self.min_return[customer]
                + self.inst.sigma_recover();
            lb = lb.max(ready);
        }
        lb
    }

    fn expand(&mut self, at: SearchNode) {
        self.nodes += 1;
        if self.out_of_time() {
            return;
        }
        if self.config.prune {
            // Ties are explored so the lexicographic tie-break sees every
            // optimal plan.
            if self.lower_bound(&at) > self.incumbent() + EPS {
                return;
            }
            if let Drone::Aboard = at.drone {
                let key = (self.served, at.node);
                match self.memo.get(&key) {
                    Some(&seen) if at.clock > seen + EPS => return,
                    Some(&seen) if at.clock >= seen => {}
                    _ => {
                        self.memo.insert(key, at.clock);
                    }
                }
            }
        }
        if let Drone::Aboard = at.drone {
            if at.node != self.inst.end_depot() {
                self.try_launches(at);
            }
        }
        self.drive(at);
    }

    fn try_launches(&mut self, at: SearchNode) {
        let inst = self.inst;
        let mut options: Vec<usize> = inst
            .drone_eligible()
            .iter()
            .copied()
            .filter(|&j| j != at.node && self.served & Self::bit(j) == 0)
            .filter(|&j| {
                inst.drone(at.node, j) + self.min_return[j] + inst.sigma_recover()
                    <= inst.endurance()
            })
            .collect();
        options.sort_by(|&a, &b| {
            inst.drone(at.node, a)
                .total_cmp(&inst.drone(at.node, b))
                .then(a.cmp(&b))
        });
        for j in options {
            self.served |= Self::bit(j);
            let departure = at.clock + inst.launch_time_at(at.node);
            self.drive(SearchNode {
                node: at.node,
                clock: departure,
                drone: Drone::Airborne {
                    launch: at.node,
                    customer: j,
                    departure,
                },
            });
            self.served &= !Self::bit(j);
            if self.timed_out {
                return;
            }
        }
    }

    fn drive(&mut self, at: SearchNode) {
        let inst = self.inst;
        let end = inst.end_depot();
        let a = at.node;
        let mut next: Vec<usize> = if self.served == self.full {
            vec![end]
        } else {
            (1..end).filter(|&j| self.served & Self::bit(j) == 0).collect()
        };
        next.sort_by(|&p, &q| inst.truck(a, p).total_cmp(&inst.truck(a, q)).then(p.cmp(&q)));
        for b in next {
            let arrive = at.clock + inst.truck(a, b);
            if b != end {
                self.served |= Self::bit(b);
            }
            self.route.push(b);
            match at.drone {
                Drone::Aboard => self.arrive(b, arrive, Drone::Aboard),
                Drone::Airborne {
                    launch,
                    customer,
                    departure,
                } => {
                    let s = SortieTriple::new(launch, customer, b);
                    if inst.is_feasible_sortie(s) {
                        let ready = departure + inst.flight_time(s);
                        let clock = arrive.max(ready) + inst.sigma_recover();
                        if clock - departure <= inst.endurance() {
                            self.sorties.push(s);
                            self.arrive(b, clock, Drone::Aboard);
                            self.sorties.pop();
                        }
                    }
                    if b != end && arrive - departure + inst.sigma_recover() <= inst.endurance() {
                        self.arrive(b, arrive, at.drone);
                    }
                }
            }
            self.route.pop();
            if b != end {
                self.served &= !Self::bit(b);
            }
            if self.timed_out {
                return;
            }
        }
    }

    fn arrive(&mut self, b: usize, clock: f64, drone: Drone) {
        if b == self.inst.end_depot() {
            if let Drone::Aboard = drone {
                let sol = Solution::new(self.route.clone(), self.sorties.clone());
                self.offer(clock, sol);
            }
            return;
        }
        self.expand(SearchNode {
            node: b,
            clock,
            drone,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{GeneratorParams, NodePoint};
    use crate::solution::{check_feasibility, objective};

    fn two_customer() -> Instance {
        // Same numbers as the timeline example: truck 0-1 and 1-3 take 6,
        // everything touching customer 2 is slow by truck.
        let nodes = (0..4).map(|k| NodePoint::new(k, 0.0, 0.0)).collect();
        let mut t = vec![vec![7.0; 4]; 4];
        let mut d = vec![vec![3.0; 4]; 4];
        for m in [&mut t, &mut d] {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = 0.0;
            }
            m[0][3] = 0.0;
            m[3][0] = 0.0;
        }
        t[0][1] = 6.0;
        t[1][0] = 6.0;
        t[1][3] = 6.0;
        t[3][1] = 6.0;
        for (i, j) in [(0, 2), (2, 1), (2, 3)] {
            d[i][j] = 2.0;
            d[j][i] = 2.0;
        }
        Instance::new("two", nodes, vec![2], t, d, 1.0, 1.0, 20.0).unwrap()
    }

    #[test]
    fn permutations_in_order() {
        let mut v = vec![1, 2, 3];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![1, 3, 2]);
        assert_eq!(seen[5], vec![3, 2, 1]);
    }

    #[test]
    fn single_customer_brute_force() {
        let nodes = (0..3).map(|k| NodePoint::new(k, 0.0, 0.0)).collect();
        let t = vec![vec![0.0, 4.0, 0.0], vec![4.0, 0.0, 3.5], vec![0.0, 3.5, 0.0]];
        let inst = Instance::new("one", nodes, vec![], t.clone(), t, 1.0, 1.0, 20.0).unwrap();
        let (sol, cost) = brute_force(&inst).unwrap();
        assert_eq!(sol.truck_route, vec![0, 1, 2]);
        assert_eq!(cost, 7.5);
        let r = solve_exact(&inst, Duration::from_secs(5)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.cost, 7.5);
    }

    #[test]
    fn drone_wins_on_two_customers() {
        let inst = two_customer();
        let (sol, cost) = brute_force(&inst).unwrap();
        assert_eq!(cost, 13.0);
        assert_eq!(sol.truck_route, vec![0, 1, 3]);
        assert_eq!(sol.sorties, vec![SortieTriple::new(0, 2, 1)]);
        // Truck-only alternatives are worse.
        let truck = Solution::truck_only(&inst, &[1, 2]);
        assert!(objective(&inst, &truck).unwrap() > 13.0);
        let r = solve_exact(&inst, Duration::from_secs(5)).unwrap();
        assert_eq!(r.cost, 13.0);
        assert!(check_feasibility(&inst, &r.solution).is_empty());
    }

    #[test]
    fn brute_force_guard() {
        let p = GeneratorParams {
            customers: 8,
            ..Default::default()
        };
        let inst = Instance::generate_random(&p).unwrap();
        assert!(matches!(brute_force(&inst), Err(ExactError::TooLarge { .. })));
    }

    #[test]
    fn pruning_off_matches_brute_force() {
        for seed in 0..20 {
            let p = GeneratorParams {
                customers: 4,
                seed,
                ..Default::default()
            };
            let inst = Instance::generate_random(&p).unwrap();
            let (_, oracle) = brute_force(&inst).unwrap();
            let plain = solve_with(
                &inst,
                SearchConfig {
                    prune: false,
                    time_limit: None,
                },
            )
            .unwrap();
            assert!((plain.cost - oracle).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn incumbents_never_increase() {
        let inst = Instance::generate_random(&GeneratorParams {
            customers: 7,
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        let r = solve_exact(&inst, Duration::from_secs(30)).unwrap();
        assert!(r.incumbents.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(r.incumbents.last().unwrap().1, r.cost);
    }

    #[test]
    fn time_limit_returns_feasible_incumbent() {
        let inst = Instance::generate_random(&GeneratorParams {
            customers: 12,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        let r = solve_exact(&inst, Duration::from_millis(1)).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimit);
        assert!(check_feasibility(&inst, &r.solution).is_empty());
        assert!((objective(&inst, &r.solution).unwrap() - r.cost).abs() < 1e-9);
    }
}
