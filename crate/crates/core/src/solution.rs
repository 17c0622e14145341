//! Truck-and-drone plans, their synchronized timeline and feasibility rules.
//!
//! The timeline is a forward simulation along the truck route. The launch
//! time is spent by the parked truck before it departs a launch node (it is
//! zero at the depot); the recovery time is spent after the later of the two
//! vehicles reaches the rendezvous. A drone that arrives first hovers, and
//! hovering counts against its endurance.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, SortieTriple};

/// A full plan: the truck route from depot `0` to depot `c + 1` and the drone
/// sorties flown alongside it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub truck_route: Vec<usize>,
    #[serde(with = "triple_arrays")]
    pub sorties: Vec<SortieTriple>,
}

mod triple_arrays {
    use super::SortieTriple;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[SortieTriple], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|t| [t.launch, t.customer, t.rendezvous])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SortieTriple>, D::Error> {
        let raw = Vec::<[usize; 3]>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|[i, j, k]| SortieTriple::new(i, j, k))
            .collect())
    }
}

impl Solution {
    pub fn new(truck_route: Vec<usize>, sorties: Vec<SortieTriple>) -> Self {
        Self {
            truck_route,
            sorties,
        }
    }

    /// Truck-only tour visiting `order` between the depots.
    pub fn truck_only(inst: &Instance, order: &[usize]) -> Self {
        let mut route = Vec::with_capacity(order.len() + 2);
        route.push(0);
        route.extend_from_slice(order);
        route.push(inst.end_depot());
        Self::new(route, Vec::new())
    }

    /// Sorts sorties by the route position of their launch node, the order
    /// in which they are flown. Unknown launch nodes go last.
    pub fn normalize(&mut self) {
        let pos = route_positions(&self.truck_route);
        self.sorties
            .sort_by_key(|s| (pos.get(s.launch).copied().flatten().unwrap_or(usize::MAX), *s));
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SolutionError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| SolutionError::Parse(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SolutionError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn route_positions(route: &[usize]) -> Vec<Option<usize>> {
    let max = route.iter().copied().max().unwrap_or(0);
    let mut pos = vec![None; max + 1];
    for (p, &n) in route.iter().enumerate() {
        if pos[n].is_none() {
            pos[n] = Some(p);
        }
    }
    pos
}

/// One broken rule, naming the offending nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyRoute,
    RouteStart { found: usize },
    RouteEnd { found: usize },
    NodeOutOfRange { node: usize },
    MisplacedDepot { node: usize, position: usize },
    RepeatedNode { node: usize },
    CustomerMissing { customer: usize },
    CustomerServedTwice { customer: usize },
    MalformedSortie { sortie: SortieTriple, reason: &'static str },
    SortieOutsideEndurance { sortie: SortieTriple },
    EndpointOffRoute { sortie: SortieTriple, node: usize },
    RendezvousBeforeLaunch { sortie: SortieTriple },
    DroneAlreadyAirborne { airborne: SortieTriple, launched: SortieTriple },
    EnduranceExceeded { sortie: SortieTriple, used: f64, excess: f64 },
}

impl Violation {
    /// Whether the violation is about timing only (the plan still has a
    /// well-defined timeline).
    pub fn is_timing(&self) -> bool {
        matches!(self, Violation::EnduranceExceeded { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyRoute => write!(f, "empty truck route"),
            Violation::RouteStart { found } => {
                write!(f, "truck route must start at depot 0, starts at {found}")
            }
            Violation::RouteEnd { found } => {
                write!(f, "truck route must end at the end depot, ends at {found}")
            }
            Violation::NodeOutOfRange { node } => write!(f, "node {node} out of range"),
            Violation::MisplacedDepot { node, position } => {
                write!(f, "depot {node} at interior route position {position}")
            }
            Violation::RepeatedNode { node } => write!(f, "node {node} visited twice by truck"),
            Violation::CustomerMissing { customer } => {
                write!(f, "customer {customer} not served")
            }
            Violation::CustomerServedTwice { customer } => {
                write!(f, "customer served twice: {customer}")
            }
            Violation::MalformedSortie { sortie, reason } => {
                write!(f, "malformed sortie {sortie}: {reason}")
            }
            Violation::SortieOutsideEndurance { sortie } => {
                write!(f, "sortie {sortie} flight plus recovery exceeds endurance")
            }
            Violation::EndpointOffRoute { sortie, node } => {
                write!(f, "sortie {sortie} endpoint {node} not on truck route")
            }
            Violation::RendezvousBeforeLaunch { sortie } => {
                write!(f, "sortie {sortie} rendezvous precedes launch on truck route")
            }
            Violation::DroneAlreadyAirborne { airborne, launched } => write!(
                f,
                "drone already airborne: {launched} launched while {airborne} in flight"
            ),
            Violation::EnduranceExceeded {
                sortie,
                used,
                excess,
            } => write!(
                f,
                "sortie {sortie} airborne {used:.3} min exceeds endurance by {excess:.3} min"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("structurally invalid solution: {}", join(.0))]
    Structural(Vec<Violation>),
    #[error("solution parse error: {0}")]
    Parse(String),
    #[error("i/o error")]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Timing of one flown sortie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SortieTiming {
    pub sortie: SortieTriple,
    /// Instant the drone leaves the truck (after launch handling).
    pub departure: f64,
    /// Instant the drone reaches the rendezvous node.
    pub ready: f64,
    /// Airborne time including hover and recovery.
    pub endurance_used: f64,
    /// `max(0, endurance_used - E)`.
    pub excess: f64,
}

/// Per-node synchronization times `t`, truck waits `w` and the completion
/// time. For drone-served customers `t` holds the drone's service instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub completion: f64,
    pub sorties: Vec<SortieTiming>,
}

impl Timeline {
    /// Sum of per-sortie endurance excess, in minutes.
    pub fn total_excess(&self) -> f64 {
        self.sorties.iter().map(|s| s.excess).sum()
    }

    pub fn endurance_ok(&self) -> bool {
        self.sorties.iter().all(|s| s.excess <= 0.0)
    }

    pub fn total_wait(&self) -> f64 {
        self.w.iter().sum()
    }

    /// `node,t,w` rows for the given node order.
    pub fn to_csv(&self, nodes: &[usize]) -> String {
        let mut out = String::from("node,t,w\n");
        for &n in nodes {
            out.push_str(&format!("{},{},{}\n", n, self.t[n], self.w[n]));
        }
        out
    }
}

/// Rules on the route and sortie structure, excluding timing.
pub fn structural_violations(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.node_count();
    let end = inst.end_depot();
    let route = &sol.truck_route;

    if route.is_empty() {
        out.push(Violation::EmptyRoute);
        return out;
    }
    if route[0] != 0 {
        out.push(Violation::RouteStart { found: route[0] });
    }
    if *route.last().unwrap() != end || route.len() < 2 {
        out.push(Violation::RouteEnd {
            found: *route.last().unwrap(),
        });
    }
    let mut pos = vec![None; n];
    for (p, &node) in route.iter().enumerate() {
        if node >= n {
            out.push(Violation::NodeOutOfRange { node });
            continue;
        }
        if (node == 0 || node == end) && p != 0 && p != route.len() - 1 {
            out.push(Violation::MisplacedDepot { node, position: p });
        }
        if pos[node].is_some() {
            out.push(Violation::RepeatedNode { node });
        } else {
            pos[node] = Some(p);
        }
    }

    let mut served = vec![0usize; n];
    for &node in route {
        if node < n && inst.is_customer(node) {
            served[node] += 1;
        }
    }
    let mut placed = Vec::with_capacity(sol.sorties.len());
    for &s in &sol.sorties {
        let SortieTriple {
            launch: i,
            customer: j,
            rendezvous: k,
        } = s;
        if i >= n || j >= n || k >= n {
            out.push(Violation::NodeOutOfRange {
                node: i.max(j).max(k),
            });
            continue;
        }
        if inst.is_customer(j) {
            served[j] += 1;
        }
        let reason = if i == j || j == k || i == k {
            Some("nodes must be distinct")
        } else if i == end {
            Some("launch from the end depot")
        } else if k == 0 {
            Some("rendezvous at the start depot")
        } else if !inst.is_customer(j) {
            Some("served node is not a customer")
        } else if !inst.is_drone_eligible(j) {
            Some("customer is not drone eligible")
        } else {
            None
        };
        if let Some(reason) = reason {
            out.push(Violation::MalformedSortie { sortie: s, reason });
            continue;
        }
        if !inst.is_feasible_sortie(s) {
            out.push(Violation::SortieOutsideEndurance { sortie: s });
        }
        let (pi, pk) = (pos[i], pos[k]);
        if pi.is_none() {
            out.push(Violation::EndpointOffRoute { sortie: s, node: i });
        }
        if pk.is_none() {
            out.push(Violation::EndpointOffRoute { sortie: s, node: k });
        }
        if let (Some(pi), Some(pk)) = (pi, pk) {
            if pi >= pk {
                out.push(Violation::RendezvousBeforeLaunch { sortie: s });
            } else {
                placed.push((pi, pk, s));
            }
        }
    }
    for j in 1..=inst.customers() {
        match served[j] {
            0 => out.push(Violation::CustomerMissing { customer: j }),
            1 => {}
            _ => out.push(Violation::CustomerServedTwice { customer: j }),
        }
    }
    placed.sort();
    for w in placed.windows(2) {
        let (_, prev_end, prev) = w[0];
        let (next_start, _, next) = w[1];
        if next_start < prev_end {
            out.push(Violation::DroneAlreadyAirborne {
                airborne: prev,
                launched: next,
            });
        }
    }
    out
}

/// All violated rules, including the endurance check on the evaluated
/// timeline. Empty means feasible.
pub fn check_feasibility(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let mut out = structural_violations(inst, sol);
    if out.is_empty() {
        let tl = simulate(inst, sol);
        for st in &tl.sorties {
            if st.excess > 0.0 {
                out.push(Violation::EnduranceExceeded {
                    sortie: st.sortie,
                    used: st.endurance_used,
                    excess: st.excess,
                });
            }
        }
    }
    out
}

pub fn is_feasible(inst: &Instance, sol: &Solution) -> bool {
    check_feasibility(inst, sol).is_empty()
}

/// Synchronized timeline of a structurally valid solution. Endurance excess
/// does not make this fail; it is reported per sortie.
pub fn evaluate(inst: &Instance, sol: &Solution) -> Result<Timeline, SolutionError> {
    let v = structural_violations(inst, sol);
    if !v.is_empty() {
        return Err(SolutionError::Structural(v));
    }
    Ok(simulate(inst, sol))
}

/// Completion time of a structurally valid solution.
pub fn objective(inst: &Instance, sol: &Solution) -> Result<f64, SolutionError> {
    evaluate(inst, sol).map(|t| t.completion)
}

fn simulate(inst: &Instance, sol: &Solution) -> Timeline {
    let mut sorted = sol.clone();
    sorted.normalize();
    let n = inst.node_count();
    let mut tl = Timeline {
        t: vec![0.0; n],
        w: vec![0.0; n],
        completion: 0.0,
        sorties: Vec::with_capacity(sorted.sorties.len()),
    };
    let (completion, _) = walk(inst, &sorted.truck_route, &sorted.sorties, Some(&mut tl));
    tl.completion = completion;
    tl
}

/// Completion time and total endurance excess of a route with sorties
/// ordered by launch position. Does not check structure; the route need
/// not cover every customer.
pub fn route_cost(inst: &Instance, route: &[usize], sorties: &[SortieTriple]) -> (f64, f64) {
    walk(inst, route, sorties, None)
}

fn walk(
    inst: &Instance,
    route: &[usize],
    sorties: &[SortieTriple],
    mut rec: Option<&mut Timeline>,
) -> (f64, f64) {
    let mut clock = 0.0;
    let mut next = 0;
    let mut active: Option<(SortieTriple, f64)> = None;
    let mut excess = 0.0;
    for leg in route.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        if active.is_none() && next < sorties.len() && sorties[next].launch == a {
            let s = sorties[next];
            next += 1;
            clock += inst.launch_time_at(a);
            active = Some((s, clock));
            if let Some(tl) = rec.as_deref_mut() {
                tl.t[s.customer] = clock + inst.drone(a, s.customer);
            }
        }
        let arrive = clock + inst.truck(a, b);
        match active {
            Some((s, departure)) if s.rendezvous == b => {
                let ready = departure + inst.flight_time(s);
                let wait = (ready - arrive).max(0.0);
                clock = arrive.max(ready) + inst.sigma_recover();
                let used = clock - departure;
                let over = (used - inst.endurance()).max(0.0);
                excess += over;
                active = None;
                if let Some(tl) = rec.as_deref_mut() {
                    tl.w[b] = wait;
                    tl.sorties.push(SortieTiming {
                        sortie: s,
                        departure,
                        ready,
                        endurance_used: used,
                        excess: over,
                    });
                }
            }
            _ => clock = arrive,
        }
        if let Some(tl) = rec.as_deref_mut() {
            tl.t[b] = clock;
        }
    }
    (clock, excess)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::NodePoint;

    fn matrix(n: usize, entries: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![100.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        m[0][n - 1] = 0.0;
        m[n - 1][0] = 0.0;
        for &(i, j, v) in entries {
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }

    fn nodes(n: usize) -> Vec<NodePoint> {
        (0..n).map(|k| NodePoint::new(k, 0.0, 0.0)).collect()
    }

    pub(crate) fn two_customer(truck_01: f64) -> Instance {
        let t = matrix(4, &[(0, 1, truck_01), (1, 3, 6.0), (0, 2, 7.0), (2, 1, 7.0), (2, 3, 7.0)]);
        let d = matrix(4, &[(0, 2, 2.0), (2, 1, 2.0), (2, 3, 2.0), (0, 1, 3.0), (1, 3, 3.0)]);
        Instance::new("two", nodes(4), vec![2], t, d, 1.0, 1.0, 20.0).unwrap()
    }

    #[test]
    fn truck_only_single_customer() {
        let t = matrix(3, &[(0, 1, 5.0), (1, 2, 5.0)]);
        let inst = Instance::new("one", nodes(3), vec![], t.clone(), t, 1.0, 1.0, 20.0).unwrap();
        let sol = Solution::truck_only(&inst, &[1]);
        let tl = evaluate(&inst, &sol).unwrap();
        assert_eq!(tl.completion, 10.0);
        assert!(tl.w.iter().all(|&w| w == 0.0));
        assert!(check_feasibility(&inst, &sol).is_empty());
    }

    #[test]
    fn depot_launch_truck_late() {
        let inst = two_customer(6.0);
        let sol = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(0, 2, 1)]);
        let tl = evaluate(&inst, &sol).unwrap();
        assert_eq!(tl.t[1], 7.0);
        assert_eq!(tl.w[1], 0.0);
        assert_eq!(tl.completion, 13.0);
        assert!(check_feasibility(&inst, &sol).is_empty());
    }

    #[test]
    fn depot_launch_truck_early_waits() {
        let inst = two_customer(2.0);
        let sol = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(0, 2, 1)]);
        let tl = evaluate(&inst, &sol).unwrap();
        assert_eq!(tl.t[1], 5.0);
        assert_eq!(tl.w[1], 2.0);
        assert_eq!(tl.completion, 11.0);
    }

    #[test]
    fn non_depot_launch_charges_sigma_launch() {
        let inst = two_customer(6.0);
        // Launch at 1 (t = 6), depart 7, drone ready at 7 + 2 + 2 = 11,
        // truck arrives 3 at 13, recovers to 14.
        let sol = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(1, 2, 3)]);
        let tl = evaluate(&inst, &sol).unwrap();
        assert_eq!(tl.sorties[0].departure, 7.0);
        assert_eq!(tl.completion, 14.0);
        assert_eq!(tl.sorties[0].endurance_used, 7.0);
    }

    #[test]
    fn customer_served_twice() {
        let inst = two_customer(6.0);
        let sol = Solution::new(vec![0, 2, 1, 3], vec![SortieTriple::new(0, 2, 1)]);
        let v = check_feasibility(&inst, &sol);
        assert!(v.contains(&Violation::CustomerServedTwice { customer: 2 }), "{v:?}");
        assert!(v.iter().any(|x| x.to_string().contains("customer served twice")));
        assert!(evaluate(&inst, &sol).is_err());
    }

    #[test]
    fn overlapping_sorties() {
        let t = matrix(5, &[]).iter().map(|r| r.iter().map(|v| v.min(5.0)).collect()).collect();
        let d = matrix(5, &[]).iter().map(|r| r.iter().map(|v| v.min(1.0)).collect()).collect();
        let inst = Instance::new("o", nodes(5), vec![2, 3], t, d, 1.0, 1.0, 20.0).unwrap();
        let sol = Solution::new(
            vec![0, 1, 4],
            vec![SortieTriple::new(0, 2, 4), SortieTriple::new(1, 3, 4)],
        );
        let v = check_feasibility(&inst, &sol);
        assert!(
            v.iter().any(|x| matches!(x, Violation::DroneAlreadyAirborne { .. })),
            "{v:?}"
        );
        assert!(v.iter().any(|x| x.to_string().contains("drone already airborne")));
        // Touching intervals are fine.
        let sol = Solution::new(
            vec![0, 1, 4],
            vec![SortieTriple::new(0, 2, 1), SortieTriple::new(1, 3, 4)],
        );
        assert!(check_feasibility(&inst, &sol).is_empty());
        let tl = evaluate(&inst, &sol).unwrap();
        // Back-to-back at node 1: recovery then launch.
        assert_eq!(tl.t[1], 5.0 + 1.0);
        assert_eq!(tl.sorties[1].departure, 7.0);
    }

    #[test]
    fn endurance_excess_is_reported_not_rejected() {
        let inst = two_customer(6.0).with_endurance(5.0);
        // Flight 4 + recovery 1 fits, but the truck takes 6 to reach node 1.
        let sol = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(0, 2, 1)]);
        let tl = evaluate(&inst, &sol).unwrap();
        assert_eq!(tl.sorties[0].endurance_used, 7.0);
        assert_eq!(tl.sorties[0].excess, 2.0);
        let v = check_feasibility(&inst, &sol);
        assert_eq!(v.len(), 1);
        assert!(v[0].is_timing());
    }

    #[test]
    fn structural_rules() {
        let inst = two_customer(6.0);
        let bad = Solution::new(vec![1, 2, 3], vec![]);
        let v = structural_violations(&inst, &bad);
        assert!(v.contains(&Violation::RouteStart { found: 1 }));
        assert!(!v.contains(&Violation::CustomerMissing { customer: 0 }));
        let missing = Solution::new(vec![0, 1, 3], vec![]);
        assert!(structural_violations(&inst, &missing)
            .contains(&Violation::CustomerMissing { customer: 2 }));
        let backwards = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(1, 2, 0)]);
        assert!(!structural_violations(&inst, &backwards).is_empty());
        let not_eligible = Solution::new(vec![0, 2, 3], vec![SortieTriple::new(0, 1, 2)]);
        assert!(structural_violations(&inst, &not_eligible)
            .iter()
            .any(|v| matches!(v, Violation::MalformedSortie { .. })));
    }

    #[test]
    fn json_uses_triple_arrays() {
        let sol = Solution::new(vec![0, 1, 3], vec![SortieTriple::new(0, 2, 1)]);
        let text = sol.to_json();
        assert!(text.contains("\"sorties\": [\n    [\n      0,"));
        assert_eq!(Solution::from_json(&text).unwrap(), sol);
    }
}
