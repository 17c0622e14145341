use thiserror::Error;

use crate::instance::{Instance, SortieTriple};
use crate::solution::{route_cost, Solution};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("drone-flagged customer {0} has no launch/rendezvous pair")]
    MissingEndpoints(usize),
    #[error("sortie for customer {customer} uses node {node}, which is not on the truck route")]
    EndpointOffRoute { customer: usize, node: usize },
}

/// Delivery sequence plus a per-position delivery mode. Positions flagged
/// for the drone carry the (launch, rendezvous) nodes picked by
/// [`create_route`](super::create_route).
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub order: Vec<usize>,
    pub means: Vec<bool>,
    pub endpoints: Vec<Option<(usize, usize)>>,
    /// Penalized cost; infinite until evaluated.
    pub cost: f64,
}

impl Chromosome {
    pub fn new(order: Vec<usize>, means: Vec<bool>) -> Self {
        assert_eq!(order.len(), means.len(), "order and means differ in length");
        let n = order.len();
        Self {
            order,
            means,
            endpoints: vec![None; n],
            cost: f64::INFINITY,
        }
    }

    pub fn truck_only(order: Vec<usize>) -> Self {
        let n = order.len();
        Self::new(order, vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True when `order` holds each of `1..=len` exactly once.
    pub fn is_permutation(&self) -> bool {
        let n = self.order.len();
        let mut seen = vec![false; n + 1];
        self.order.iter().all(|&j| {
            (1..=n).contains(&j) && !std::mem::replace(&mut seen[j], true)
        })
    }

    pub fn drone_count(&self) -> usize {
        self.means.iter().filter(|&&m| m).count()
    }

    /// Drops every endpoint pair and the cached cost.
    pub fn invalidate(&mut self) {
        self.endpoints.iter_mut().for_each(|e| *e = None);
        self.cost = f64::INFINITY;
    }

    /// Drops the endpoint pair at `p` and the cached cost.
    pub fn invalidate_at(&mut self, p: usize) {
        self.endpoints[p] = None;
        self.cost = f64::INFINITY;
    }

    /// Truck route: start depot, truck-flagged customers in order, end depot.
    pub fn truck_route(&self, inst: &Instance) -> Vec<usize> {
        let mut route = Vec::with_capacity(self.order.len() + 2);
        route.push(0);
        route.extend(
            self.order
                .iter()
                .zip(&self.means)
                .filter(|(_, &m)| !m)
                .map(|(&j, _)| j),
        );
        route.push(inst.end_depot());
        route
    }
}

/// Route and launch-ordered sorties encoded by `ch`.
pub fn decode_chromosome(inst: &Instance, ch: &Chromosome) -> Result<Solution, DecodeError> {
    let route = ch.truck_route(inst);
    let mut pos = vec![usize::MAX; inst.node_count()];
    for (p, &v) in route.iter().enumerate() {
        pos[v] = p;
    }
    let mut sorties = Vec::with_capacity(ch.drone_count());
    for (p, &j) in ch.order.iter().enumerate() {
        if !ch.means[p] {
            continue;
        }
        let (i, k) = ch.endpoints[p].ok_or(DecodeError::MissingEndpoints(j))?;
        for node in [i, k] {
            if pos[node] == usize::MAX {
                return Err(DecodeError::EndpointOffRoute { customer: j, node });
            }
        }
        sorties.push(SortieTriple::new(i, j, k));
    }
    sorties.sort_by_key(|s| (pos[s.launch], *s));
    Ok(Solution::new(route, sorties))
}

/// Completion time plus `penalty_weight` per minute of endurance excess.
/// Caches the result on the chromosome. Undecodable chromosomes cost
/// infinity.
pub fn eval_chromosome(inst: &Instance, ch: &mut Chromosome, penalty_weight: f64) -> f64 {
    ch.cost = match decode_chromosome(inst, ch) {
        Ok(sol) => {
            let (completion, excess) = route_cost(inst, &sol.truck_route, &sol.sorties);
            completion + penalty_weight * excess
        }
        Err(_) => f64::INFINITY,
    };
    ch.cost
}
