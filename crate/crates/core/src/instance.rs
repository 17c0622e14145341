//! Problem data for the Flying Sidekick TSP.
//!
//! Node indices follow the usual layout: `0` is the start depot, `1..=c` are
//! customers and `c + 1` is the end depot (same physical point as `0`).
//! Travel times are stored as dense `(c + 2) x (c + 2)` matrices in minutes.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default truck speed used by the generator, km/min (about 40 km/h).
pub const DEFAULT_TRUCK_SPEED: f64 = 0.67;
/// Default drone speed used by the generator, km/min.
pub const DEFAULT_DRONE_SPEED: f64 = 0.67;
pub const DEFAULT_ENDURANCE: f64 = 20.0;
pub const DEFAULT_SIGMA: f64 = 1.0;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("empty customer set")]
    EmptyCustomerSet,
    #[error("duplicate node id {0}")]
    DuplicateNodeId(usize),
    #[error("node ids must be 0..={expected_max}, found {found}")]
    NodeIdOutOfRange { found: usize, expected_max: usize },
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("csv error")]
    Csv(#[from] csv::Error),
    #[error("i/o error")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePoint {
    pub id: usize,
    /// Meters.
    pub x: f64,
    /// Meters.
    pub y: f64,
}

impl NodePoint {
    pub fn new(id: usize, x: f64, y: f64) -> Self {
        Self { id, x, y }
    }
}

/// A drone flight: launch from `launch`, serve `customer`, rejoin the truck at
/// `rendezvous`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SortieTriple {
    pub launch: usize,
    pub customer: usize,
    pub rendezvous: usize,
}

impl SortieTriple {
    pub fn new(launch: usize, customer: usize, rendezvous: usize) -> Self {
        Self {
            launch,
            customer,
            rendezvous,
        }
    }
}

impl fmt::Display for SortieTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.launch, self.customer, self.rendezvous)
    }
}

/// Vehicle parameters for building an instance from coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetParams {
    /// km/min.
    pub truck_speed: f64,
    /// km/min.
    pub drone_speed: f64,
    pub sigma_launch: f64,
    pub sigma_recover: f64,
    pub endurance: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        Self {
            truck_speed: DEFAULT_TRUCK_SPEED,
            drone_speed: DEFAULT_DRONE_SPEED,
            sigma_launch: DEFAULT_SIGMA,
            sigma_recover: DEFAULT_SIGMA,
            endurance: DEFAULT_ENDURANCE,
        }
    }
}

/// Settings for [`Instance::generate_random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub customers: usize,
    pub area_km2: f64,
    pub eligible_ratio: f64,
    pub seed: u64,
    pub fleet: FleetParams,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            customers: 10,
            area_km2: 13.0,
            eligible_ratio: 0.85,
            seed: 0,
            fleet: FleetParams::default(),
        }
    }
}

/// An FSTSP instance. Immutable once built; construct it through
/// [`Instance::new`], [`Instance::build_from_coordinates`],
/// [`Instance::generate_random`] or [`Instance::load`] so the invariants hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    #[serde(rename = "c")]
    customers: usize,
    nodes: Vec<NodePoint>,
    drone_eligible: Vec<usize>,
    tau_truck: Vec<Vec<f64>>,
    tau_drone: Vec<Vec<f64>>,
    sigma_launch: f64,
    sigma_recover: f64,
    endurance: f64,
    #[serde(skip)]
    eligible_mask: Vec<bool>,
}

impl Instance {
    /// Builds an instance from explicit matrices and validates it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<NodePoint>,
        drone_eligible: Vec<usize>,
        tau_truck: Vec<Vec<f64>>,
        tau_drone: Vec<Vec<f64>>,
        sigma_launch: f64,
        sigma_recover: f64,
        endurance: f64,
    ) -> Result<Self, InstanceError> {
        let customers = nodes.len().saturating_sub(2);
        let mut inst = Self {
            name: name.into(),
            customers,
            nodes,
            drone_eligible,
            tau_truck,
            tau_drone,
            sigma_launch,
            sigma_recover,
            endurance,
            eligible_mask: Vec::new(),
        };
        inst.finish()?;
        Ok(inst)
    }

    /// Manhattan truck times and Euclidean drone times from coordinates in
    /// meters. `nodes` holds the depot (id 0) and the customers (ids 1..=c);
    /// the end depot `c + 1` is appended as a copy of the depot. If the last
    /// node repeats the depot coordinates it is taken as the end depot.
    pub fn build_from_coordinates(
        name: impl Into<String>,
        nodes: &[NodePoint],
        drone_eligible: &[usize],
        fleet: FleetParams,
    ) -> Result<Self, InstanceError> {
        for speed in [fleet.truck_speed, fleet.drone_speed] {
            if !(speed > 0.0) || !speed.is_finite() {
                return Err(InstanceError::NonPositiveSpeed(speed));
            }
        }
        let mut seen = BTreeSet::new();
        for n in nodes {
            if !seen.insert(n.id) {
                return Err(InstanceError::DuplicateNodeId(n.id));
            }
        }
        let mut sorted: Vec<NodePoint> = nodes.to_vec();
        sorted.sort_by_key(|n| n.id);
        let explicit_end = sorted.len() >= 2 && {
            let last = sorted[sorted.len() - 1];
            last.x == sorted[0].x && last.y == sorted[0].y
        };
        if explicit_end {
            sorted.pop();
        }
        if sorted.len() < 2 {
            return Err(InstanceError::EmptyCustomerSet);
        }
        for (expected, n) in sorted.iter().enumerate() {
            if n.id != expected {
                return Err(InstanceError::NodeIdOutOfRange {
                    found: n.id,
                    expected_max: sorted.len() - 1,
                });
            }
        }
        let c = sorted.len() - 1;
        let depot = sorted[0];
        sorted.push(NodePoint::new(c + 1, depot.x, depot.y));

        let n = c + 2;
        let mut tau_truck = vec![vec![0.0; n]; n];
        let mut tau_drone = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dx = (sorted[i].x - sorted[j].x) / 1000.0;
                let dy = (sorted[i].y - sorted[j].y) / 1000.0;
                tau_truck[i][j] = (dx.abs() + dy.abs()) / fleet.truck_speed;
                tau_drone[i][j] = dx.hypot(dy) / fleet.drone_speed;
            }
        }
        for m in [&mut tau_truck, &mut tau_drone] {
            m[0][c + 1] = 0.0;
            m[c + 1][0] = 0.0;
        }
        Self::new(
            name,
            sorted,
            drone_eligible.to_vec(),
            tau_truck,
            tau_drone,
            fleet.sigma_launch,
            fleet.sigma_recover,
            fleet.endurance,
        )
    }

    /// Random instance: customers uniform over a square of the given area,
    /// depot at their centroid, `round(ratio * c)` drone-eligible customers.
    pub fn generate_random(params: &GeneratorParams) -> Result<Self, InstanceError> {
        let c = params.customers;
        if c == 0 {
            return Err(InstanceError::EmptyCustomerSet);
        }
        if !(0.0..=1.0).contains(&params.eligible_ratio) {
            return Err(InstanceError::Invariant(format!(
                "eligible ratio {} outside [0, 1]",
                params.eligible_ratio
            )));
        }
        if !(params.area_km2 >= 0.0) {
            return Err(InstanceError::Invariant(format!(
                "area {} must be non-negative",
                params.area_km2
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let side_m = params.area_km2.sqrt() * 1000.0;
        let mut points: Vec<(f64, f64)> = (0..c)
            .map(|_| (rng.gen::<f64>() * side_m, rng.gen::<f64>() * side_m))
            .collect();
        let cx = points.iter().map(|p| p.0).sum::<f64>() / c as f64;
        let cy = points.iter().map(|p| p.1).sum::<f64>() / c as f64;
        let mut nodes = vec![NodePoint::new(0, cx, cy)];
        nodes.extend(
            points
                .drain(..)
                .enumerate()
                .map(|(k, (x, y))| NodePoint::new(k + 1, x, y)),
        );
        nodes.push(NodePoint::new(c + 1, cx, cy));
        let n_eligible = ((params.eligible_ratio * c as f64).round() as usize).min(c);
        let mut ids: Vec<usize> = (1..=c).collect();
        ids.shuffle(&mut rng);
        let mut eligible: Vec<usize> = ids.into_iter().take(n_eligible).collect();
        eligible.sort_unstable();
        let name = format!(
            "rand-c{}-a{}-r{}-s{}",
            c, params.area_km2, params.eligible_ratio, params.seed
        );
        Self::build_from_coordinates(name, &nodes, &eligible, params.fleet)
    }

    /// Imports a coordinate CSV with header `id,x,y,drone_eligible`
    /// (meters; eligibility as 0/1). Row `0` is the depot.
    pub fn import_coordinates_csv(
        path: impl AsRef<Path>,
        fleet: FleetParams,
    ) -> Result<Self, InstanceError> {
        #[derive(Deserialize)]
        struct Row {
            id: usize,
            x: f64,
            y: f64,
            #[serde(default)]
            drone_eligible: u8,
        }
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut nodes = Vec::new();
        let mut eligible = Vec::new();
        for row in reader.deserialize() {
            let row: Row = row?;
            if row.id != 0 && row.drone_eligible != 0 {
                eligible.push(row.id);
            }
            nodes.push(NodePoint::new(row.id, row.x, row.y));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "imported".to_string());
        Self::build_from_coordinates(name, &nodes, &eligible, fleet)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let mut inst: Instance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        inst.finish()?;
        Ok(inst)
    }

    /// Canonical serialization. `f64` values are written in shortest
    /// round-trip form, so load and save are exact inverses.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    fn finish(&mut self) -> Result<(), InstanceError> {
        self.drone_eligible.sort_unstable();
        self.drone_eligible.dedup();
        self.validate()?;
        self.eligible_mask = vec![false; self.customers + 2];
        for &j in &self.drone_eligible {
            self.eligible_mask[j] = true;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let c = self.customers;
        if c == 0 {
            return Err(InstanceError::EmptyCustomerSet);
        }
        let n = c + 2;
        if self.nodes.len() != n {
            return Err(InstanceError::Invariant(format!(
                "expected {} nodes for c = {}, found {}",
                n,
                c,
                self.nodes.len()
            )));
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.id != k {
                return Err(InstanceError::NodeIdOutOfRange {
                    found: node.id,
                    expected_max: n - 1,
                });
            }
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(InstanceError::Invariant(format!(
                    "node {} has non-finite coordinates",
                    k
                )));
            }
        }
        for &j in &self.drone_eligible {
            if j == 0 || j > c {
                return Err(InstanceError::Invariant(format!(
                    "drone-eligible node {} is not a customer (1..={})",
                    j, c
                )));
            }
        }
        for (label, m) in [("tau_truck", &self.tau_truck), ("tau_drone", &self.tau_drone)] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(InstanceError::Invariant(format!(
                    "{} must be {}x{}",
                    label, n, n
                )));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() || v < 0.0 {
                        return Err(InstanceError::Invariant(format!(
                            "{}[{}][{}] = {} must be finite and non-negative",
                            label, i, j, v
                        )));
                    }
                    if i == j && v != 0.0 {
                        return Err(InstanceError::Invariant(format!(
                            "{}[{}][{}] = {} must be 0 on the diagonal",
                            label, i, j, v
                        )));
                    }
                }
            }
            if m[0][c + 1] != 0.0 || m[c + 1][0] != 0.0 {
                return Err(InstanceError::Invariant(format!(
                    "{}[0][{}] and {}[{}][0] must be 0 (same depot)",
                    label,
                    c + 1,
                    label,
                    c + 1
                )));
            }
        }
        for (label, v) in [
            ("sigma_launch", self.sigma_launch),
            ("sigma_recover", self.sigma_recover),
            ("endurance", self.endurance),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(InstanceError::Invariant(format!(
                    "{} = {} must be finite and non-negative",
                    label, v
                )));
            }
        }
        Ok(())
    }

    /// Number of customers `c`.
    pub fn customers(&self) -> usize {
        self.customers
    }

    /// Total node count `c + 2`.
    pub fn node_count(&self) -> usize {
        self.customers + 2
    }

    pub fn end_depot(&self) -> usize {
        self.customers + 1
    }

    pub fn nodes(&self) -> &[NodePoint] {
        &self.nodes
    }

    /// The drone-eligible customers, sorted.
    pub fn drone_eligible(&self) -> &[usize] {
        &self.drone_eligible
    }

    pub fn is_drone_eligible(&self, j: usize) -> bool {
        self.eligible_mask.get(j).copied().unwrap_or(false)
    }

    pub fn is_customer(&self, j: usize) -> bool {
        (1..=self.customers).contains(&j)
    }

    #[inline]
    pub fn truck(&self, i: usize, j: usize) -> f64 {
        self.tau_truck[i][j]
    }

    #[inline]
    pub fn drone(&self, i: usize, j: usize) -> f64 {
        self.tau_drone[i][j]
    }

    pub fn truck_matrix(&self) -> &[Vec<f64>] {
        &self.tau_truck
    }

    pub fn drone_matrix(&self) -> &[Vec<f64>] {
        &self.tau_drone
    }

    pub fn sigma_launch(&self) -> f64 {
        self.sigma_launch
    }

    pub fn sigma_recover(&self) -> f64 {
        self.sigma_recover
    }

    pub fn endurance(&self) -> f64 {
        self.endurance
    }

    /// Launch handling time at node `i` (zero at the depot).
    #[inline]
    pub fn launch_time_at(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.sigma_launch
        }
    }

    /// Pure flight time of a sortie, launch to customer to rendezvous.
    #[inline]
    pub fn flight_time(&self, s: SortieTriple) -> f64 {
        self.tau_drone[s.launch][s.customer] + self.tau_drone[s.customer][s.rendezvous]
    }

    /// Whether the triple is well formed and its flight fits the endurance.
    pub fn is_feasible_sortie(&self, s: SortieTriple) -> bool {
        let c = self.customers;
        s.launch <= c
            && (1..=c + 1).contains(&s.rendezvous)
            && s.launch != s.customer
            && s.customer != s.rendezvous
            && s.launch != s.rendezvous
            && self.is_drone_eligible(s.customer)
            && self.flight_time(s) + self.sigma_recover <= self.endurance
    }

    /// The set F of all sorties whose flight plus recovery fits the
    /// endurance, in lexicographic `(launch, customer, rendezvous)` order.
    pub fn feasible_sorties(&self) -> Vec<SortieTriple> {
        let c = self.customers;
        let mut out = Vec::new();
        for i in 0..=c {
            for &j in &self.drone_eligible {
                if j == i {
                    continue;
                }
                for k in 1..=c + 1 {
                    let s = SortieTriple::new(i, j, k);
                    if k != j && k != i && self.is_feasible_sortie(s) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    /// Copy of this instance with launch and recovery times set to zero.
    pub fn without_handling_times(&self) -> Self {
        let mut out = self.clone();
        out.sigma_launch = 0.0;
        out.sigma_recover = 0.0;
        out
    }

    /// Copy with a different endurance.
    pub fn with_endurance(&self, endurance: f64) -> Self {
        let mut out = self.clone();
        out.endurance = endurance;
        out
    }

    /// Copy with a different drone-eligible set.
    pub fn with_drone_eligible(&self, eligible: &[usize]) -> Result<Self, InstanceError> {
        let mut out = self.clone();
        out.drone_eligible = eligible.to_vec();
        out.finish()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_fleet(speed: f64) -> FleetParams {
        FleetParams {
            truck_speed: speed,
            drone_speed: speed,
            sigma_launch: 1.0,
            sigma_recover: 1.0,
            endurance: 20.0,
        }
    }

    #[test]
    fn three_four_five_triangle() {
        let nodes = [NodePoint::new(0, 0.0, 0.0), NodePoint::new(1, 3000.0, 4000.0)];
        let inst = Instance::build_from_coordinates("t", &nodes, &[1], unit_fleet(1.0)).unwrap();
        assert_eq!(inst.customers(), 1);
        assert_eq!(inst.truck(0, 1), 7.0);
        assert_eq!(inst.drone(0, 1), 5.0);
        assert_eq!(inst.truck(1, 2), 7.0);
        assert_eq!(inst.truck(0, 2), 0.0);
    }

    #[test]
    fn empty_customer_set_is_rejected() {
        let nodes = [NodePoint::new(0, 5.0, 5.0)];
        let err = Instance::build_from_coordinates("t", &nodes, &[], unit_fleet(1.0)).unwrap_err();
        assert_eq!(err.to_string(), "empty customer set");
        // Start depot repeated as end depot, still no customers.
        let nodes = [NodePoint::new(0, 5.0, 5.0), NodePoint::new(1, 5.0, 5.0)];
        let err = Instance::build_from_coordinates("t", &nodes, &[], unit_fleet(1.0)).unwrap_err();
        assert!(matches!(err, InstanceError::EmptyCustomerSet));
    }

    #[test]
    fn duplicate_ids_and_bad_speeds() {
        let nodes = [NodePoint::new(0, 0.0, 0.0), NodePoint::new(0, 1.0, 1.0)];
        assert!(matches!(
            Instance::build_from_coordinates("t", &nodes, &[], unit_fleet(1.0)),
            Err(InstanceError::DuplicateNodeId(0))
        ));
        let nodes = [NodePoint::new(0, 0.0, 0.0), NodePoint::new(1, 1.0, 1.0)];
        assert!(matches!(
            Instance::build_from_coordinates("t", &nodes, &[], unit_fleet(0.0)),
            Err(InstanceError::NonPositiveSpeed(_))
        ));
    }

    #[test]
    fn bounded_square_entries() {
        let params = GeneratorParams {
            customers: 10,
            area_km2: 3.6 * 3.6,
            eligible_ratio: 0.8,
            seed: 7,
            fleet: unit_fleet(0.5),
        };
        let inst = Instance::generate_random(&params).unwrap();
        let n = inst.node_count();
        for i in 0..n {
            for j in 0..n {
                assert!(inst.truck(i, j) <= 14.4 + 1e-9);
            }
        }
    }

    fn feasibility_fixture(e: f64) -> Instance {
        // Nodes 0, 1, 2, 3 (end depot); sortie <0,1,2>.
        let nodes = (0..4).map(|k| NodePoint::new(k, 0.0, 0.0)).collect();
        let mut d = vec![vec![1.0; 4]; 4];
        for (k, row) in d.iter_mut().enumerate() {
            row[k] = 0.0;
        }
        d[0][3] = 0.0;
        d[3][0] = 0.0;
        let t = d.clone();
        d[0][1] = 9.0;
        d[1][2] = 10.0;
        d[1][0] = 9.0;
        d[2][1] = 10.0;
        Instance::new("f", nodes, vec![1], t, d, 1.0, 1.0, e).unwrap()
    }

    #[test]
    fn sortie_endurance_boundary() {
        let inst = feasibility_fixture(20.0);
        assert!(inst.feasible_sorties().contains(&SortieTriple::new(0, 1, 2)));
        let inst = feasibility_fixture(19.999);
        assert!(!inst.feasible_sorties().contains(&SortieTriple::new(0, 1, 2)));
        let inst = feasibility_fixture(0.0);
        assert!(inst.feasible_sorties().is_empty());
    }

    #[test]
    fn over_budget_sortie_excluded() {
        let mut inst = feasibility_fixture(20.0);
        inst.tau_drone[0][1] = 10.0;
        assert!(!inst.is_feasible_sortie(SortieTriple::new(0, 1, 2)));
    }

    #[test]
    fn generator_ratio_and_edge_cases() {
        let p = GeneratorParams {
            customers: 10,
            eligible_ratio: 0.8,
            ..Default::default()
        };
        assert_eq!(Instance::generate_random(&p).unwrap().drone_eligible().len(), 8);
        let p = GeneratorParams {
            customers: 1,
            eligible_ratio: 0.0,
            seed: 3,
            ..Default::default()
        };
        let inst = Instance::generate_random(&p).unwrap();
        assert!(inst.drone_eligible().is_empty());
        let (d, c1) = (inst.nodes()[0], inst.nodes()[1]);
        assert!((d.x - c1.x).abs() < 1e-9 && (d.y - c1.y).abs() < 1e-9);
    }

    #[test]
    fn generator_is_deterministic() {
        let p = GeneratorParams {
            seed: 42,
            ..Default::default()
        };
        let a = Instance::generate_random(&p).unwrap().to_json();
        let b = Instance::generate_random(&p).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::generate_random(&GeneratorParams::default()).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, back);
        assert_eq!(inst.to_json(), back.to_json());
    }

    #[test]
    fn load_rejects_nonzero_depot_pair() {
        let inst = Instance::generate_random(&GeneratorParams {
            customers: 3,
            ..Default::default()
        })
        .unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        v["tau_truck"][0][4] = serde_json::json!(1.5);
        let err = Instance::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, InstanceError::Invariant(_)), "{err}");
    }

    #[test]
    fn load_rejects_eligible_beyond_customers() {
        let inst = Instance::generate_random(&GeneratorParams {
            customers: 3,
            ..Default::default()
        })
        .unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        v["drone_eligible"] = serde_json::json!([1, 4]);
        assert!(matches!(
            Instance::from_json(&v.to_string()),
            Err(InstanceError::Invariant(_))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Instance::from_json("{\n  \"name\": \"x\",\n  \"c\": oops\n}").unwrap_err();
        match err {
            InstanceError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn csv_import() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        fs::write(&path, "id,x,y,drone_eligible\n0,0,0,0\n1,3000,4000,1\n2,1000,0,0\n").unwrap();
        let inst = Instance::import_coordinates_csv(&path, unit_fleet(1.0)).unwrap();
        assert_eq!(inst.customers(), 2);
        assert_eq!(inst.drone_eligible(), &[1]);
        assert_eq!(inst.drone(0, 1), 5.0);
        assert_eq!(inst.name, "pts");
    }
}
