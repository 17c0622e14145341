//! Mixed-integer model of the FSTSP with big-M timing constraints, written
//! out as CPLEX-LP text and decoded back from an external solver's
//! `name value` assignment.
//!
//! Variables: `x_i_j` (truck arc), `y_i_j_k` (sortie), `z_i` (drone aboard
//! at node `i`), `t_i` (synchronization time, handling times excluded) and
//! `w_i` (truck wait). Launch and recovery times enter only the objective,
//! so at an optimum the objective equals the simulated completion time.
//!
//! Constraint rows are grouped by family, numbered as in the usual
//! thirteen-equation statement of this model (equation 1 is the objective):
//!
//! | family | rows |
//! |---|---|
//! | 2, 3 | each customer entered / left once, by truck or drone |
//! | 4 | truck leaves and re-enters the depot once |
//! | 5 | truck flow conservation |
//! | 6 | truck timing along used arcs |
//! | 7 | drone timing along flown sorties |
//! | 8 | truck wait at the head of a used arc |
//! | 9 | endurance between launch and rendezvous |
//! | 10 | drone aboard / rejoining only at truck-visited nodes |
//! | 11 | a launch needs the drone aboard |
//! | 12 | aboard-state propagation along truck arcs |
//! | 13 | `t_0 = 0` |

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, SortieTriple};
use crate::solution::{structural_violations, Solution};

/// Binary tolerance used when decoding external assignments.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Equation numbers of the model: the objective and twelve constraint
/// families.
pub const FAMILIES: [u8; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

const LP_LINE_WIDTH: usize = 240;

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("variable {name} = {value} is not integral")]
    NonIntegral { name: String, value: f64 },
    #[error("broken x-chain: {0}")]
    BrokenChain(String),
    #[error("y active for a triple outside F: {0}")]
    SortieOutsideF(String),
    #[error("malformed assignment line {line}: {text}")]
    Parse { line: usize, text: String },
    #[error("solution is not structurally valid: {0}")]
    InvalidSolution(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// A named linear row `terms (sense) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: u8,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub name: String,
    pub big_m: f64,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    x: BTreeMap<(usize, usize), usize>,
    y: BTreeMap<SortieTriple, usize>,
    z: Vec<usize>,
    t: Vec<usize>,
    w: Vec<usize>,
    customers: usize,
}

/// Upper bound on every synchronization time of every feasible plan, plus
/// the slack the deactivated rows need.
///
/// `M = sum_i max_j tau_truck[i][j] + c (sigma_L + sigma_R) + W + E`, where
/// the first term bounds any truck path and `W` bounds the total truck wait:
/// the number of drone-servable customers times the longest flight in F.
pub fn compute_big_m(inst: &Instance) -> f64 {
    let c = inst.customers();
    let end = inst.end_depot();
    let path_bound: f64 = (0..=c)
        .map(|i| {
            (1..=end)
                .filter(|&j| j != i)
                .map(|j| inst.truck(i, j))
                .fold(0.0, f64::max)
        })
        .sum();
    let sorties = inst.feasible_sorties();
    let longest_flight = sorties
        .iter()
        .map(|&s| inst.flight_time(s))
        .fold(0.0, f64::max);
    let mut flown: Vec<usize> = sorties.iter().map(|s| s.customer).collect();
    flown.sort_unstable();
    flown.dedup();
    let wait_bound = flown.len() as f64 * longest_flight;
    path_bound
        + c as f64 * (inst.sigma_launch() + inst.sigma_recover())
        + wait_bound
        + inst.endurance()
}

/// Arc set A: `(i, j)` with `i` in `0..=c`, `j` in `1..=c+1`, `i != j`.
pub fn arcs(inst: &Instance) -> Vec<(usize, usize)> {
    let end = inst.end_depot();
    (0..end)
        .flat_map(|i| (1..=end).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind) -> usize {
        self.variables.push(Variable { name, kind });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, family: u8, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (v, a) in terms {
            *merged.entry(v).or_insert(0.0) += a;
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.constraints.push(Constraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }
}

/// Builds the full model for `inst`.
pub fn build_model(inst: &Instance) -> MilpModel {
    let c = inst.customers();
    let end = inst.end_depot();
    let n = inst.node_count();
    let big_m = compute_big_m(inst);
    let arcs = arcs(inst);
    let sorties = inst.feasible_sorties();
    let mut b = Builder {
        variables: Vec::new(),
        constraints: Vec::new(),
    };

    let mut x = BTreeMap::new();
    for &(i, j) in &arcs {
        x.insert((i, j), b.var(format!("x_{i}_{j}"), VarKind::Binary));
    }
    let mut y = BTreeMap::new();
    for &s in &sorties {
        let name = format!("y_{}_{}_{}", s.launch, s.customer, s.rendezvous);
        y.insert(s, b.var(name, VarKind::Binary));
    }
    let z: Vec<usize> = (0..n).map(|i| b.var(format!("z_{i}"), VarKind::Binary)).collect();
    let t: Vec<usize> = (0..n)
        .map(|i| b.var(format!("t_{i}"), VarKind::Continuous))
        .collect();
    let w: Vec<usize> = (0..n)
        .map(|i| b.var(format!("w_{i}"), VarKind::Continuous))
        .collect();

    let mut objective = Vec::new();
    for (&(i, j), &v) in &x {
        objective.push((v, inst.truck(i, j)));
    }
    for (&s, &v) in &y {
        objective.push((v, inst.sigma_recover() + inst.launch_time_at(s.launch)));
    }
    for &v in &w[1..] {
        objective.push((v, 1.0));
    }

    let into = |j: usize| arcs.iter().filter(move |a| a.1 == j).map(|a| x[a]);
    let out_of = |i: usize| arcs.iter().filter(move |a| a.0 == i).map(|a| x[a]);
    let serving = |j: usize| y.iter().filter(move |(s, _)| s.customer == j).map(|(_, &v)| v);
    let launching = |i: usize| y.iter().filter(move |(s, _)| s.launch == i).map(|(_, &v)| v);
    let returning = |k: usize| y.iter().filter(move |(s, _)| s.rendezvous == k).map(|(_, &v)| v);

    for j in 1..=c {
        let terms = into(j).chain(serving(j)).map(|v| (v, 1.0)).collect();
        b.row(format!("c2_{j}"), 2, terms, Sense::Eq, 1.0);
    }
    for j in 1..=c {
        let terms = out_of(j).chain(serving(j)).map(|v| (v, 1.0)).collect();
        b.row(format!("c3_{j}"), 3, terms, Sense::Eq, 1.0);
    }
    b.row(
        "c4_out".into(),
        4,
        out_of(0).map(|v| (v, 1.0)).collect(),
        Sense::Eq,
        1.0,
    );
    b.row(
        "c4_in".into(),
        4,
        into(end).map(|v| (v, 1.0)).collect(),
        Sense::Eq,
        1.0,
    );
    for j in 1..=c {
        let terms = into(j)
            .map(|v| (v, 1.0))
            .chain(out_of(j).map(|v| (v, -1.0)))
            .collect();
        b.row(format!("c5_{j}"), 5, terms, Sense::Eq, 0.0);
    }
    for &(i, j) in &arcs {
        let terms = vec![(t[j], 1.0), (t[i], -1.0), (x[&(i, j)], -big_m)];
        b.row(format!("c6_{i}_{j}"), 6, terms, Sense::Ge, inst.truck(i, j) - big_m);
    }
    for (&s, &v) in &y {
        let (i, k, j) = (s.launch, s.customer, s.rendezvous);
        let terms = vec![(t[j], 1.0), (t[i], -1.0), (v, -big_m)];
        b.row(format!("c7_{i}_{k}_{j}"), 7, terms, Sense::Ge, inst.flight_time(s) - big_m);
    }
    for &(i, j) in &arcs {
        let terms = vec![(w[j], 1.0), (t[j], -1.0), (t[i], 1.0), (x[&(i, j)], -big_m)];
        b.row(format!("c8_{i}_{j}"), 8, terms, Sense::Ge, -inst.truck(i, j) - big_m);
    }
    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (&s, &v) in &y {
        pairs.entry((s.launch, s.rendezvous)).or_default().push(v);
    }
    for (&(i, k), vs) in &pairs {
        let mut terms = vec![(t[k], 1.0), (t[i], -1.0)];
        terms.extend(vs.iter().map(|&v| (v, big_m)));
        let rhs = inst.endurance() - inst.sigma_recover() + big_m;
        b.row(format!("c9_{i}_{k}"), 9, terms, Sense::Le, rhs);
    }
    for i in 1..=end {
        let mut terms = vec![(z[i], 1.0)];
        terms.extend(into(i).map(|v| (v, -1.0)));
        b.row(format!("c10_{i}"), 10, terms, Sense::Le, 0.0);
    }
    for k in 1..=end {
        let back: Vec<usize> = returning(k).collect();
        if back.is_empty() {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = back.into_iter().map(|v| (v, 1.0)).collect();
        terms.extend(into(k).map(|v| (v, -1.0)));
        b.row(format!("c10r_{k}"), 10, terms, Sense::Le, 0.0);
    }
    for i in 0..=c {
        let out: Vec<usize> = launching(i).collect();
        if out.is_empty() {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = out.into_iter().map(|v| (v, 1.0)).collect();
        terms.push((z[i], -1.0));
        b.row(format!("c11_{i}"), 11, terms, Sense::Le, 0.0);
    }
    for &(i, j) in &arcs {
        let mut terms = vec![(z[j], 1.0), (z[i], -1.0), (x[&(i, j)], 1.0)];
        terms.extend(launching(i).map(|v| (v, 1.0)));
        terms.extend(returning(j).map(|v| (v, -1.0)));
        b.row(format!("c12_{i}_{j}"), 12, terms, Sense::Le, 1.0);
    }
    b.row("c13".into(), 13, vec![(t[0], 1.0)], Sense::Eq, 0.0);

    MilpModel {
        name: inst.name.clone(),
        big_m,
        variables: b.variables,
        objective,
        constraints: b.constraints,
        x,
        y,
        z,
        t,
        w,
        customers: c,
    }
}

impl MilpModel {
    pub fn x_count(&self) -> usize {
        self.x.len()
    }

    pub fn y_count(&self) -> usize {
        self.y.len()
    }

    /// Row count per family, indexed by equation number (index 1 is the
    /// objective and always 1).
    pub fn family_counts(&self) -> [usize; 14] {
        let mut out = [0; 14];
        out[1] = 1;
        for c in &self.constraints {
            out[c.family as usize] += 1;
        }
        out
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, a)| a * values[v]).sum()
    }

    /// Rows violated by more than `tol`, with the violation amount.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<(&Constraint, f64)> {
        self.constraints
            .iter()
            .map(|c| (c, c.violation(values)))
            .filter(|&(_, v)| v > tol)
            .collect()
    }

    /// The variable assignment a plan induces. Times are the synchronization
    /// times with handling excluded, waits are the truck waits, and `z` marks
    /// truck nodes reached with the drone aboard.
    pub fn assignment_for(&self, inst: &Instance, sol: &Solution) -> Result<Vec<f64>, MilpError> {
        let v = structural_violations(inst, sol);
        if !v.is_empty() {
            return Err(MilpError::InvalidSolution(
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
            ));
        }
        let mut values = vec![0.0; self.variables.len()];
        for leg in sol.truck_route.windows(2) {
            values[self.x[&(leg[0], leg[1])]] = 1.0;
        }
        for s in &sol.sorties {
            let var = self
                .y
                .get(s)
                .ok_or_else(|| MilpError::SortieOutsideF(s.to_string()))?;
            values[*var] = 1.0;
        }
        let bare = inst.without_handling_times();
        let tl = crate::solution::evaluate(&bare, sol).expect("structure checked above");
        let mut aboard = true;
        let launch_at: HashMap<usize, usize> =
            sol.sorties.iter().map(|s| (s.launch, s.rendezvous)).collect();
        let mut pending: Option<usize> = None;
        for &node in &sol.truck_route {
            if pending == Some(node) {
                aboard = true;
                pending = None;
            }
            values[self.z[node]] = if aboard { 1.0 } else { 0.0 };
            values[self.t[node]] = tl.t[node];
            values[self.w[node]] = tl.w[node];
            if let Some(&k) = launch_at.get(&node) {
                aboard = false;
                pending = Some(k);
            }
        }
        Ok(values)
    }

    /// Plan encoded by an assignment keyed by variable name. Names not in the
    /// model are ignored, except `y_*` triples, which must belong to F.
    pub fn decode(&self, assignment: &HashMap<String, f64>) -> Result<Solution, MilpError> {
        let active = |idx: usize| -> Result<bool, MilpError> {
            let var = &self.variables[idx];
            let value = assignment.get(&var.name).copied().unwrap_or(0.0);
            if value.abs() <= INTEGRALITY_TOL {
                Ok(false)
            } else if (value - 1.0).abs() <= INTEGRALITY_TOL {
                Ok(true)
            } else {
                Err(MilpError::NonIntegral {
                    name: var.name.clone(),
                    value,
                })
            }
        };
        for (idx, var) in self.variables.iter().enumerate() {
            if var.kind == VarKind::Binary {
                active(idx)?;
            }
        }
        let mut names: Vec<&String> = assignment.keys().collect();
        names.sort();
        for name in names {
            if name.starts_with("y_")
                && assignment[name] > 0.5
                && !self.y.values().any(|&v| self.variables[v].name == *name)
            {
                return Err(MilpError::SortieOutsideF(name.clone()));
            }
        }

        let end = self.customers + 1;
        let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut used = 0;
        for (&(i, j), &v) in &self.x {
            if active(v)? {
                succ.entry(i).or_default().push(j);
                used += 1;
            }
        }
        let mut route = vec![0];
        let mut cur = 0;
        while cur != end {
            let next = match succ.get(&cur).map(|v| v.as_slice()) {
                Some([j]) => *j,
                Some([]) | None => {
                    return Err(MilpError::BrokenChain(format!("no arc leaves node {cur}")))
                }
                Some(many) => {
                    return Err(MilpError::BrokenChain(format!(
                        "node {cur} has {} outgoing arcs",
                        many.len()
                    )))
                }
            };
            if route.contains(&next) {
                return Err(MilpError::BrokenChain(format!("node {next} revisited")));
            }
            route.push(next);
            cur = next;
        }
        if used != route.len() - 1 {
            return Err(MilpError::BrokenChain(format!(
                "{} active arcs lie off the path from 0 to {end}",
                used - (route.len() - 1)
            )));
        }
        let mut sorties = Vec::new();
        for (&s, &v) in &self.y {
            if active(v)? {
                sorties.push(s);
            }
        }
        let mut sol = Solution::new(route, sorties);
        sol.normalize();
        Ok(sol)
    }

    /// CPLEX-LP text. Ordering is fixed (variables and rows in index order)
    /// so identical models produce identical bytes.
    pub fn export_lp(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ FSTSP model {}", self.name);
        let _ = writeln!(out, "\\ big-M = {}", self.big_m);
        out.push_str("Minimize\n");
        self.write_expr(&mut out, "obj", &self.objective, None);
        out.push_str("Subject To\n");
        for c in &self.constraints {
            self.write_expr(&mut out, &c.name, &c.terms, Some((c.sense, c.rhs)));
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if v.kind == VarKind::Continuous {
                let _ = writeln!(out, " {} >= 0", v.name);
            }
        }
        out.push_str("Binaries\n");
        let mut line = String::new();
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            if line.len() + v.name.len() + 1 > LP_LINE_WIDTH {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(&v.name);
        }
        if !line.is_empty() {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }

    fn write_expr(
        &self,
        out: &mut String,
        label: &str,
        terms: &[(usize, f64)],
        tail: Option<(Sense, f64)>,
    ) {
        let mut line = format!(" {label}:");
        let mut push = |line: &mut String, tok: &str| {
            if line.len() + tok.len() + 1 > LP_LINE_WIDTH {
                out.push_str(line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(tok);
        };
        if terms.is_empty() {
            push(&mut line, "0");
        }
        for (k, &(v, a)) in terms.iter().enumerate() {
            let sign = if a < 0.0 { "-" } else { "+" };
            let mag = a.abs();
            let name = &self.variables[v].name;
            let tok = match (k, mag == 1.0) {
                (0, true) if a > 0.0 => name.to_string(),
                (0, false) if a >= 0.0 => format!("{mag} {name}"),
                (_, true) => format!("{sign} {name}"),
                (_, false) => format!("{sign} {mag} {name}"),
            };
            push(&mut line, &tok);
        }
        if let Some((sense, rhs)) = tail {
            push(&mut line, &format!("{} {}", sense.symbol(), rhs));
        }
        out.push_str(&line);
        out.push('\n');
    }
}

/// Parses `name value` pairs, one per line. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_assignment(text: &str) -> Result<HashMap<String, f64>, MilpError> {
    let mut out = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parsed = match (parts.next(), parts.next(), parts.next()) {
            (Some(name), Some(value), None) => value.parse::<f64>().ok().map(|v| (name, v)),
            _ => None,
        };
        let (name, value) = parsed.ok_or_else(|| MilpError::Parse {
            line: k + 1,
            text: raw.to_string(),
        })?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Name-keyed view of a value vector, for feeding [`MilpModel::decode`].
pub fn named_values(model: &MilpModel, values: &[f64]) -> HashMap<String, f64> {
    model
        .variables
        .iter()
        .zip(values)
        .map(|(v, &x)| (v.name.clone(), x))
        .collect()
}
