use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use fstsp_core::exact::{solve_exact, SolveStatus};
use fstsp_core::hgenfs::{self, GaParams};
use fstsp_core::milp::build_model;
use fstsp_core::solution::structural_violations;
use fstsp_core::{check_feasibility, evaluate, FleetParams, GeneratorParams, Instance, Solution};
use serde::Deserialize;

use crate::report::{self, BenchRow, RunReport, RunStatus};
use crate::{BenchArgs, EvalArgs, ExportLpArgs, GenArgs, Method, SolveArgs};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_TIME_LIMIT: u8 = 3;
pub const EXIT_USAGE: u8 = 4;

/// Time limit for solving bench targets that the sidecar file lacks.
const TARGET_SOLVE_LIMIT: Duration = Duration::from_secs(600);

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult = Result<(), CliError>;

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> CliError {
    move |error| CliError { code, error }
}

fn usage(msg: String) -> CliError {
    CliError {
        code: EXIT_USAGE,
        error: anyhow!(msg),
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::load(path)
        .with_context(|| format!("cannot load instance {}", path.display()))
        .map_err(fail(EXIT_INFEASIBLE))
}

fn time_limit(seconds: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(seconds)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| usage(format!("time limit must be a positive number of seconds, got {seconds}")))
}

fn preset(name: &str) -> Result<GaParams, CliError> {
    GaParams::preset(name).ok_or_else(|| {
        usage(format!(
            "unknown preset {name:?}; expected one of {}",
            hgenfs::PRESET_NAMES.join(", ")
        ))
    })
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let limit = time_limit(a.time_limit)?;
    let params = match a.method {
        Method::Hgenfs => Some(GaParams {
            time_limit: limit,
            seed: a.seed,
            restarts: a.restarts,
            target_cost: a.target,
            ..preset(&a.preset)?
        }),
        Method::Exact => None,
    };
    if let Some(p) = &params {
        p.validate().map_err(usage)?;
    }
    let inst = load_instance(&a.instance)?;
    let started = Instant::now();
    let (solution, cost, status, preset_name, method) = match params {
        None => {
            let r = solve_exact(&inst, limit)
                .map_err(|e| fail(EXIT_USAGE)(anyhow!(e)))?;
            let status = match r.status {
                SolveStatus::Optimal => RunStatus::Optimal,
                SolveStatus::TimeLimit => RunStatus::Feasible,
            };
            (r.solution, r.cost, status, String::new(), "exact")
        }
        Some(p) => {
            let r = hgenfs::run(&inst, &p).map_err(usage)?;
            if let Some(path) = &a.history {
                fs::write(path, r.history_csv())
                    .with_context(|| format!("cannot write {}", path.display()))
                    .map_err(fail(EXIT_FAILURE))?;
            }
            (r.solution, r.cost, RunStatus::Feasible, a.preset.clone(), "hgenfs")
        }
    };
    let wall_s = started.elapsed().as_secs_f64();
    if !check_feasibility(&inst, &solution).is_empty() {
        let rep = RunReport {
            instance: inst.name.clone(),
            method: method.into(),
            preset: preset_name,
            objective: None,
            wall_s,
            status: RunStatus::TimeLimit,
            seed: a.seed,
        };
        emit_report(&rep, a.report.as_deref())?;
        return Err(fail(EXIT_TIME_LIMIT)(anyhow!("no feasible plan within the time limit")));
    }
    if let Some(path) = &a.out {
        solution
            .save(path)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(fail(EXIT_FAILURE))?;
    }
    let rep = RunReport {
        instance: inst.name.clone(),
        method: method.into(),
        preset: preset_name,
        objective: Some(cost),
        wall_s,
        status,
        seed: a.seed,
    };
    emit_report(&rep, a.report.as_deref())
}

fn emit_report(rep: &RunReport, path: Option<&Path>) -> CmdResult {
    let io_err = |p: &Path| {
        let shown = p.display().to_string();
        move |e: csv::Error| fail(EXIT_FAILURE)(anyhow!(e).context(format!("cannot write {shown}")))
    };
    match path {
        None => report::write_reports(io::stdout().lock(), std::slice::from_ref(rep))
            .map_err(io_err(Path::new("stdout"))),
        Some(p) => {
            let fresh = fs::metadata(p).map_or(true, |m| m.len() == 0);
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| fail(EXIT_FAILURE)(anyhow!(e).context(format!("cannot open {}", p.display()))))?;
            let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
            w.serialize(rep).map_err(io_err(p))?;
            w.flush()
                .map_err(|e| fail(EXIT_FAILURE)(anyhow!(e)))
        }
    }
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let sol = Solution::load(&a.solution)
        .with_context(|| format!("cannot load solution {}", a.solution.display()))
        .map_err(fail(EXIT_INFEASIBLE))?;
    let structural = structural_violations(&inst, &sol);
    if !structural.is_empty() {
        for v in &structural {
            println!("violation: {v}");
        }
        return Err(fail(EXIT_INFEASIBLE)(anyhow!(
            "{} structural violation(s)",
            structural.len()
        )));
    }
    let tl = evaluate(&inst, &sol).map_err(|e| fail(EXIT_INFEASIBLE)(anyhow!(e)))?;
    let mut nodes = sol.truck_route.clone();
    nodes.extend(sol.sorties.iter().map(|s| s.customer));
    print!("{}", tl.to_csv(&nodes));
    let violations = check_feasibility(&inst, &sol);
    for v in &violations {
        println!("violation: {v}");
    }
    println!("objective: {}", tl.completion);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_INFEASIBLE)(anyhow!("{} violation(s)", violations.len())))
    }
}

pub fn export_lp(a: ExportLpArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    fs::write(&a.out, build_model(&inst).export_lp())
        .with_context(|| format!("cannot write {}", a.out.display()))
        .map_err(fail(EXIT_FAILURE))
}

pub fn generate(a: GenArgs) -> CmdResult {
    let params = GeneratorParams {
        customers: a.customers,
        area_km2: a.area,
        eligible_ratio: a.ratio,
        seed: a.seed,
        fleet: FleetParams {
            endurance: a.endurance,
            ..FleetParams::default()
        },
    };
    let inst = Instance::generate_random(&params).map_err(|e| usage(e.to_string()))?;
    inst.save(&a.out)
        .with_context(|| format!("cannot write {}", a.out.display()))
        .map_err(fail(EXIT_FAILURE))?;
    println!(
        "{}: {} customers, {} drone-eligible",
        inst.name,
        inst.customers(),
        inst.drone_eligible().len()
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TargetRow {
    instance: String,
    optimum: f64,
}

fn read_targets(path: &Path) -> Result<HashMap<String, f64>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| fail(EXIT_INFEASIBLE)(anyhow!(e).context(format!("cannot read {}", path.display()))))?;
    let mut out = HashMap::new();
    for row in rdr.deserialize::<TargetRow>() {
        let row = row.map_err(|e| {
            fail(EXIT_INFEASIBLE)(anyhow!(e).context(format!("bad targets file {}", path.display())))
        })?;
        out.insert(row.instance, row.optimum);
    }
    Ok(out)
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .map_err(fail(EXIT_INFEASIBLE))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn bench(a: BenchArgs) -> CmdResult {
    let limit = time_limit(a.time_limit)?;
    let presets: Vec<(String, GaParams)> = a
        .presets
        .iter()
        .map(|name| preset(name).map(|p| (name.clone(), p)))
        .collect::<Result<_, _>>()?;
    let targets = match &a.targets {
        Some(p) => read_targets(p)?,
        None => HashMap::new(),
    };
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for file in instance_files(&a.instances)? {
        let inst = load_instance(&file)?;
        let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned());
        let known = targets
            .get(&inst.name)
            .or_else(|| stem.as_ref().and_then(|s| targets.get(s)))
            .copied();
        let target = match known {
            Some(t) => t,
            None => {
                solve_exact(&inst, TARGET_SOLVE_LIMIT)
                    .map_err(|e| usage(e.to_string()))?
                    .cost
            }
        };
        for (name, base) in &presets {
            for repeat in 0..a.repeats {
                let seed = a.seed + repeat as u64;
                let params = GaParams {
                    time_limit: limit,
                    target_cost: Some(target),
                    seed,
                    restarts: a.restarts,
                    ..base.clone()
                };
                let r = hgenfs::run(&inst, &params).map_err(usage)?;
                rows.push(BenchRow {
                    instance: inst.name.clone(),
                    preset: name.clone(),
                    repeat,
                    seed,
                    target,
                    best: r.cost,
                    hit: r.time_to_target.is_some(),
                    time_to_target_s: r.time_to_target.unwrap_or(a.time_limit),
                });
            }
        }
        names.push(inst.name.clone());
    }
    let file = fs::File::create(&a.out)
        .with_context(|| format!("cannot write {}", a.out.display()))
        .map_err(fail(EXIT_FAILURE))?;
    report::write_bench_rows(file, &rows).map_err(|e| fail(EXIT_FAILURE)(anyhow!(e)))?;
    let labels: Vec<String> = presets.iter().map(|(n, _)| n.clone()).collect();
    let table = report::summary_table(&rows, &names, &labels);
    match &a.summary {
        Some(p) => fs::write(p, table)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(fail(EXIT_FAILURE)),
        None => {
            print!("{table}");
            io::stdout().flush().map_err(|e| fail(EXIT_FAILURE)(anyhow!(e)))
        }
    }
}
