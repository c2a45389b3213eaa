use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use pdp_core::backends::{Backend, SolverConfig};
use pdp_core::io::{
    generate_fixture, load_instance, load_plan, render_svg, save_instance, save_plan, FIXTURE_NAMES,
};
use pdp_core::model::{Instance, Plan};
use pdp_core::orchestrator::{plan_with_trace, OrchestratorConfig};
use pdp_core::validator::{validate_plan, ValidationReport};

use crate::{Cli, Command, SolverArgs};

pub fn run(cli: Cli) -> Result<u8> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Solve {
            instance,
            out,
            report,
            solver,
        } => solve(&instance, &out, report.as_deref(), &solver, verbose),
        Command::Validate {
            instance,
            plan,
            out,
        } => validate(&instance, &plan, out.as_deref()),
        Command::Render {
            instance,
            plan,
            out,
        } => render(&instance, plan.as_deref(), &out),
        Command::Gen { name, out } => {
            let inst = generate_fixture(&name)?;
            let out = out.unwrap_or_else(|| format!("{name}.json").into());
            write(&out, &save_instance(&inst))?;
            println!(
                "wrote {} ({} orders, {} vehicles)",
                out.display(),
                inst.orders.len(),
                inst.fleet.len()
            );
            Ok(0)
        }
        Command::Bench {
            fixtures,
            backends,
            out,
            solver,
        } => bench(
            &fixtures,
            &backends.into_iter().map(Into::into).collect::<Vec<_>>(),
            &out,
            &solver,
        ),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_instance(&text).with_context(|| format!("loading instance {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn config(args: &SolverArgs) -> OrchestratorConfig {
    OrchestratorConfig {
        mobility_mode: args.mobility_mode.into(),
        vehicle_policy: args.policy.into(),
        solver: SolverConfig {
            backend: args.backend.into(),
            time_limit: args.time_limit,
            seed: args.seed,
            exact_cap: args.exact_cap,
            external_path: args.model_out.clone(),
            ..SolverConfig::default()
        },
        max_rounds: args.max_rounds,
        allow_rentals: !args.no_rentals,
    }
}

fn solve(
    path: &Path,
    out: &Path,
    report_out: Option<&Path>,
    args: &SolverArgs,
    verbose: bool,
) -> Result<u8> {
    let instance = read_instance(path)?;
    let (plan, rounds) = plan_with_trace(&instance, &config(args))?;
    if verbose {
        for (k, r) in rounds.iter().enumerate() {
            eprintln!(
                "round {k}: vehicle {} backend {:?} orders {} served {} objective {:.3} feasible {} {:.3}s{}",
                r.vehicle,
                r.backend,
                r.considered,
                r.served,
                r.objective,
                r.feasible,
                r.wall_time.as_secs_f64(),
                if r.timed_out { " (time limit hit)" } else { "" }
            );
        }
    }
    let report = validate_plan(&instance, &plan);
    write(out, &save_plan(&plan, &report))?;
    if let Some(p) = report_out {
        write(p, &report_json(&report))?;
    }
    println!(
        "{}: {} route(s), {}/{} orders served, distance {:.3}",
        instance.name,
        plan.routes.len(),
        plan.served_count(),
        instance.orders.len(),
        plan.total_distance
    );
    for r in &plan.routes {
        println!("  {} [{}]: {}", r.id, r.vehicle, r.sequence.join(" "));
    }
    if !plan.unserved.is_empty() {
        println!("  unserved: {}", plan.unserved.join(" "));
    }
    if !report.ok {
        bail!("planner produced a plan that fails validation");
    }
    Ok(if plan.unserved.is_empty() { 0 } else { 2 })
}

fn report_json(report: &ValidationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is always serializable");
    s.push('\n');
    s
}

fn validate(instance_path: &Path, plan_path: &Path, out: Option<&Path>) -> Result<u8> {
    let instance = read_instance(instance_path)?;
    let text = fs::read_to_string(plan_path)
        .with_context(|| format!("reading {}", plan_path.display()))?;
    let (plan, _) =
        load_plan(&text).with_context(|| format!("loading plan {}", plan_path.display()))?;
    if plan.instance != instance.name {
        bail!(
            "plan is for instance {:?}, not {:?}",
            plan.instance,
            instance.name
        );
    }
    let report = validate_plan(&instance, &plan);
    if let Some(p) = out {
        write(p, &report_json(&report))?;
    }
    if report.ok {
        println!(
            "ok: {} route(s), {} order(s) served",
            plan.routes.len(),
            plan.served_count()
        );
        Ok(0)
    } else {
        println!("{} violation(s):", report.violations.len());
        for v in &report.violations {
            println!("  {v}");
        }
        Ok(2)
    }
}

fn render(instance_path: &Path, plan_path: Option<&Path>, out: &Path) -> Result<u8> {
    let instance = read_instance(instance_path)?;
    let plan = match plan_path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            load_plan(&text)
                .with_context(|| format!("loading plan {}", p.display()))?
                .0
        }
        None => Plan::new(instance.name.clone(), vec![], vec![]),
    };
    write(out, &render_svg(&instance, &plan)?)?;
    println!("wrote {}", out.display());
    Ok(0)
}

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    backend: Backend,
    /// Total route distance.
    objective: Option<f64>,
    feasible: bool,
    served: usize,
    orders: usize,
    routes: usize,
    wall_time: f64,
    status: String,
}

fn bench(fixtures: &[String], backends: &[Backend], out: &Path, args: &SolverArgs) -> Result<u8> {
    let names: Vec<String> = if fixtures.is_empty() {
        FIXTURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        fixtures.to_vec()
    };
    let mut rows = Vec::new();
    for name in &names {
        let instance = generate_fixture(name)?;
        for &backend in backends {
            let mut cfg = config(args);
            cfg.solver.backend = backend;
            let start = Instant::now();
            let result = plan_with_trace(&instance, &cfg);
            let wall_time = start.elapsed().as_secs_f64();
            let row = match result {
                Ok((plan, _)) => {
                    let ok = validate_plan(&instance, &plan).ok;
                    BenchRow {
                        instance: name.clone(),
                        backend,
                        objective: Some(plan.total_distance),
                        feasible: ok,
                        served: plan.served_count(),
                        orders: instance.orders.len(),
                        routes: plan.routes.len(),
                        wall_time,
                        status: if plan.unserved.is_empty() {
                            "complete"
                        } else {
                            "partial"
                        }
                        .into(),
                    }
                }
                Err(e) => BenchRow {
                    instance: name.clone(),
                    backend,
                    objective: None,
                    feasible: false,
                    served: 0,
                    orders: instance.orders.len(),
                    routes: 0,
                    wall_time,
                    status: e.to_string(),
                },
            };
            rows.push(row);
        }
    }
    println!(
        "{:<10} {:<13} {:>12} {:>8} {:>8} {:>6} {:>9}  status",
        "instance", "backend", "objective", "feasible", "served", "routes", "time (s)"
    );
    for r in &rows {
        println!(
            "{:<10} {:<13} {:>12} {:>8} {:>8} {:>6} {:>9.3}  {}",
            r.instance,
            serde_json::to_value(r.backend)?.as_str().unwrap_or("?"),
            r.objective.map_or("-".into(), |o| format!("{o:.3}")),
            r.feasible,
            format!("{}/{}", r.served, r.orders),
            r.routes,
            r.wall_time,
            r.status
        );
    }
    let mut text = serde_json::to_string_pretty(&rows)?;
    text.push('\n');
    write(out, &text)?;
    Ok(0)
}
