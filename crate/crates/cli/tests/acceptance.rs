//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdp_core::backends::{solve_anneal, solve_exact, Backend, SolverConfig};
use pdp_core::cqm::{
    build_route_model, decode_sequence, Assignment, MobilityHandling, ObjectiveWeights,
    QuadraticModel, Subproblem,
};
use pdp_core::io::{
    generate_fixture, load_instance, load_plan, save_instance, save_plan, FIXTURE_NAMES,
};
use pdp_core::model::{
    travel_matrix_from_coords, Instance, Limit, Order, Ownership, Plan, VehicleSpec,
};
use pdp_core::orchestrator::{
    mobility_mode_equivalence_check, order_filtering, plan, OrchestratorConfig,
};
use pdp_core::validator::{check_route, route_loads, route_timeline, validate_plan};

/// Absolute slack for every feasibility and equality comparison.
const TOL: f64 = 1e-9;
const PD12_LIMIT: Duration = Duration::from_secs(10);
const PD15_LIMIT: Duration = Duration::from_secs(30);
const PD17_MR_LIMIT: Duration = Duration::from_secs(60);
const EQUIVALENCE_LIMIT: Duration = Duration::from_secs(300);
const EQUIVALENCE_INSTANCES: usize = 50;
const EQUIVALENCE_MAX_ORDERS: usize = 6;
const ORACLE_SUBPROBLEMS: usize = 100;
const ORACLE_MAX_ORDERS: usize = 6;
const ORACLE_EXHAUSTIVE_MAX: usize = 3;
const ORACLE_SAMPLES: usize = 10_000;
const QUALITY_MAX_ORDERS: usize = 8;
const QUALITY_SEEDS: u64 = 100;
const QUALITY_GAP: f64 = 0.05;
const QUALITY_PASS_RATE: f64 = 0.95;
const RW2_LIMIT: Duration = Duration::from_secs(120);

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: u32, title: &str, result: Result<String, String>, elapsed: Duration) {
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{id}] {title} ({secs:.2}s): {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL [{id}] {title} ({secs:.2}s): {detail}");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> Instance {
    generate_fixture(name).expect("known fixture")
}

fn config(backend: Backend) -> OrchestratorConfig {
    let mut c = OrchestratorConfig::default();
    c.solver.backend = backend;
    c
}

fn solve_with(instance: &Instance, cfg: &OrchestratorConfig) -> Result<Plan, String> {
    plan(instance, cfg).map_err(|e| format!("{}: {e}", instance.name))
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() < limit, || {
        format!(
            "took {:.2}s, limit {}s",
            start.elapsed().as_secs_f64(),
            limit.as_secs()
        )
    })
}

fn single_truck_claim() -> Result<String, String> {
    let mut cfg = config(Backend::Exact);
    cfg.solver.exact_cap = 11;
    let mut details = Vec::new();
    for name in ["PD12", "PD12_B"] {
        let inst = fixture(name);
        let start = Instant::now();
        let p = solve_with(&inst, &cfg)?;
        within(PD12_LIMIT, start)?;
        ensure(p.routes.len() == 1 && p.routes[0].len() == 11, || {
            format!(
                "{name}: {} routes, {} served",
                p.routes.len(),
                p.served_count()
            )
        })?;
        ensure(validate_plan(&inst, &p).ok, || {
            format!("{name}: validator rejects the plan")
        })?;
        let truck = &inst.fleet[0];
        let stops: Vec<&Order> = p.routes[0]
            .sequence
            .iter()
            .map(|id| inst.order(id).unwrap())
            .collect();
        let loads = route_loads(&stops);
        let peak = std::iter::once(loads.departure)
            .chain(loads.after.iter().copied())
            .map(|l| l.weight.max(l.dim))
            .fold(0.0, f64::max);
        ensure(peak <= truck.max_weight + TOL, || {
            format!("{name}: peak load {peak}")
        })?;
        details.push(format!(
            "{name} 11/11 peak load {peak} in {:.2}s",
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(details.join("; "))
}

fn two_truck_claim() -> Result<String, String> {
    let inst = fixture("PD15");
    let start = Instant::now();
    let p = solve_with(&inst, &config(Backend::Anneal))?;
    within(PD15_LIMIT, start)?;
    ensure(
        p.routes.len() == 2 && p.served_count() == 14 && p.unserved.is_empty(),
        || format!("{} routes, {}/14 served", p.routes.len(), p.served_count()),
    )?;
    ensure(validate_plan(&inst, &p).ok, || {
        "validator rejects the plan".into()
    })?;
    Ok(format!(
        "routes of {} and {} stops",
        p.routes[0].len(),
        p.routes[1].len()
    ))
}

fn rental_claim(bin: &Path, dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    let inst = fixture("PD17_MR");
    let restricted: BTreeSet<String> = inst
        .orders
        .iter()
        .filter(|o| o.zone == 1)
        .map(|o| o.id.clone())
        .collect();
    ensure(restricted.len() == 6, || {
        format!("{} restricted orders", restricted.len())
    })?;

    let p = solve_with(&inst, &config(Backend::Auto))?;
    ensure(
        p.served_count() == 16 && validate_plan(&inst, &p).ok,
        || format!("rentals on: {}/16 served", p.served_count()),
    )?;
    let rental_route = p
        .routes
        .iter()
        .find(|r| inst.vehicle(&r.vehicle).unwrap().ownership == Ownership::Rentable)
        .ok_or("no rental route")?;
    let rental = inst.vehicle(&rental_route.vehicle).unwrap();
    let served_by_rental: BTreeSet<String> = rental_route.sequence.iter().cloned().collect();
    ensure(
        rental.vehicle_type == 1 && served_by_rental == restricted,
        || format!("rental serves {served_by_rental:?}"),
    )?;

    let file = dir.join("pd17_mr.json");
    std::fs::write(&file, save_instance(&inst)).map_err(|e| e.to_string())?;
    let out = dir.join("pd17_mr.plan.json");
    let status = Command::new(bin)
        .args([
            "solve",
            file.to_str().unwrap(),
            "--no-rentals",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.code() == Some(2), || {
        format!("exit code {:?}", status.status.code())
    })?;
    let (no_rent, _) =
        load_plan(&std::fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())?;
    let unserved: BTreeSet<String> = no_rent.unserved.iter().cloned().collect();
    ensure(unserved == restricted, || format!("unserved {unserved:?}"))?;
    within(PD17_MR_LIMIT, start)?;
    Ok("16/16 with rental; --no-rentals leaves the 6 restricted orders, exit 2".into())
}

fn random_instance(rng: &mut ChaCha8Rng, name: String, max_orders: usize) -> Instance {
    let n = rng.gen_range(1..=max_orders);
    let coords: Vec<(f64, f64)> = (0..=n)
        .map(|_| (rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0)))
        .collect();
    let travel = travel_matrix_from_coords(&coords, rng.gen_range(0.5..2.0)).unwrap();
    let orders = (1..=n)
        .map(|k| {
            let mut o = Order::new(format!("o{k}"), k)
                .with_delivery(rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0))
                .with_zone(rng.gen_range(1..=3));
            if rng.gen_bool(0.5) {
                o = o.with_pickup(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            }
            if rng.gen_bool(0.4) {
                let lt = if rng.gen_bool(0.5) {
                    rng.gen_range(0.0..40.0)
                } else {
                    0.0
                };
                let ut = if rng.gen_bool(0.7) {
                    Limit::Finite(lt + rng.gen_range(5.0..60.0))
                } else {
                    Limit::Unbounded
                };
                o = o.with_window(lt, ut);
            }
            o
        })
        .collect();
    let fleet = (0..rng.gen_range(1..=3))
        .map(|k| {
            let mut v = VehicleSpec::new(
                format!("v{k}"),
                rng.gen_range(10.0..40.0),
                rng.gen_range(10.0..40.0),
            )
            .with_type(rng.gen_range(1..=3));
            if rng.gen_bool(0.3) {
                v = v.with_ownership(Ownership::Rentable);
            }
            if rng.gen_bool(0.4) {
                v = v.with_max_duration(Limit::Finite(rng.gen_range(40.0..150.0)));
            }
            v
        })
        .collect();
    Instance {
        name,
        orders,
        fleet,
        travel,
        coords: Some(coords),
    }
}

fn mode_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = config(Backend::Exact);
    let mut restricted = 0;
    for k in 0..EQUIVALENCE_INSTANCES {
        let inst = random_instance(&mut rng, format!("eq{k}"), EQUIVALENCE_MAX_ORDERS);
        if inst
            .fleet
            .iter()
            .any(|v| inst.orders.iter().any(|o| !o.reachable_by(v.vehicle_type)))
        {
            restricted += 1;
        }
        let report = mobility_mode_equivalence_check(&inst, &cfg)
            .map_err(|e| format!("{}: {e}", inst.name))?;
        ensure(report.holds(), || {
            format!("{}: {:?}", inst.name, report.mismatches)
        })?;
        let (a, b) = (
            report.filter.total_distance,
            report.constraint.total_distance,
        );
        ensure((a - b).abs() <= TOL, || {
            format!("{}: objectives {a} vs {b}", inst.name)
        })?;
    }
    within(EQUIVALENCE_LIMIT, start)?;
    Ok(format!(
        "{EQUIVALENCE_INSTANCES} instances agree, {restricted} with mobility-excluded orders"
    ))
}

fn random_subproblem(rng: &mut ChaCha8Rng, m: usize) -> Subproblem {
    let coords: Vec<(f64, f64)> = (0..=m)
        .map(|_| (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0)))
        .collect();
    let travel = travel_matrix_from_coords(&coords, 1.0).unwrap();
    let constrained = rng.gen_bool(0.5);
    let vt = rng.gen_range(1..=2);
    let orders: Vec<Order> = (1..=m)
        .map(|k| {
            let mut o = Order::new(format!("o{k}"), k)
                .with_delivery(rng.gen_range(0.0..9.0), rng.gen_range(0.0..9.0))
                .with_pickup(rng.gen_range(0.0..9.0), rng.gen_range(0.0..9.0));
            o.zone = if constrained {
                rng.gen_range(1..=2)
            } else {
                vt
            };
            if rng.gen_bool(0.5) {
                let lt = if rng.gen_bool(0.5) {
                    rng.gen_range(0.0..25.0)
                } else {
                    0.0
                };
                let ut = if rng.gen_bool(0.7) {
                    Limit::Finite(lt + rng.gen_range(3.0..35.0))
                } else {
                    Limit::Unbounded
                };
                o = o.with_window(lt, ut);
            }
            o
        })
        .collect();
    let mut truck =
        VehicleSpec::new("t", rng.gen_range(5.0..30.0), rng.gen_range(5.0..30.0)).with_type(vt);
    if rng.gen_bool(0.5) {
        truck = truck.with_max_duration(Limit::Finite(rng.gen_range(15.0..80.0)));
    }
    let mode = if constrained {
        MobilityHandling::Constrained
    } else {
        MobilityHandling::Filtered
    };
    Subproblem::new(orders, truck, &travel, mode).unwrap()
}

fn validator_accepts(sub: &Subproblem, a: &Assignment) -> bool {
    let Ok(seq) = decode_sequence(a, sub.len()) else {
        return false;
    };
    let stops: Vec<&Order> = seq.iter().map(|&i| &sub.orders[i]).collect();
    let nodes: Vec<usize> = seq.iter().map(|&i| Subproblem::node(i)).collect();
    check_route("r", &sub.vehicle, &stops, &nodes, &sub.travel)
        .unwrap()
        .is_empty()
}

fn sample_assignment(rng: &mut ChaCha8Rng, m: usize) -> Assignment {
    if rng.gen_bool(0.3) {
        let density = rng.gen_range(0.05..0.5);
        return Assignment::from_bits(m, (0..m * m).map(|_| rng.gen_bool(density)).collect());
    }
    let mut ids: Vec<usize> = (0..m).collect();
    for k in (1..m).rev() {
        ids.swap(k, rng.gen_range(0..=k));
    }
    ids.truncate(rng.gen_range(0..=m));
    let mut a = Assignment::from_sequence(m, &ids);
    if rng.gen_bool(0.2) {
        let (i, p) = (rng.gen_range(0..m), rng.gen_range(0..m));
        a.set(i, p, !a.get(i, p));
    }
    a
}

fn oracle_agreement() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut feasible, mut mismatches) = (0u64, 0u64, Vec::new());
    for k in 0..ORACLE_SUBPROBLEMS {
        let m = 1 + k % ORACLE_MAX_ORDERS;
        let sub = random_subproblem(&mut rng, m);
        let model: QuadraticModel =
            build_route_model(&sub, ObjectiveWeights::for_travel(&sub.travel)).unwrap();
        let mut check = |a: Assignment| {
            let model_ok = model.evaluate(&a).feasible;
            checked += 1;
            feasible += u64::from(model_ok);
            if model_ok != validator_accepts(&sub, &a) && mismatches.len() < 5 {
                mismatches.push(format!(
                    "subproblem {k} bits {:?}",
                    a.ones().collect::<Vec<_>>()
                ));
            }
        };
        if m <= ORACLE_EXHAUSTIVE_MAX {
            for mask in 0u64..(1 << (m * m)) {
                check(Assignment::from_bits(
                    m,
                    (0..m * m).map(|v| mask >> v & 1 == 1).collect(),
                ));
            }
        } else {
            for _ in 0..ORACLE_SAMPLES {
                let a = sample_assignment(&mut rng, m);
                check(a);
            }
        }
    }
    ensure(mismatches.is_empty(), || {
        format!("mismatches: {}", mismatches.join("; "))
    })?;
    Ok(format!(
        "{checked} assignments, {feasible} feasible, 0 mismatches"
    ))
}

fn quality_subproblems(inst: &Instance) -> Vec<Subproblem> {
    let mut subs: Vec<Subproblem> = Vec::new();
    for v in &inst.fleet {
        let mut sub = order_filtering(&inst.orders, v, &inst.travel).unwrap();
        if sub.len() > QUALITY_MAX_ORDERS {
            let orders: Vec<Order> = sub.orders.into_iter().take(QUALITY_MAX_ORDERS).collect();
            sub = order_filtering(&orders, v, &inst.travel).unwrap();
        }
        let duplicate = subs
            .iter()
            .any(|s| s.orders == sub.orders && s.vehicle.max_weight == v.max_weight);
        if !sub.is_empty() && !duplicate {
            subs.push(sub);
        }
    }
    subs
}

fn anneal_quality() -> Result<String, String> {
    let mut worst = f64::INFINITY;
    let mut details = Vec::new();
    for name in FIXTURE_NAMES {
        let inst = fixture(name);
        let weights = ObjectiveWeights::for_travel(&inst.travel);
        let subs = quality_subproblems(&inst);
        let cases: Vec<(QuadraticModel, f64)> = subs
            .iter()
            .map(|s| {
                let model = build_route_model(s, weights).unwrap();
                let exact = solve_exact(&model, s, &SolverConfig::default())
                    .unwrap()
                    .objective;
                (model, exact)
            })
            .collect();
        let mut good = 0;
        for seed in 0..QUALITY_SEEDS {
            let cfg = SolverConfig::default().with_seed(seed);
            let all_close = cases.iter().all(|(model, exact)| {
                let out = solve_anneal(model, &cfg);
                out.feasible && (out.objective - exact) <= QUALITY_GAP * exact.abs() + TOL
            });
            good += usize::from(all_close);
        }
        let rate = good as f64 / QUALITY_SEEDS as f64;
        worst = worst.min(rate);
        details.push(format!(
            "{name} {:.0}% ({} subproblems)",
            rate * 100.0,
            cases.len()
        ));
    }
    ensure(worst >= QUALITY_PASS_RATE, || details.join(", "))?;
    Ok(details.join(", "))
}

fn window_honoring() -> Result<String, String> {
    let mut details = Vec::new();
    let mut unwindowed = 0;
    for name in ["PD17_TW", "RW1_O19"] {
        let inst = fixture(name);
        let p = solve_with(&inst, &config(Backend::Auto))?;
        let mut stops = 0;
        for r in &p.routes {
            let orders: Vec<&Order> = r
                .sequence
                .iter()
                .map(|id| inst.order(id).unwrap())
                .collect();
            let nodes: Vec<usize> = orders.iter().map(|o| o.node).collect();
            let timeline = route_timeline(&nodes, &inst.travel).map_err(|e| e.to_string())?;
            for (o, &t) in orders.iter().zip(&timeline.arrivals) {
                stops += 1;
                let upper = o.latest.value().unwrap_or(f64::INFINITY);
                ensure(t >= o.earliest - TOL && t <= upper + TOL, || {
                    format!(
                        "{name}: {} arrives at {t}, window [{}, {}]",
                        o.id, o.earliest, o.latest
                    )
                })?;
            }
        }
        let mut free = 0;
        for v in &inst.fleet {
            let sub = order_filtering(&inst.orders, v, &inst.travel).unwrap();
            if sub.is_empty() {
                continue;
            }
            let model =
                build_route_model(&sub, ObjectiveWeights::for_travel(&inst.travel)).unwrap();
            let m = sub.len();
            for (k, o) in sub.orders.iter().enumerate() {
                let lt = model
                    .constraints
                    .iter()
                    .filter(|c| c.label.starts_with(&format!("lt[{k}][")))
                    .count();
                let ut = model
                    .constraints
                    .iter()
                    .filter(|c| c.label.starts_with(&format!("ut[{k}][")))
                    .count();
                let want_lt = if o.earliest > 0.0 { m } else { 0 };
                let want_ut = if o.latest.is_bounded() { m } else { 0 };
                ensure(lt == want_lt && ut == want_ut, || {
                    format!(
                        "{name}/{}: {} has {lt} lt and {ut} ut constraints",
                        v.id, o.id
                    )
                })?;
                free += usize::from(!o.has_window());
            }
        }
        unwindowed += free;
        details.push(format!(
            "{name}: {stops} stops in window, {free} unwindowed orders without time rows"
        ));
    }
    ensure(unwindowed > 0, || "no unwindowed order to check".into())?;
    Ok(details.join("; "))
}

fn run_solve(
    bin: &Path,
    instance: &Path,
    out: &Path,
    extra: &[&str],
) -> Result<(i32, Vec<u8>), String> {
    let status = Command::new(bin)
        .arg("solve")
        .arg(instance)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .map_err(|e| e.to_string())?;
    let code = status.status.code().unwrap_or(-1);
    let bytes = std::fs::read(out).map_err(|e| format!("{}: {e}", out.display()))?;
    Ok((code, bytes))
}

fn end_to_end(bin: &Path, dir: &Path) -> Result<String, String> {
    let inst = fixture("RW2_O24");
    let file = dir.join("rw2.json");
    std::fs::write(&file, save_instance(&inst)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (code, first) = run_solve(
        bin,
        &file,
        &dir.join("rw2.a.json"),
        &["--backend", "anneal"],
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < RW2_LIMIT, || {
        format!("took {:.2}s", elapsed.as_secs_f64())
    })?;
    ensure(code == 0, || format!("exit code {code}"))?;
    let (p, report) = load_plan(std::str::from_utf8(&first).unwrap()).map_err(|e| e.to_string())?;
    ensure(
        p.served_count() == 23 && report.ok && validate_plan(&inst, &p).ok,
        || format!("{}/23 served, report ok={}", p.served_count(), report.ok),
    )?;
    let (_, second) = run_solve(
        bin,
        &file,
        &dir.join("rw2.b.json"),
        &["--backend", "anneal"],
    )?;
    ensure(first == second, || "plans differ between runs".into())?;
    Ok(format!(
        "23/23 served in {:.2}s, identical bytes across runs",
        elapsed.as_secs_f64()
    ))
}

fn round_trips(bin: &Path, dir: &Path) -> Result<String, String> {
    for name in FIXTURE_NAMES {
        let inst = fixture(name);
        let text = save_instance(&inst);
        let back = load_instance(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(back == inst, || {
            format!("{name}: instance round trip differs")
        })?;

        let file = dir.join(format!("{name}.json"));
        std::fs::write(&file, &text).map_err(|e| e.to_string())?;
        let (code_a, a) = run_solve(bin, &file, &dir.join(format!("{name}.a.json")), &[])?;
        let (code_b, b) = run_solve(bin, &file, &dir.join(format!("{name}.b.json")), &[])?;
        ensure(code_a == code_b && a == b, || {
            format!("{name}: solve output differs between runs")
        })?;
        let text = String::from_utf8(a).unwrap();
        let (p, report) = load_plan(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(save_plan(&p, &report) == text, || {
            format!("{name}: plan round trip differs")
        })?;
    }
    Ok(format!(
        "{} fixtures: instance and plan round trips exact, solve output byte-identical",
        FIXTURE_NAMES.len()
    ))
}

fn main() {
    let bin = Path::new(env!("CARGO_BIN_EXE_pdp"));
    let dir = tempfile::tempdir().expect("temp dir");
    let mut gate = Gate { failures: 0 };
    let mut run = |id, title: &str, f: &dyn Fn() -> Result<String, String>| {
        let start = Instant::now();
        let result = f();
        gate.record(id, title, result, start.elapsed());
    };
    run(
        1,
        "single truck W=D=110 completes PD12 (both variants, exact)",
        &single_truck_claim,
    );
    run(
        2,
        "two trucks W=D=70 complete PD15 in two routes (anneal)",
        &two_truck_claim,
    );
    run(
        3,
        "mobility restrictions force the rental on PD17_MR",
        &|| rental_claim(bin, dir.path()),
    );
    run(
        4,
        "filter and constraint mobility modes agree",
        &mode_equivalence,
    );
    run(
        5,
        "model constraints agree with the validator",
        &oracle_agreement,
    );
    run(
        6,
        "anneal within 5% of exact on small subproblems",
        &anneal_quality,
    );
    run(
        7,
        "time windows honored, unwindowed orders add no time rows",
        &window_honoring,
    );
    run(
        8,
        "RW2_O24 fully served with anneal, deterministic",
        &|| end_to_end(bin, dir.path()),
    );
    run(9, "round trips and deterministic solve output", &|| {
        round_trips(bin, dir.path())
    });
    if gate.failures > 0 {
        println!("{} criterion(s) failed", gate.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
