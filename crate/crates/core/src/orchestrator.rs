//! Greedy route-by-route planning loop.
//!
//! Each round picks a vehicle, builds the route model over the orders it may
//! serve, solves it, and commits the decoded route. Planning stops when every
//! order is served, no vehicle can reach what is left, or a round serves
//! nothing.

use std::collections::{BTreeSet, HashSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{solve, Backend, OutcomeStatus, SolveError, SolverConfig};
use crate::cqm::{
    build_route_model, decode, MobilityHandling, ModelError, ObjectiveWeights, Subproblem,
};
use crate::model::{
    check_instance, InputError, Instance, InstanceViolation, Order, Ownership, Plan, Route,
    TravelMatrix, VehicleSpec,
};
use crate::validator::{check_route, validate_plan, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityMode {
    /// Drop unreachable orders before building the model.
    #[default]
    Filter,
    /// Keep every order and forbid unreachable ones with model constraints.
    Constraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VehiclePolicy {
    /// Owned before rentable, then larger `min(W, D)`, then smaller `vt`,
    /// then declaration order.
    #[default]
    OwnedFirstDescCapacity,
    DeclaredOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchestratorConfig {
    pub mobility_mode: MobilityMode,
    pub vehicle_policy: VehiclePolicy,
    pub solver: SolverConfig,
    pub max_rounds: usize,
    pub allow_rentals: bool,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            mobility_mode: MobilityMode::Filter,
            vehicle_policy: VehiclePolicy::OwnedFirstDescCapacity,
            solver: SolverConfig::default(),
            max_rounds: 64,
            allow_rentals: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("instance failed {} check(s): {}", .0.len(), join(.0))]
    Instance(Vec<InstanceViolation>),
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("route {route} decoded from a feasible model answer fails validation: {}", join(.violations))]
    RejectedRoute {
        route: String,
        violations: Vec<Violation>,
    },
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// What happened in one planning round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub vehicle: String,
    pub backend: Backend,
    /// Orders passed to the model builder.
    pub considered: usize,
    pub served: usize,
    pub objective: f64,
    pub feasible: bool,
    pub timed_out: bool,
    pub wall_time: Duration,
}

/// Orders a vehicle of type `vehicle_type` may serve.
pub fn reachable_orders(orders: &[Order], vehicle_type: u32) -> Vec<Order> {
    orders
        .iter()
        .filter(|o| o.reachable_by(vehicle_type))
        .cloned()
        .collect()
}

/// Subproblem over the orders `vehicle` may serve, with windows and travel
/// restricted to them. An empty result is valid.
pub fn order_filtering(
    orders: &[Order],
    vehicle: &VehicleSpec,
    travel: &TravelMatrix,
) -> Result<Subproblem, InputError> {
    Subproblem::new(
        reachable_orders(orders, vehicle.vehicle_type),
        vehicle.clone(),
        travel,
        MobilityHandling::Filtered,
    )
}

/// Index of the next vehicle to route, or `None` when no vehicle with uses
/// left can reach any remaining order.
pub fn select_vehicle(
    fleet: &[VehicleSpec],
    uses_left: &[u32],
    remaining: &[Order],
    policy: VehiclePolicy,
    allow_rentals: bool,
) -> Option<usize> {
    let candidates = fleet.iter().enumerate().filter(|(k, v)| {
        uses_left[*k] > 0
            && (allow_rentals || v.ownership == Ownership::Owned)
            && remaining.iter().any(|o| o.reachable_by(v.vehicle_type))
    });
    match policy {
        VehiclePolicy::DeclaredOrder => candidates.map(|(k, _)| k).next(),
        VehiclePolicy::OwnedFirstDescCapacity => candidates
            .min_by(|(ka, a), (kb, b)| {
                let owned = |v: &VehicleSpec| v.ownership != Ownership::Owned;
                let cap = |v: &VehicleSpec| v.max_weight.min(v.max_dim);
                owned(a)
                    .cmp(&owned(b))
                    .then(cap(b).total_cmp(&cap(a)))
                    .then(a.vehicle_type.cmp(&b.vehicle_type))
                    .then(ka.cmp(kb))
            })
            .map(|(k, _)| k),
    }
}

fn round_seed(seed: u64, round: usize) -> u64 {
    seed.wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn plan(instance: &Instance, config: &OrchestratorConfig) -> Result<Plan, PlanError> {
    plan_with_trace(instance, config).map(|(p, _)| p)
}

/// Runs the planning loop and also returns one record per round.
pub fn plan_with_trace(
    instance: &Instance,
    config: &OrchestratorConfig,
) -> Result<(Plan, Vec<RoundRecord>), PlanError> {
    let problems = check_instance(instance);
    if !problems.is_empty() {
        return Err(PlanError::Instance(problems));
    }
    if config.max_rounds < 1 {
        return Err(PlanError::Config("max_rounds must be at least 1".into()));
    }
    config.solver.validate()?;

    // one reward for every round keeps objectives comparable across modes
    let weights = ObjectiveWeights::for_travel(&instance.travel);
    let mut remaining: Vec<Order> = instance.orders.clone();
    let mut uses_left: Vec<u32> = instance.fleet.iter().map(|v| v.max_uses).collect();
    let mut routes: Vec<Route> = Vec::new();
    let mut records = Vec::new();

    for round in 0..config.max_rounds {
        if remaining.is_empty() {
            break;
        }
        let Some(k) = select_vehicle(
            &instance.fleet,
            &uses_left,
            &remaining,
            config.vehicle_policy,
            config.allow_rentals,
        ) else {
            break;
        };
        let vehicle = &instance.fleet[k];
        uses_left[k] -= 1;
        let sub = match config.mobility_mode {
            MobilityMode::Filter => order_filtering(&remaining, vehicle, &instance.travel)?,
            MobilityMode::Constraint => Subproblem::new(
                remaining.clone(),
                vehicle.clone(),
                &instance.travel,
                MobilityHandling::Constrained,
            )?,
        };
        let model = build_route_model(&sub, weights)?;
        let solver = SolverConfig {
            seed: round_seed(config.solver.seed, round),
            ..config.solver.clone()
        };
        let outcome = solve(&model, &sub, &solver)?;
        let backend = match solver.backend {
            Backend::Auto if sub.reachable_count() <= solver.auto_exact_max => Backend::Exact,
            Backend::Auto => Backend::Anneal,
            b => b,
        };
        let usable = outcome.status == OutcomeStatus::Solved && outcome.feasible;
        let route = if usable {
            decode(&outcome.assignment, &sub).ok()
        } else {
            None
        };
        let served = route.as_ref().map_or(0, Route::len);
        records.push(RoundRecord {
            vehicle: vehicle.id.clone(),
            backend,
            considered: sub.len(),
            served,
            objective: outcome.objective,
            feasible: outcome.feasible,
            timed_out: outcome.diagnostics.timed_out,
            wall_time: outcome.diagnostics.wall_time,
        });
        let Some(mut route) = route.filter(|r| !r.is_empty()) else {
            break;
        };
        let used = vehicle.max_uses - uses_left[k];
        route.id = format!("{}/{}", vehicle.id, used);

        let stops: Vec<&Order> = route
            .sequence
            .iter()
            .map(|id| {
                remaining
                    .iter()
                    .find(|o| &o.id == id)
                    .expect("decoded from remaining")
            })
            .collect();
        let nodes: Vec<usize> = stops.iter().map(|o| o.node).collect();
        let violations = check_route(&route.id, vehicle, &stops, &nodes, &instance.travel)?;
        if !violations.is_empty() {
            return Err(PlanError::RejectedRoute {
                route: route.id,
                violations,
            });
        }
        let done: HashSet<&str> = route.sequence.iter().map(String::as_str).collect();
        remaining.retain(|o| !done.contains(o.id.as_str()));
        routes.push(route);
    }

    let unserved = remaining.into_iter().map(|o| o.id).collect();
    let plan = Plan::new(instance.name.clone(), routes, unserved);
    let report = validate_plan(instance, &plan);
    if !report.ok {
        return Err(PlanError::RejectedRoute {
            route: String::new(),
            violations: report.violations,
        });
    }
    Ok((plan, records))
}

/// Outcome of planning the same instance in both mobility modes.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub filter: Plan,
    pub constraint: Plan,
    pub mismatches: Vec<String>,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Plans `instance` with order filtering and with mobility constraints and
/// compares the routes: same vehicles, same served sets, same distance.
pub fn mobility_mode_equivalence_check(
    instance: &Instance,
    config: &OrchestratorConfig,
) -> Result<EquivalenceReport, PlanError> {
    let with = |mode| {
        plan(
            instance,
            &OrchestratorConfig {
                mobility_mode: mode,
                ..config.clone()
            },
        )
    };
    let filter = with(MobilityMode::Filter)?;
    let constraint = with(MobilityMode::Constraint)?;
    let mut mismatches = Vec::new();
    if filter.routes.len() != constraint.routes.len() {
        mismatches.push(format!(
            "filter mode built {} routes, constraint mode {}",
            filter.routes.len(),
            constraint.routes.len()
        ));
    }
    for (a, b) in filter.routes.iter().zip(&constraint.routes) {
        let sa: BTreeSet<&String> = a.sequence.iter().collect();
        let sb: BTreeSet<&String> = b.sequence.iter().collect();
        if a.vehicle != b.vehicle || sa != sb {
            mismatches.push(format!(
                "route {}: filter {:?} on {}, constraint {:?} on {}",
                a.id, a.sequence, a.vehicle, b.sequence, b.vehicle
            ));
        }
        if (a.distance - b.distance).abs() > crate::model::TOLERANCE {
            mismatches.push(format!(
                "route {}: filter distance {}, constraint distance {}",
                a.id, a.distance, b.distance
            ));
        }
    }
    Ok(EquivalenceReport {
        filter,
        constraint,
        mismatches,
    })
}
