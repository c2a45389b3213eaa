//! Independent feasibility checking and trajectory computation.
//!
//! Everything here is recomputed from raw order and matrix data. Nothing is
//! shared with the model builder, so the two can be checked against each
//! other.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    InputError, Instance, Load, Order, Plan, Route, TravelMatrix, VehicleSpec, TOLERANCE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub arrivals: Vec<f64>,
    pub duration: f64,
    pub distance: f64,
}

/// Arrival time at each node of `nodes` (a stop sequence, depot excluded)
/// when leaving the depot at time 0, plus the closed-tour duration and
/// distance. An empty sequence never leaves the depot.
pub fn route_timeline(nodes: &[usize], travel: &TravelMatrix) -> Result<Timeline, InputError> {
    if let Some(&node) = nodes.iter().find(|&&n| n >= travel.size()) {
        return Err(InputError::UnknownNode {
            node,
            size: travel.size(),
        });
    }
    let mut arrivals = Vec::with_capacity(nodes.len());
    let (mut clock, mut distance, mut at) = (0.0, 0.0, 0usize);
    for &next in nodes {
        clock += travel.time(at, next);
        distance += travel.dist(at, next);
        arrivals.push(clock);
        at = next;
    }
    if !nodes.is_empty() {
        clock += travel.time(at, 0);
        distance += travel.dist(at, 0);
    }
    Ok(Timeline {
        arrivals,
        duration: clock,
        distance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub departure: Load,
    pub after: Vec<Load>,
}

/// On-board load when leaving the depot (all deliveries) and after each stop
/// (deliveries dropped, pickups collected).
pub fn route_loads(orders: &[&Order]) -> LoadProfile {
    let departure = Load {
        weight: orders.iter().map(|o| o.delivery_weight).sum(),
        dim: orders.iter().map(|o| o.delivery_dim).sum(),
    };
    let mut current = departure;
    let after = orders
        .iter()
        .map(|o| {
            current.weight += o.pickup_weight - o.delivery_weight;
            current.dim += o.pickup_dim - o.delivery_dim;
            current
        })
        .collect();
    LoadProfile { departure, after }
}

/// Builds a [`Route`] with all derived trajectories filled in. `nodes[k]` is
/// the travel-matrix node of `orders[k]`.
pub fn trace_route(
    id: impl Into<String>,
    vehicle: &VehicleSpec,
    orders: &[&Order],
    nodes: &[usize],
    travel: &TravelMatrix,
) -> Result<Route, InputError> {
    let timeline = route_timeline(nodes, travel)?;
    let loads = route_loads(orders);
    Ok(Route {
        id: id.into(),
        vehicle: vehicle.id.clone(),
        sequence: orders.iter().map(|o| o.id.clone()).collect(),
        arrivals: timeline.arrivals,
        departure_load: loads.departure,
        loads: loads.after,
        duration: timeline.duration,
        distance: timeline.distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    CapacityWeight,
    CapacityDim,
    DepartureLoad,
    WindowLower,
    WindowUpper,
    Duration,
    Mobility,
    DuplicateOrder,
    UnknownOrder,
    MissingOrder,
    UnknownVehicle,
    VehicleOveruse,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Route id, or empty for plan-level rules.
    pub route: String,
    pub rule: Rule,
    pub slot: Option<usize>,
    pub order: Option<String>,
    pub measured: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if !self.route.is_empty() {
            write!(f, " route={}", self.route)?;
        }
        if let Some(slot) = self.slot {
            write!(f, " slot={slot}")?;
        }
        if let Some(order) = &self.order {
            write!(f, " order={order}")?;
        }
        write!(f, " measured={} bound={}", self.measured, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Checks one route of `vehicle` visiting `orders` (at `nodes`) for
/// capacity, windows, duration and mobility.
pub fn check_route(
    route_id: &str,
    vehicle: &VehicleSpec,
    orders: &[&Order],
    nodes: &[usize],
    travel: &TravelMatrix,
) -> Result<Vec<Violation>, InputError> {
    let timeline = route_timeline(nodes, travel)?;
    let loads = route_loads(orders);
    let mut out = Vec::new();
    let mut flag = |rule, slot, order: Option<&Order>, measured, bound| {
        out.push(Violation {
            route: route_id.to_string(),
            rule,
            slot,
            order: order.map(|o| o.id.clone()),
            measured,
            bound,
        })
    };

    if loads.departure.weight > vehicle.max_weight + TOLERANCE {
        flag(
            Rule::DepartureLoad,
            None,
            None,
            loads.departure.weight,
            vehicle.max_weight,
        );
    }
    if loads.departure.dim > vehicle.max_dim + TOLERANCE {
        flag(
            Rule::DepartureLoad,
            None,
            None,
            loads.departure.dim,
            vehicle.max_dim,
        );
    }
    for (slot, (order, load)) in orders.iter().zip(&loads.after).enumerate() {
        if load.weight > vehicle.max_weight + TOLERANCE {
            flag(
                Rule::CapacityWeight,
                Some(slot),
                Some(order),
                load.weight,
                vehicle.max_weight,
            );
        }
        if load.dim > vehicle.max_dim + TOLERANCE {
            flag(
                Rule::CapacityDim,
                Some(slot),
                Some(order),
                load.dim,
                vehicle.max_dim,
            );
        }
    }
    for (slot, (order, &arrival)) in orders.iter().zip(&timeline.arrivals).enumerate() {
        if arrival < order.earliest - TOLERANCE {
            flag(
                Rule::WindowLower,
                Some(slot),
                Some(order),
                arrival,
                order.earliest,
            );
        }
        if let Some(ut) = order.latest.value() {
            if arrival > ut + TOLERANCE {
                flag(Rule::WindowUpper, Some(slot), Some(order), arrival, ut);
            }
        }
        if !order.reachable_by(vehicle.vehicle_type) {
            flag(
                Rule::Mobility,
                Some(slot),
                Some(order),
                f64::from(order.zone),
                f64::from(vehicle.vehicle_type),
            );
        }
    }
    if let Some(rt) = vehicle.max_duration.value() {
        if timeline.duration > rt + TOLERANCE {
            flag(Rule::Duration, None, None, timeline.duration, rt);
        }
    }
    Ok(out)
}

/// Full plan check: every route against its vehicle, plus the rule that
/// each instance order is either served exactly once or listed unserved.
pub fn validate_plan(instance: &Instance, plan: &Plan) -> ValidationReport {
    let orders: HashMap<&str, &Order> =
        instance.orders.iter().map(|o| (o.id.as_str(), o)).collect();
    let mut violations = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut uses: HashMap<&str, u32> = HashMap::new();

    for route in &plan.routes {
        let mut stops = Vec::with_capacity(route.sequence.len());
        for id in &route.sequence {
            if !seen.insert(id) {
                violations.push(plan_violation(&route.id, Rule::DuplicateOrder, id));
            }
            match orders.get(id.as_str()) {
                Some(o) => stops.push(*o),
                None => violations.push(plan_violation(&route.id, Rule::UnknownOrder, id)),
            }
        }
        let Some(vehicle) = instance.vehicle(&route.vehicle) else {
            violations.push(plan_violation(
                &route.id,
                Rule::UnknownVehicle,
                &route.vehicle,
            ));
            continue;
        };
        let used = uses.entry(vehicle.id.as_str()).or_default();
        *used += 1;
        if *used == vehicle.max_uses + 1 {
            violations.push(Violation {
                route: route.id.clone(),
                rule: Rule::VehicleOveruse,
                slot: None,
                order: None,
                measured: f64::from(*used),
                bound: f64::from(vehicle.max_uses),
            });
        }
        let nodes: Vec<usize> = stops.iter().map(|o| o.node).collect();
        match check_route(&route.id, vehicle, &stops, &nodes, &instance.travel) {
            Ok(v) => violations.extend(v),
            Err(_) => violations.push(plan_violation(&route.id, Rule::UnknownOrder, "<node>")),
        }
    }
    for id in &plan.unserved {
        if !seen.insert(id) {
            violations.push(plan_violation("", Rule::DuplicateOrder, id));
        }
        if !orders.contains_key(id.as_str()) {
            violations.push(plan_violation("", Rule::UnknownOrder, id));
        }
    }
    for o in &instance.orders {
        if !seen.contains(o.id.as_str()) {
            violations.push(plan_violation("", Rule::MissingOrder, &o.id));
        }
    }
    ValidationReport::from_violations(violations)
}

fn plan_violation(route: &str, rule: Rule, order: &str) -> Violation {
    Violation {
        route: route.to_string(),
        rule,
        slot: None,
        order: Some(order.to_string()),
        measured: 1.0,
        bound: 0.0,
    }
}
