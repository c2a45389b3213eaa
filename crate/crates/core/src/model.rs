//! Domain types shared by every stage of the planner: orders, vehicles,
//! travel matrices, instances, routes and plans.
//!
//! Node 0 of every travel matrix is the depot. Each order owns exactly one
//! node; co-located orders simply share coordinates.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack used for every feasibility comparison in the crate.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("coordinate {index} is not finite: ({x}, {y})")]
    NonFiniteCoordinate { index: usize, x: f64, y: f64 },
    #[error("speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("at least one point (the depot) is required")]
    NoPoints,
    #[error("node {node} is outside a travel matrix of {size} nodes")]
    UnknownNode { node: usize, size: usize },
    #[error("matrix shape mismatch: {0}")]
    MatrixShape(String),
}

/// An upper limit that may be absent. Used for order deadlines and route
/// durations; `Unbounded` stands for infinity and is serialized as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum Limit {
    Finite(f64),
    #[default]
    Unbounded,
}

impl Limit {
    pub fn finite(value: f64) -> Self {
        if value.is_infinite() && value > 0.0 {
            Limit::Unbounded
        } else {
            Limit::Finite(value)
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Limit::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Limit::Finite(v) => Some(v),
            Limit::Unbounded => None,
        }
    }

    /// True when `x` does not exceed the limit by more than [`TOLERANCE`].
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Limit::Finite(v) => x <= v + TOLERANCE,
            Limit::Unbounded => true,
        }
    }
}

impl From<Option<f64>> for Limit {
    fn from(value: Option<f64>) -> Self {
        value.map_or(Limit::Unbounded, Limit::finite)
    }
}

impl From<Limit> for Option<f64> {
    fn from(value: Limit) -> Self {
        value.value()
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::Unbounded => f.write_str("inf"),
        }
    }
}

/// One customer request. A customer may ask for a delivery, a pickup, or
/// both at the same stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub id: String,
    /// Index into the instance travel matrices, never 0.
    pub node: usize,
    #[serde(rename = "wd")]
    pub delivery_weight: f64,
    #[serde(rename = "dd")]
    pub delivery_dim: f64,
    #[serde(rename = "wp")]
    pub pickup_weight: f64,
    #[serde(rename = "dp")]
    pub pickup_dim: f64,
    /// Earliest admissible arrival on the route clock (0 = no lower limit).
    #[serde(rename = "lt")]
    pub earliest: f64,
    #[serde(rename = "ut")]
    pub latest: Limit,
    /// Zone type; a vehicle of type `vt` may only visit zones with `vt <= zone`.
    #[serde(rename = "ot")]
    pub zone: u32,
}

impl Order {
    /// Order with no load, no window and zone 1.
    pub fn new(id: impl Into<String>, node: usize) -> Self {
        Order {
            id: id.into(),
            node,
            delivery_weight: 0.0,
            delivery_dim: 0.0,
            pickup_weight: 0.0,
            pickup_dim: 0.0,
            earliest: 0.0,
            latest: Limit::Unbounded,
            zone: 1,
        }
    }

    pub fn with_delivery(mut self, weight: f64, dim: f64) -> Self {
        self.delivery_weight = weight;
        self.delivery_dim = dim;
        self
    }

    pub fn with_pickup(mut self, weight: f64, dim: f64) -> Self {
        self.pickup_weight = weight;
        self.pickup_dim = dim;
        self
    }

    pub fn with_window(mut self, earliest: f64, latest: Limit) -> Self {
        self.earliest = earliest;
        self.latest = latest;
        self
    }

    pub fn with_zone(mut self, zone: u32) -> Self {
        self.zone = zone;
        self
    }

    pub fn has_window(&self) -> bool {
        self.earliest > 0.0 || self.latest.is_bounded()
    }

    /// Mobility rule: vehicle type `vt` may serve this order iff `vt <= zone`.
    pub fn reachable_by(&self, vehicle_type: u32) -> bool {
        vehicle_type <= self.zone
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ownership {
    Owned,
    Rentable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: String,
    #[serde(rename = "W")]
    pub max_weight: f64,
    #[serde(rename = "D")]
    pub max_dim: f64,
    #[serde(rename = "vt")]
    pub vehicle_type: u32,
    #[serde(rename = "rt")]
    pub max_duration: Limit,
    pub ownership: Ownership,
    pub max_uses: u32,
}

impl VehicleSpec {
    pub fn new(id: impl Into<String>, max_weight: f64, max_dim: f64) -> Self {
        VehicleSpec {
            id: id.into(),
            max_weight,
            max_dim,
            vehicle_type: 1,
            max_duration: Limit::Unbounded,
            ownership: Ownership::Owned,
            max_uses: 1,
        }
    }

    pub fn with_type(mut self, vehicle_type: u32) -> Self {
        self.vehicle_type = vehicle_type;
        self
    }

    pub fn with_max_duration(mut self, limit: Limit) -> Self {
        self.max_duration = limit;
        self
    }

    pub fn with_ownership(mut self, ownership: Ownership) -> Self {
        self.ownership = ownership;
        self
    }

    pub fn with_max_uses(mut self, uses: u32) -> Self {
        self.max_uses = uses;
        self
    }
}

/// Square travel-time and distance matrices, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    size: usize,
    time: Vec<f64>,
    dist: Vec<f64>,
}

impl TravelMatrix {
    pub fn from_rows(time: Vec<Vec<f64>>, dist: Vec<Vec<f64>>) -> Result<Self, InputError> {
        let size = time.len();
        if dist.len() != size {
            return Err(InputError::MatrixShape(format!(
                "time has {size} rows, dist has {}",
                dist.len()
            )));
        }
        let mut t = Vec::with_capacity(size * size);
        let mut d = Vec::with_capacity(size * size);
        for (r, (trow, drow)) in time.into_iter().zip(dist).enumerate() {
            if trow.len() != size || drow.len() != size {
                return Err(InputError::MatrixShape(format!(
                    "row {r} has {} time / {} dist entries, expected {size}",
                    trow.len(),
                    drow.len()
                )));
            }
            t.extend(trow);
            d.extend(drow);
        }
        Ok(TravelMatrix {
            size,
            time: t,
            dist: d,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn time(&self, from: usize, to: usize) -> f64 {
        self.time[from * self.size + to]
    }

    #[inline]
    pub fn dist(&self, from: usize, to: usize) -> f64 {
        self.dist[from * self.size + to]
    }

    pub fn time_rows(&self) -> Vec<Vec<f64>> {
        self.time
            .chunks(self.size.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn dist_rows(&self) -> Vec<Vec<f64>> {
        self.dist
            .chunks(self.size.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn time_entries(&self) -> &[f64] {
        &self.time
    }

    pub fn max_dist(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Sub-matrix over the given nodes, in the given order. Local index `k`
    /// maps to `nodes[k]`.
    pub fn restrict(&self, nodes: &[usize]) -> Result<TravelMatrix, InputError> {
        if let Some(&node) = nodes.iter().find(|&&n| n >= self.size) {
            return Err(InputError::UnknownNode {
                node,
                size: self.size,
            });
        }
        let n = nodes.len();
        let mut time = Vec::with_capacity(n * n);
        let mut dist = Vec::with_capacity(n * n);
        for &a in nodes {
            for &b in nodes {
                time.push(self.time(a, b));
                dist.push(self.dist(a, b));
            }
        }
        Ok(TravelMatrix {
            size: n,
            time,
            dist,
        })
    }
}

/// Euclidean travel matrix; travel time is distance divided by `speed`.
pub fn travel_matrix_from_coords(
    coords: &[(f64, f64)],
    speed: f64,
) -> Result<TravelMatrix, InputError> {
    if coords.is_empty() {
        return Err(InputError::NoPoints);
    }
    if !(speed.is_finite() && speed > 0.0) {
        return Err(InputError::InvalidSpeed(speed));
    }
    if let Some((index, &(x, y))) = coords
        .iter()
        .enumerate()
        .find(|(_, (x, y))| !x.is_finite() || !y.is_finite())
    {
        return Err(InputError::NonFiniteCoordinate { index, x, y });
    }
    let n = coords.len();
    let mut time = vec![0.0; n * n];
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (xi, yi) = coords[i];
            let (xj, yj) = coords[j];
            let d = (xi - xj).hypot(yi - yj);
            let t = d / speed;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            time[i * n + j] = t;
            time[j * n + i] = t;
        }
    }
    Ok(TravelMatrix {
        size: n,
        time,
        dist,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub orders: Vec<Order>,
    pub fleet: Vec<VehicleSpec>,
    pub travel: TravelMatrix,
    /// Planar position per node (depot first), when known.
    pub coords: Option<Vec<(f64, f64)>>,
}

impl Instance {
    pub fn order(&self, id: &str) -> Option<&Order> {
        self.orders.iter().find(|o| o.id == id)
    }

    pub fn vehicle(&self, id: &str) -> Option<&VehicleSpec> {
        self.fleet.iter().find(|v| v.id == id)
    }
}

/// One broken instance rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceViolation {
    pub entity: String,
    pub rule: String,
    pub detail: String,
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

/// Checks every structural rule of an instance and lists what is broken.
/// An empty result means the instance is well formed.
pub fn check_instance(instance: &Instance) -> Vec<InstanceViolation> {
    let mut out = Vec::new();
    let mut push = |entity: String, rule: &str, detail: String| {
        out.push(InstanceViolation {
            entity,
            rule: rule.to_string(),
            detail,
        })
    };

    let n = instance.travel.size();
    if n == 0 {
        push("travel".into(), "empty matrix", "depot node missing".into());
    }
    for i in 0..n {
        for j in 0..n {
            let (t, d) = (instance.travel.time(i, j), instance.travel.dist(i, j));
            if !(t.is_finite() && d.is_finite()) || t < 0.0 || d < 0.0 {
                push(
                    "travel".into(),
                    "invalid entry",
                    format!("[{i}][{j}] time={t} dist={d}"),
                );
            } else if i == j && (t != 0.0 || d != 0.0) {
                push(
                    "travel".into(),
                    "nonzero diagonal",
                    format!("[{i}][{i}] time={t} dist={d}"),
                );
            }
        }
    }
    if let Some(coords) = &instance.coords {
        if coords.len() != n {
            push(
                "coords".into(),
                "size mismatch",
                format!("{} coordinates for {n} nodes", coords.len()),
            );
        }
    }

    let mut nodes: HashMap<usize, &str> = HashMap::new();
    let mut ids = HashSet::new();
    for o in &instance.orders {
        let entity = format!("order {}", o.id);
        if !ids.insert(o.id.as_str()) {
            push(entity.clone(), "duplicate id", "order id used twice".into());
        }
        if o.node == 0 || o.node >= n {
            push(
                entity.clone(),
                "node out of range",
                format!("node {} not in [1, {}]", o.node, n.saturating_sub(1)),
            );
        }
        if let Some(other) = nodes.insert(o.node, &o.id) {
            push(
                entity.clone(),
                "duplicate node",
                format!("node {} already used by order {other}", o.node),
            );
        }
        let amounts = [
            ("wd", o.delivery_weight),
            ("dd", o.delivery_dim),
            ("wp", o.pickup_weight),
            ("dp", o.pickup_dim),
        ];
        for (name, v) in amounts {
            if !(v.is_finite() && v >= 0.0) {
                push(
                    entity.clone(),
                    "negative amount",
                    format!("{name}={v} must be finite and >= 0"),
                );
            }
        }
        if o.delivery_weight + o.delivery_dim <= 0.0 && o.pickup_weight + o.pickup_dim <= 0.0 {
            push(
                entity.clone(),
                "empty request",
                "neither a delivery nor a pickup is requested".into(),
            );
        }
        if !(o.earliest.is_finite() && o.earliest >= 0.0) {
            push(
                entity.clone(),
                "invalid lower limit",
                format!("lt={} must be finite and >= 0", o.earliest),
            );
        }
        if let Limit::Finite(ut) = o.latest {
            if !ut.is_finite() {
                push(entity.clone(), "invalid upper limit", format!("ut={ut}"));
            } else if o.earliest > ut {
                push(
                    entity.clone(),
                    "window inverted",
                    format!("lt={} > ut={ut}", o.earliest),
                );
            }
        }
        if o.zone < 1 {
            push(entity, "invalid zone", "ot must be >= 1".into());
        }
    }

    let mut vehicle_ids = HashSet::new();
    for v in &instance.fleet {
        let entity = format!("vehicle {}", v.id);
        if !vehicle_ids.insert(v.id.as_str()) {
            push(
                entity.clone(),
                "duplicate id",
                "vehicle id used twice".into(),
            );
        }
        if !(v.max_weight.is_finite() && v.max_weight > 0.0) {
            push(
                entity.clone(),
                "invalid capacity",
                format!("W={}", v.max_weight),
            );
        }
        if !(v.max_dim.is_finite() && v.max_dim > 0.0) {
            push(
                entity.clone(),
                "invalid capacity",
                format!("D={}", v.max_dim),
            );
        }
        if v.vehicle_type < 1 {
            push(entity.clone(), "invalid type", "vt must be >= 1".into());
        }
        if let Limit::Finite(rt) = v.max_duration {
            if !(rt.is_finite() && rt >= 0.0) {
                push(entity.clone(), "invalid duration", format!("rt={rt}"));
            }
        }
        if v.max_uses < 1 {
            push(entity, "invalid uses", "max_uses must be >= 1".into());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Load {
    pub weight: f64,
    pub dim: f64,
}

/// A regular route: leaves the depot, visits `sequence` in order, returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub id: String,
    pub vehicle: String,
    pub sequence: Vec<String>,
    /// Arrival time at each stop, aligned with `sequence`.
    pub arrivals: Vec<f64>,
    /// Load on board when leaving the depot.
    pub departure_load: Load,
    /// Load on board after servicing each stop.
    pub loads: Vec<Load>,
    /// Time until the vehicle is back at the depot.
    pub duration: f64,
    pub distance: f64,
}

impl Route {
    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub instance: String,
    pub routes: Vec<Route>,
    pub unserved: Vec<String>,
    pub total_distance: f64,
    pub total_duration: f64,
}

impl Plan {
    pub fn new(instance: impl Into<String>, routes: Vec<Route>, unserved: Vec<String>) -> Self {
        let total_distance = routes.iter().map(|r| r.distance).sum();
        let total_duration = routes.iter().map(|r| r.duration).sum();
        Plan {
            instance: instance.into(),
            routes,
            unserved,
            total_distance,
            total_duration,
        }
    }

    pub fn served(&self) -> impl Iterator<Item = &str> {
        self.routes
            .iter()
            .flat_map(|r| r.sequence.iter().map(String::as_str))
    }

    pub fn served_count(&self) -> usize {
        self.routes.iter().map(Route::len).sum()
    }
}
