//! Single-route constrained quadratic model.
//!
//! Binary variable `x[i][p]` is 1 when order `i` of the subproblem is the
//! stop at slot `p` of the route. A subproblem with `m` orders has `m`
//! slots and `m * m` variables, indexed `i * m + p`.

mod build;
mod decode;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{InputError, Limit, Order, TravelMatrix, VehicleSpec, TOLERANCE};

pub use build::{
    build_route_model, emit_capacity_constraints, emit_duration_constraint,
    emit_mobility_constraints, emit_structure_constraints, emit_time_constraints, time_big_m,
    ObjectiveWeights,
};
pub use decode::{decode, decode_sequence, StructuralViolation};
pub use json::{model_from_json, model_to_json};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("subproblem has no orders")]
    EmptySubproblem,
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("malformed model document: {0}")]
    Format(String),
}

/// How vehicle-type restrictions reach the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MobilityHandling {
    /// Unreachable orders were removed before building the model.
    #[default]
    Filtered,
    /// All orders are kept and `mobility[i]` constraints forbid the
    /// unreachable ones.
    Constrained,
}

/// The orders one vehicle is asked to route, with a travel matrix restricted
/// to the depot (local node 0) and those orders (local node `k + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub orders: Vec<Order>,
    pub earliest: Vec<f64>,
    pub latest: Vec<Limit>,
    pub vehicle: VehicleSpec,
    pub travel: TravelMatrix,
    pub mobility: MobilityHandling,
}

impl Subproblem {
    /// `travel` is the full instance matrix; order nodes index into it.
    pub fn new(
        orders: Vec<Order>,
        vehicle: VehicleSpec,
        travel: &TravelMatrix,
        mobility: MobilityHandling,
    ) -> Result<Self, InputError> {
        let nodes: Vec<usize> = std::iter::once(0)
            .chain(orders.iter().map(|o| o.node))
            .collect();
        let travel = travel.restrict(&nodes)?;
        Ok(Subproblem {
            earliest: orders.iter().map(|o| o.earliest).collect(),
            latest: orders.iter().map(|o| o.latest).collect(),
            orders,
            vehicle,
            travel,
            mobility,
        })
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Number of orders the vehicle type may actually serve.
    pub fn reachable_count(&self) -> usize {
        let vt = self.vehicle.vehicle_type;
        self.orders.iter().filter(|o| o.reachable_by(vt)).count()
    }

    #[inline]
    pub fn node(order_index: usize) -> usize {
        order_index + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "==",
        })
    }
}

/// Linear plus quadratic polynomial over model variables. Canonical form:
/// terms sorted by variable index, quadratic pairs with `a < b`, no zero
/// coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expression {
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
}

impl Expression {
    pub fn evaluate(&self, x: &Assignment) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(v, _)| x.value(*v))
            .map(|(_, c)| c)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(a, b, _)| x.value(*a) && x.value(*b))
            .map(|(_, _, c)| c)
            .sum();
        lin + quad
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.linear
            .iter()
            .map(|t| t.0)
            .chain(self.quadratic.iter().flat_map(|t| [t.0, t.1]))
    }
}

/// Accumulates terms, merging duplicates.
#[derive(Debug, Clone, Default)]
pub(crate) struct ExprBuilder {
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl ExprBuilder {
    pub fn add_linear(&mut self, var: usize, coef: f64) {
        *self.linear.entry(var).or_default() += coef;
    }

    pub fn add_quadratic(&mut self, a: usize, b: usize, coef: f64) {
        if a == b {
            // x * x == x for binaries
            self.add_linear(a, coef);
        } else {
            *self.quadratic.entry((a.min(b), a.max(b))).or_default() += coef;
        }
    }

    pub fn add_scaled(&mut self, other: &ExprBuilder, scale: f64) {
        for (&v, &c) in &other.linear {
            self.add_linear(v, c * scale);
        }
        for (&(a, b), &c) in &other.quadratic {
            self.add_quadratic(a, b, c * scale);
        }
    }

    pub fn build(&self) -> Expression {
        Expression {
            linear: self
                .linear
                .iter()
                .filter(|(_, c)| **c != 0.0)
                .map(|(&v, &c)| (v, c))
                .collect(),
            quadratic: self
                .quadratic
                .iter()
                .filter(|(_, c)| **c != 0.0)
                .map(|(&(a, b), &c)| (a, b, c))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub expr: Expression,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Amount by which `value` (the left-hand side) breaks the constraint.
    pub fn violation_of(&self, value: f64) -> f64 {
        match self.sense {
            Sense::Le => (value - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - value).max(0.0),
            Sense::Eq => (value - self.rhs).abs(),
        }
    }

    pub fn violation(&self, x: &Assignment) -> f64 {
        self.violation_of(self.expr.evaluate(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub num_orders: usize,
    /// Objective reward per served order.
    pub serve_reward: f64,
    pub variables: Vec<String>,
    pub objective: Expression,
    pub constraints: Vec<Constraint>,
}

impl QuadraticModel {
    /// Declares the `m * m` variables and nothing else.
    pub fn empty(num_orders: usize, serve_reward: f64) -> Self {
        let variables = (0..num_orders)
            .flat_map(|i| (0..num_orders).map(move |p| variable_label(i, p)))
            .collect();
        QuadraticModel {
            num_orders,
            serve_reward,
            variables,
            objective: Expression::default(),
            constraints: Vec::new(),
        }
    }

    #[inline]
    pub fn var(&self, order: usize, slot: usize) -> usize {
        order * self.num_orders + slot
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn constraint(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn evaluate(&self, x: &Assignment) -> Evaluation {
        let violations: Vec<f64> = self.constraints.iter().map(|c| c.violation(x)).collect();
        Evaluation {
            objective: self.objective.evaluate(x),
            feasible: violations.iter().all(|v| *v <= TOLERANCE),
            violations,
        }
    }

    pub(crate) fn push(&mut self, label: String, expr: &ExprBuilder, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            label,
            expr: expr.build(),
            sense,
            rhs,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub feasible: bool,
    /// Per-constraint violation, aligned with `QuadraticModel::constraints`.
    pub violations: Vec<f64>,
}

pub fn variable_label(order: usize, slot: usize) -> String {
    format!("x[{order}][{slot}]")
}

/// 0/1 value per model variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    num_orders: usize,
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(num_orders: usize) -> Self {
        Assignment {
            num_orders,
            bits: vec![false; num_orders * num_orders],
        }
    }

    pub fn from_bits(num_orders: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), num_orders * num_orders, "assignment size");
        Assignment { num_orders, bits }
    }

    /// Places `sequence[p]` (a subproblem order index) at slot `p`.
    pub fn from_sequence(num_orders: usize, sequence: &[usize]) -> Self {
        let mut a = Assignment::zeros(num_orders);
        for (p, &i) in sequence.iter().enumerate() {
            a.set(i, p, true);
        }
        a
    }

    pub fn num_orders(&self) -> usize {
        self.num_orders
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn value(&self, var: usize) -> bool {
        self.bits[var]
    }

    pub fn get(&self, order: usize, slot: usize) -> bool {
        self.bits[order * self.num_orders + slot]
    }

    pub fn set(&mut self, order: usize, slot: usize, on: bool) {
        self.bits[order * self.num_orders + slot] = on;
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_merges_and_canonicalizes() {
        let mut b = ExprBuilder::default();
        b.add_linear(3, 1.0);
        b.add_linear(3, 2.0);
        b.add_quadratic(5, 2, 1.5);
        b.add_quadratic(2, 5, 0.5);
        b.add_quadratic(4, 4, 1.0);
        b.add_linear(7, 1.0);
        b.add_linear(7, -1.0);
        let e = b.build();
        assert_eq!(e.linear, vec![(3, 3.0), (4, 1.0)]);
        assert_eq!(e.quadratic, vec![(2, 5, 2.0)]);
    }

    #[test]
    fn violation_by_sense() {
        let c = |sense| Constraint {
            label: "c".into(),
            expr: Expression::default(),
            sense,
            rhs: 2.0,
        };
        assert_eq!(c(Sense::Le).violation_of(3.0), 1.0);
        assert_eq!(c(Sense::Le).violation_of(1.0), 0.0);
        assert_eq!(c(Sense::Ge).violation_of(1.0), 1.0);
        assert_eq!(c(Sense::Eq).violation_of(1.5), 0.5);
    }

    #[test]
    fn assignment_from_sequence() {
        let a = Assignment::from_sequence(3, &[2, 0]);
        assert!(a.get(2, 0) && a.get(0, 1));
        assert_eq!(a.ones().count(), 2);
    }
}
