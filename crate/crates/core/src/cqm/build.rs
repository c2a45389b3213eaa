use super::{ExprBuilder, MobilityHandling, ModelError, QuadraticModel, Sense, Subproblem};
use crate::model::TravelMatrix;

/// Weights of the route objective `distance - serve_reward * served`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub serve_reward: f64,
}

impl ObjectiveWeights {
    /// Ten times the longest distance entry. Any detour that adds one stop
    /// costs at most twice that, so serving more orders always wins.
    pub fn for_travel(travel: &TravelMatrix) -> Self {
        let d = travel.max_dist();
        ObjectiveWeights {
            serve_reward: if d > 0.0 { 10.0 * d } else { 1.0 },
        }
    }
}

/// Builds the complete single-route model for `sub`.
pub fn build_route_model(
    sub: &Subproblem,
    weights: ObjectiveWeights,
) -> Result<QuadraticModel, ModelError> {
    if sub.is_empty() {
        return Err(ModelError::EmptySubproblem);
    }
    let mut model = QuadraticModel::empty(sub.len(), weights.serve_reward);
    model.objective = objective(&model, sub).build();
    emit_structure_constraints(&mut model);
    emit_capacity_constraints(&mut model, sub);
    emit_time_constraints(&mut model, sub);
    emit_duration_constraint(&mut model, sub);
    if sub.mobility == MobilityHandling::Constrained {
        emit_mobility_constraints(&mut model, sub, sub.vehicle.vehicle_type);
    }
    Ok(model)
}

/// Arrival-time expression at every slot: the depot leg into slot 0 plus
/// every consecutive-slot leg before `p`. For slots past the last occupied
/// one this equals the arrival at the last stop.
fn arrival_expressions(
    model: &QuadraticModel,
    cost: impl Fn(usize, usize) -> f64,
) -> Vec<ExprBuilder> {
    let m = model.num_orders;
    let mut out = Vec::with_capacity(m);
    let mut acc = ExprBuilder::default();
    for i in 0..m {
        acc.add_linear(model.var(i, 0), cost(0, Subproblem::node(i)));
    }
    out.push(acc.clone());
    for p in 1..m {
        add_legs(&mut acc, model, p - 1, &cost, 1.0);
        out.push(acc.clone());
    }
    out
}

/// Adds `scale * sum_{i != j} cost(i, j) x[i][p] x[j][p+1]`.
fn add_legs(
    acc: &mut ExprBuilder,
    model: &QuadraticModel,
    p: usize,
    cost: &impl Fn(usize, usize) -> f64,
    scale: f64,
) {
    let m = model.num_orders;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let c = cost(Subproblem::node(i), Subproblem::node(j));
                acc.add_quadratic(model.var(i, p), model.var(j, p + 1), scale * c);
            }
        }
    }
}

/// Cost of the leg from the last occupied slot back to the depot:
/// `sum_p sum_i cost(i, 0) x[i][p] (1 - sum_{j != i} x[j][p+1])`.
fn return_leg(model: &QuadraticModel, cost: impl Fn(usize, usize) -> f64) -> ExprBuilder {
    let m = model.num_orders;
    let mut acc = ExprBuilder::default();
    for p in 0..m {
        for i in 0..m {
            let back = cost(Subproblem::node(i), 0);
            acc.add_linear(model.var(i, p), back);
            if p + 1 < m {
                for j in 0..m {
                    if j != i {
                        acc.add_quadratic(model.var(i, p), model.var(j, p + 1), -back);
                    }
                }
            }
        }
    }
    acc
}

fn objective(model: &QuadraticModel, sub: &Subproblem) -> ExprBuilder {
    let m = model.num_orders;
    let dist = |a, b| sub.travel.dist(a, b);
    let mut obj = arrival_expressions(model, dist).pop().unwrap_or_default();
    obj.add_scaled(&return_leg(model, dist), 1.0);
    for v in 0..m * m {
        obj.add_linear(v, -model.serve_reward);
    }
    obj
}

/// Position-based route structure: one order per slot (`slot_unique[p]`),
/// each order at most once (`order_once[i]`) and no empty slot before an
/// occupied one (`contig[p]`).
pub fn emit_structure_constraints(model: &mut QuadraticModel) {
    let m = model.num_orders;
    for p in 0..m {
        let mut e = ExprBuilder::default();
        for i in 0..m {
            e.add_linear(model.var(i, p), 1.0);
        }
        model.push(format!("slot_unique[{p}]"), &e, Sense::Le, 1.0);
    }
    for i in 0..m {
        let mut e = ExprBuilder::default();
        for p in 0..m {
            e.add_linear(model.var(i, p), 1.0);
        }
        model.push(format!("order_once[{i}]"), &e, Sense::Le, 1.0);
    }
    for p in 0..m.saturating_sub(1) {
        let mut e = ExprBuilder::default();
        for i in 0..m {
            e.add_linear(model.var(i, p + 1), 1.0);
            e.add_linear(model.var(i, p), -1.0);
        }
        model.push(format!("contig[{p}]"), &e, Sense::Le, 0.0);
    }
}

/// Load after slot `p` is every pickup collected up to `p` plus every
/// delivery still on board for later slots; it must fit in `W` and `D`.
/// The departure load (all deliveries) is bounded as well.
pub fn emit_capacity_constraints(model: &mut QuadraticModel, sub: &Subproblem) {
    let m = model.num_orders;
    let (cap_w, cap_d) = (sub.vehicle.max_weight, sub.vehicle.max_dim);
    for p in 0..m {
        let mut w = ExprBuilder::default();
        let mut d = ExprBuilder::default();
        for q in 0..m {
            for (i, o) in sub.orders.iter().enumerate() {
                let v = model.var(i, q);
                if q <= p {
                    w.add_linear(v, o.pickup_weight);
                    d.add_linear(v, o.pickup_dim);
                } else {
                    w.add_linear(v, o.delivery_weight);
                    d.add_linear(v, o.delivery_dim);
                }
            }
        }
        model.push(format!("w_cap[{p}]"), &w, Sense::Le, cap_w);
        model.push(format!("d_cap[{p}]"), &d, Sense::Le, cap_d);
    }
    let mut w = ExprBuilder::default();
    let mut d = ExprBuilder::default();
    for q in 0..m {
        for (i, o) in sub.orders.iter().enumerate() {
            w.add_linear(model.var(i, q), o.delivery_weight);
            d.add_linear(model.var(i, q), o.delivery_dim);
        }
    }
    model.push("w_depart".into(), &w, Sense::Le, cap_w);
    model.push("d_depart".into(), &d, Sense::Le, cap_d);
}

/// Big-M constant for slot-conditioned time constraints: the sum of the
/// `m + 1` largest travel times bounds every route duration, and it must
/// also cover the largest lower limit so `lt[k][p]` is slack when order `k`
/// is elsewhere.
pub fn time_big_m(sub: &Subproblem) -> f64 {
    let mut times = sub.travel.time_entries().to_vec();
    times.sort_by(|a, b| b.total_cmp(a));
    let route_bound: f64 = times.iter().take(sub.len() + 1).sum();
    sub.earliest.iter().copied().fold(route_bound, f64::max)
}

/// Window constraints, one pair per (order, slot), active only when the
/// order sits in that slot:
/// `arrival(p) - B x[k][p] >= lt_k - B` and `arrival(p) + B x[k][p] <= ut_k + B`.
/// Orders without a lower limit (or without an upper limit) get none.
pub fn emit_time_constraints(model: &mut QuadraticModel, sub: &Subproblem) {
    if sub.earliest.iter().all(|&lt| lt <= 0.0) && sub.latest.iter().all(|ut| !ut.is_bounded()) {
        return;
    }
    let m = model.num_orders;
    let big_m = time_big_m(sub);
    let arrivals = arrival_expressions(model, |a, b| sub.travel.time(a, b));
    for k in 0..m {
        let (lt, ut) = (sub.earliest[k], sub.latest[k].value());
        for (p, arrival) in arrivals.iter().enumerate() {
            let x = model.var(k, p);
            if lt > 0.0 {
                let mut e = arrival.clone();
                e.add_linear(x, -big_m);
                model.push(format!("lt[{k}][{p}]"), &e, Sense::Ge, lt - big_m);
            }
            if let Some(ut) = ut {
                let mut e = arrival.clone();
                e.add_linear(x, big_m);
                model.push(format!("ut[{k}][{p}]"), &e, Sense::Le, ut + big_m);
            }
        }
    }
}

/// Closed-tour duration bound: arrival at the last occupied slot plus the
/// return leg must not exceed `rt`. Skipped when `rt` is unbounded.
pub fn emit_duration_constraint(model: &mut QuadraticModel, sub: &Subproblem) {
    let Some(rt) = sub.vehicle.max_duration.value() else {
        return;
    };
    let time = |a, b| sub.travel.time(a, b);
    let mut e = arrival_expressions(model, time).pop().unwrap_or_default();
    e.add_scaled(&return_leg(model, time), 1.0);
    model.push("duration".into(), &e, Sense::Le, rt);
}

/// `sum_p x[i][p] <= 1` when `vehicle_type <= ot_i`, else `<= 0`.
pub fn emit_mobility_constraints(model: &mut QuadraticModel, sub: &Subproblem, vehicle_type: u32) {
    let m = model.num_orders;
    for (i, o) in sub.orders.iter().enumerate() {
        let mut e = ExprBuilder::default();
        for p in 0..m {
            e.add_linear(model.var(i, p), 1.0);
        }
        let bound = if o.reachable_by(vehicle_type) {
            1.0
        } else {
            0.0
        };
        model.push(format!("mobility[{i}]"), &e, Sense::Le, bound);
    }
}
