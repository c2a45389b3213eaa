use std::time::Instant;

use super::{SolveError, SolveOutcome, SolverConfig};
use crate::cqm::{Assignment, QuadraticModel, Subproblem};
use crate::model::TOLERANCE;

#[derive(Clone, Copy)]
struct Prefix {
    at: usize,
    clock: f64,
    dist: f64,
    delivered_w: f64,
    delivered_d: f64,
    picked_w: f64,
    picked_d: f64,
    /// max over the prefix of (pickups so far - deliveries so far), at least 0
    excess_w: f64,
    excess_d: f64,
}

struct Search<'a> {
    sub: &'a Subproblem,
    reward: f64,
    seq: Vec<usize>,
    used: Vec<bool>,
    best: Vec<usize>,
    best_objective: f64,
    visited: u64,
    reachable: usize,
}

impl Search<'_> {
    fn extend(&mut self, prefix: Prefix) {
        // distances are nonnegative, so no completion beats serving every
        // remaining order at zero extra distance
        let bound = prefix.dist - self.reward * self.reachable as f64;
        if bound >= self.best_objective + TOLERANCE {
            return;
        }
        let sub = self.sub;
        let vehicle = &sub.vehicle;
        for i in 0..sub.len() {
            if self.used[i] {
                continue;
            }
            let order = &sub.orders[i];
            if !order.reachable_by(vehicle.vehicle_type) {
                continue;
            }
            let node = Subproblem::node(i);
            let arrival = prefix.clock + sub.travel.time(prefix.at, node);
            // every check below only gets worse as the sequence grows, so a
            // failure prunes the whole subtree
            if arrival < sub.earliest[i] - TOLERANCE
                || !sub.latest[i].admits(arrival)
                || !vehicle.max_duration.admits(arrival)
            {
                continue;
            }
            let delivered_w = prefix.delivered_w + order.delivery_weight;
            let delivered_d = prefix.delivered_d + order.delivery_dim;
            let picked_w = prefix.picked_w + order.pickup_weight;
            let picked_d = prefix.picked_d + order.pickup_dim;
            let excess_w = prefix.excess_w.max(picked_w - delivered_w);
            let excess_d = prefix.excess_d.max(picked_d - delivered_d);
            if delivered_w + excess_w > vehicle.max_weight + TOLERANCE
                || delivered_d + excess_d > vehicle.max_dim + TOLERANCE
            {
                continue;
            }
            self.visited += 1;
            self.used[i] = true;
            self.seq.push(i);
            let dist = prefix.dist + sub.travel.dist(prefix.at, node);
            let duration = arrival + sub.travel.time(node, 0);
            if vehicle.max_duration.admits(duration) {
                let objective =
                    dist + sub.travel.dist(node, 0) - self.reward * self.seq.len() as f64;
                if objective < self.best_objective {
                    self.best_objective = objective;
                    self.best.clone_from(&self.seq);
                }
            }
            self.extend(Prefix {
                at: node,
                clock: arrival,
                dist,
                delivered_w,
                delivered_d,
                picked_w,
                picked_d,
                excess_w,
                excess_d,
            });
            self.seq.pop();
            self.used[i] = false;
        }
    }
}

/// Globally optimal route by depth-first enumeration of every ordered subset
/// of the reachable orders. Feasibility is computed directly from arrival
/// and load trajectories; the returned outcome is scored on the model.
/// Among equal objectives the first sequence in enumeration order wins.
pub fn solve_exact(
    model: &QuadraticModel,
    sub: &Subproblem,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    if model.num_orders != sub.len() {
        return Err(SolveError::Mismatch {
            model: model.num_orders,
            sub: sub.len(),
        });
    }
    let reachable = sub.reachable_count();
    if reachable > config.exact_cap {
        return Err(SolveError::TooLarge {
            size: reachable,
            cap: config.exact_cap,
        });
    }
    let start = Instant::now();
    let mut search = Search {
        sub,
        reward: model.serve_reward,
        seq: Vec::with_capacity(sub.len()),
        used: vec![false; sub.len()],
        best: Vec::new(),
        best_objective: 0.0,
        visited: 0,
        reachable,
    };
    search.extend(Prefix {
        at: 0,
        clock: 0.0,
        dist: 0.0,
        delivered_w: 0.0,
        delivered_d: 0.0,
        picked_w: 0.0,
        picked_d: 0.0,
        excess_w: 0.0,
        excess_d: 0.0,
    });
    let assignment = Assignment::from_sequence(sub.len(), &search.best);
    Ok(SolveOutcome::scored(
        model,
        assignment,
        search.visited,
        start.elapsed(),
        false,
    ))
}
