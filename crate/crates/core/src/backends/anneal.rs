//! Penalty-method simulated annealing in sequence space.
//!
//! The state is an ordered list of served orders, so the slot structure of
//! the model holds by construction. Every other constraint enters the energy
//! as `weight * max(0, violation)^2` on top of the model objective.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SolveOutcome, SolverConfig};
use crate::cqm::{Assignment, QuadraticModel, Sense};
use crate::model::TOLERANCE;

/// Model compiled for fast evaluation of sparse assignments that place a
/// sequence of orders in consecutive slots.
#[derive(Debug, Clone)]
pub struct SequenceEnergy {
    m: usize,
    objective_linear: Vec<f64>,
    linear: Vec<Vec<(u32, f64)>>,
    /// Per variable `a`: `(b, pair)` for every quadratic pair `(a, b)`, `a < b`.
    partners: Vec<Vec<(u32, u32)>>,
    pair_objective: Vec<f64>,
    pair_terms: Vec<Vec<(u32, f64)>>,
    senses: Vec<Sense>,
    rhs: Vec<f64>,
    lhs: Vec<f64>,
    active: Vec<u32>,
    mask: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub objective: f64,
    /// Sum of squared violations, unweighted.
    pub penalty: f64,
    pub feasible: bool,
}

impl SequenceEnergy {
    pub fn new(model: &QuadraticModel) -> Self {
        let n = model.num_variables();
        let mut objective_linear = vec![0.0; n];
        let mut linear = vec![Vec::new(); n];
        let mut partners: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut pair_objective = Vec::new();
        let mut pair_terms: Vec<Vec<(u32, f64)>> = Vec::new();
        let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pair = |a: usize, b: usize, partners: &mut Vec<Vec<(u32, u32)>>| {
            let (a, b) = (a.min(b), a.max(b));
            *pair_index.entry((a, b)).or_insert_with(|| {
                let k = pair_objective.len();
                pair_objective.push(0.0);
                pair_terms.push(Vec::new());
                partners[a].push((b as u32, k as u32));
                k
            })
        };
        let mut pairs_of_objective = Vec::new();
        for &(v, c) in &model.objective.linear {
            objective_linear[v] += c;
        }
        for &(a, b, c) in &model.objective.quadratic {
            pairs_of_objective.push((pair(a, b, &mut partners), c));
        }
        let mut constraint_pairs = Vec::new();
        for (k, con) in model.constraints.iter().enumerate() {
            for &(v, c) in &con.expr.linear {
                linear[v].push((k as u32, c));
            }
            for &(a, b, c) in &con.expr.quadratic {
                constraint_pairs.push((pair(a, b, &mut partners), k as u32, c));
            }
        }
        for (p, c) in pairs_of_objective {
            pair_objective[p] += c;
        }
        for (p, k, c) in constraint_pairs {
            pair_terms[p].push((k, c));
        }
        SequenceEnergy {
            m: model.num_orders,
            objective_linear,
            linear,
            partners,
            pair_objective,
            pair_terms,
            senses: model.constraints.iter().map(|c| c.sense).collect(),
            rhs: model.constraints.iter().map(|c| c.rhs).collect(),
            lhs: vec![0.0; model.constraints.len()],
            active: Vec::with_capacity(model.num_orders),
            mask: vec![false; n],
        }
    }

    /// Objective and squared-violation penalty of the assignment placing
    /// `sequence[p]` at slot `p`.
    pub fn evaluate(&mut self, sequence: &[usize]) -> EnergyTerms {
        self.active.clear();
        for (p, &i) in sequence.iter().enumerate() {
            let v = (i * self.m + p) as u32;
            self.active.push(v);
            self.mask[v as usize] = true;
        }
        self.lhs.fill(0.0);
        let mut objective = 0.0;
        for &a in &self.active {
            let a = a as usize;
            objective += self.objective_linear[a];
            for &(k, c) in &self.linear[a] {
                self.lhs[k as usize] += c;
            }
            for &(b, pair) in &self.partners[a] {
                if self.mask[b as usize] {
                    let pair = pair as usize;
                    objective += self.pair_objective[pair];
                    for &(k, c) in &self.pair_terms[pair] {
                        self.lhs[k as usize] += c;
                    }
                }
            }
        }
        for &a in &self.active {
            self.mask[a as usize] = false;
        }
        let mut penalty = 0.0;
        let mut feasible = true;
        for ((&lhs, &rhs), sense) in self.lhs.iter().zip(&self.rhs).zip(&self.senses) {
            let v = match sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
                Sense::Eq => (lhs - rhs).abs(),
            };
            if v > TOLERANCE {
                feasible = false;
                penalty += v * v;
            }
        }
        EnergyTerms {
            objective,
            penalty,
            feasible,
        }
    }
}

#[derive(Debug, Clone)]
struct RestartResult {
    best_feasible: Option<(f64, Vec<usize>)>,
    best_energy: (f64, Vec<usize>),
    evaluations: u64,
    timed_out: bool,
    /// Best feasible objective after every sweep.
    #[cfg_attr(not(test), allow(dead_code))]
    history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Insert,
    Remove,
    Swap,
    Relocate,
}

fn propose(rng: &mut ChaCha8Rng, current: &[usize], served: &[bool], out: &mut Vec<usize>) {
    out.clear();
    out.extend_from_slice(current);
    let len = current.len();
    let unserved = served.iter().filter(|s| !**s).count();
    let mut moves = [Move::Insert; 4];
    let mut count = 0;
    if unserved > 0 {
        moves[count] = Move::Insert;
        count += 1;
    }
    if len > 0 {
        moves[count] = Move::Remove;
        count += 1;
    }
    if len > 1 {
        moves[count] = Move::Swap;
        moves[count + 1] = Move::Relocate;
        count += 2;
    }
    match moves[rng.gen_range(0..count)] {
        Move::Insert => {
            let nth = rng.gen_range(0..unserved);
            let order = served
                .iter()
                .enumerate()
                .filter(|(_, s)| !**s)
                .nth(nth)
                .map(|(i, _)| i)
                .expect("nth < unserved");
            out.insert(rng.gen_range(0..=len), order);
        }
        Move::Remove => {
            out.remove(rng.gen_range(0..len));
        }
        Move::Swap => {
            let a = rng.gen_range(0..len);
            let b = (a + rng.gen_range(1..len)) % len;
            out.swap(a, b);
        }
        Move::Relocate => {
            let order = out.remove(rng.gen_range(0..len));
            out.insert(rng.gen_range(0..len), order);
        }
    }
}

struct Schedule {
    sweeps: usize,
    moves_per_sweep: usize,
    t_initial: f64,
    t_final: f64,
    penalty: f64,
    growth: f64,
}

impl Schedule {
    fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_initial;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

fn run_restart(
    mut energy: SequenceEnergy,
    schedule: &Schedule,
    seed: u64,
    restart: usize,
    start: Instant,
    budget: Duration,
) -> RestartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let m = energy.m;
    let mut current: Vec<usize> = Vec::with_capacity(m);
    let mut served = vec![false; m];
    let mut candidate = Vec::with_capacity(m);
    let mut weight = schedule.penalty;

    let terms = energy.evaluate(&current);
    let mut current_terms = terms;
    let mut best_feasible = terms.feasible.then(|| (terms.objective, current.clone()));
    let mut best_energy = (terms.objective + weight * terms.penalty, current.clone());
    let mut evaluations = 1u64;
    let mut timed_out = false;
    let mut history = Vec::with_capacity(schedule.sweeps);

    for sweep in 0..schedule.sweeps {
        if start.elapsed() >= budget {
            timed_out = true;
            break;
        }
        let temperature = schedule.temperature(sweep);
        for _ in 0..schedule.moves_per_sweep {
            propose(&mut rng, &current, &served, &mut candidate);
            let terms = energy.evaluate(&candidate);
            evaluations += 1;
            let e_new = terms.objective + weight * terms.penalty;
            let e_old = current_terms.objective + weight * current_terms.penalty;
            let delta = e_new - e_old;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                std::mem::swap(&mut current, &mut candidate);
                served.iter_mut().for_each(|s| *s = false);
                for &i in &current {
                    served[i] = true;
                }
                current_terms = terms;
                if terms.feasible
                    && best_feasible
                        .as_ref()
                        .is_none_or(|(b, _)| terms.objective < *b)
                {
                    best_feasible = Some((terms.objective, current.clone()));
                }
                if e_new < best_energy.0 {
                    best_energy = (e_new, current.clone());
                }
            }
        }
        history.push(best_feasible.as_ref().map_or(f64::INFINITY, |b| b.0));
        weight *= schedule.growth;
    }
    RestartResult {
        best_feasible,
        best_energy,
        evaluations,
        timed_out,
        history,
    }
}

/// Multi-restart annealing. Restart `r` draws from ChaCha stream `r` of the
/// configured seed, so the result depends only on the seed unless the time
/// budget cuts a run short. Returns the best feasible sequence found (ties go
/// to the lowest restart index), or the lowest-energy one if none was
/// feasible.
pub fn solve_anneal(model: &QuadraticModel, config: &SolverConfig) -> SolveOutcome {
    let start = Instant::now();
    let params = &config.anneal;
    let reward = model.serve_reward.abs().max(f64::MIN_POSITIVE);
    let t_initial = params.initial_temperature.unwrap_or(2.0 * reward);
    let schedule = Schedule {
        sweeps: params.sweeps,
        moves_per_sweep: model.num_orders.max(1),
        t_initial,
        t_final: params.final_temperature.min(t_initial),
        penalty: params.penalty_weight.unwrap_or(reward),
        growth: params.penalty_growth,
    };
    let energy = SequenceEnergy::new(model);
    let budget = config.time_budget();
    let results: Vec<RestartResult> = (0..params.restarts)
        .into_par_iter()
        .map(|r| run_restart(energy.clone(), &schedule, config.seed, r, start, budget))
        .collect();

    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let timed_out = results.iter().any(|r| r.timed_out);
    let best = results
        .iter()
        .filter_map(|r| r.best_feasible.as_ref())
        .fold(None::<&(f64, Vec<usize>)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
        .or_else(|| {
            results
                .iter()
                .map(|r| &r.best_energy)
                .fold(None::<&(f64, Vec<usize>)>, |acc, cand| match acc {
                    Some(a) if a.0 <= cand.0 => Some(a),
                    _ => Some(cand),
                })
        })
        .map(|b| b.1.clone())
        .unwrap_or_default();
    let assignment = Assignment::from_sequence(model.num_orders, &best);
    SolveOutcome::scored(model, assignment, evaluations, start.elapsed(), timed_out)
}
