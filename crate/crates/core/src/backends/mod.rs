//! Solvers for one route model.
//!
//! * [`solve_exact`] enumerates every ordered subset of the orders.
//! * [`solve_anneal`] runs penalty-method simulated annealing over stop
//!   sequences.
//! * [`solve_external_stub`] writes the model for an out-of-process solver
//!   and reports that no answer is available.

mod anneal;
mod exact;
mod external;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cqm::{Assignment, QuadraticModel, Subproblem};
use crate::model::TOLERANCE;

pub use anneal::{solve_anneal, SequenceEnergy};
pub use exact::solve_exact;
pub use external::{solve_external_stub, EXTERNAL_PATH_ENV};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("subproblem has {size} reachable orders, exact enumeration is capped at {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("model has {model} orders but subproblem has {sub}")]
    Mismatch { model: usize, sub: usize },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("no output path for the external solver (set {EXTERNAL_PATH_ENV} or the config path)")]
    NoExternalPath,
    #[error("writing model to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    Anneal,
    /// Exact when the reachable orders fit `auto_exact_max`, otherwise anneal.
    Auto,
    ExternalStub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub sweeps: usize,
    pub restarts: usize,
    /// Defaults to twice the serve reward of the model.
    pub initial_temperature: Option<f64>,
    pub final_temperature: f64,
    /// Defaults to the serve reward of the model.
    pub penalty_weight: Option<f64>,
    /// Multiplier applied to the penalty weight after every sweep.
    pub penalty_growth: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            sweeps: 1000,
            restarts: 8,
            initial_temperature: None,
            final_temperature: 1e-3,
            penalty_weight: None,
            penalty_growth: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Wall-clock budget per solve, in seconds.
    pub time_limit: f64,
    pub seed: u64,
    pub exact_cap: usize,
    pub auto_exact_max: usize,
    pub anneal: AnnealParams,
    pub external_path: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Auto,
            time_limit: 60.0,
            seed: 42,
            exact_cap: 10,
            auto_exact_max: 8,
            anneal: AnnealParams::default(),
            external_path: None,
        }
    }
}

impl SolverConfig {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::Config(msg.to_string()));
        let a = &self.anneal;
        if !(self.time_limit > 0.0) {
            return bad("time_limit must be positive");
        }
        if a.sweeps < 1 || a.restarts < 1 {
            return bad("sweeps and restarts must be at least 1");
        }
        if !(a.final_temperature > 0.0) {
            return bad("final temperature must be positive");
        }
        if let Some(t0) = a.initial_temperature {
            if !(t0 > a.final_temperature) {
                return bad("initial temperature must exceed the final temperature");
            }
        }
        if a.penalty_weight.is_some_and(|w| !(w > 0.0)) || !(a.penalty_growth >= 1.0) {
            return bad("penalty weight must be positive and growth at least 1");
        }
        Ok(())
    }

    pub fn time_budget(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeStatus {
    Solved,
    /// The backend did not produce an answer (external stub).
    NotAvailable,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub evaluations: u64,
    pub wall_time: Duration,
    pub timed_out: bool,
    /// Nonzero constraint violations at the returned assignment.
    pub violations: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: OutcomeStatus,
    pub assignment: Assignment,
    pub feasible: bool,
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

impl SolveOutcome {
    /// Scores `assignment` against `model`; feasibility is judged on the
    /// model's constraints, not on the backend's own bookkeeping.
    pub(crate) fn scored(
        model: &QuadraticModel,
        assignment: Assignment,
        evaluations: u64,
        wall_time: Duration,
        timed_out: bool,
    ) -> Self {
        let eval = model.evaluate(&assignment);
        let violations = model
            .constraints
            .iter()
            .zip(&eval.violations)
            .filter(|(_, v)| **v > TOLERANCE)
            .map(|(c, v)| (c.label.clone(), *v))
            .collect();
        SolveOutcome {
            status: OutcomeStatus::Solved,
            assignment,
            feasible: eval.feasible,
            objective: eval.objective,
            diagnostics: Diagnostics {
                evaluations,
                wall_time,
                timed_out,
                violations,
            },
        }
    }
}

/// Runs the configured backend.
pub fn solve(
    model: &QuadraticModel,
    sub: &Subproblem,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    config.validate()?;
    match config.backend {
        Backend::Exact => solve_exact(model, sub, config),
        Backend::Anneal => Ok(solve_anneal(model, config)),
        Backend::ExternalStub => solve_external_stub(model, config),
        Backend::Auto => {
            if sub.reachable_count() <= config.auto_exact_max {
                solve_exact(model, sub, config)
            } else {
                Ok(solve_anneal(model, config))
            }
        }
    }
}
