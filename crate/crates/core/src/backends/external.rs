use std::path::PathBuf;
use std::time::Duration;

use super::{Diagnostics, OutcomeStatus, SolveError, SolveOutcome, SolverConfig};
use crate::cqm::{model_to_json, Assignment, QuadraticModel};

pub const EXTERNAL_PATH_ENV: &str = "PDP_EXTERNAL_MODEL_PATH";

fn output_path(config: &SolverConfig) -> Result<PathBuf, SolveError> {
    if let Some(p) = &config.external_path {
        return Ok(p.clone());
    }
    match std::env::var_os(EXTERNAL_PATH_ENV) {
        Some(p) if !p.is_empty() => Ok(PathBuf::from(p)),
        _ => Err(SolveError::NoExternalPath),
    }
}

/// Writes the model document for an out-of-process solver and returns a
/// `NotAvailable` outcome holding the all-zero assignment.
pub fn solve_external_stub(
    model: &QuadraticModel,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    let path = output_path(config)?;
    std::fs::write(&path, model_to_json(model)).map_err(|source| SolveError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(SolveOutcome {
        status: OutcomeStatus::NotAvailable,
        assignment: Assignment::zeros(model.num_orders),
        feasible: false,
        objective: 0.0,
        diagnostics: Diagnostics {
            evaluations: 0,
            wall_time: Duration::ZERO,
            timed_out: false,
            violations: Vec::new(),
        },
    })
}
