use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{parse_versioned, FormatError};
use crate::model::{Plan, Route};
use crate::validator::ValidationReport;

pub const PLAN_VERSION: u32 = 1;

#[derive(Serialize)]
struct PlanFileOut<'a> {
    version: u32,
    plan: &'a Plan,
    report: &'a ValidationReport,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFileIn {
    #[allow(dead_code)]
    version: u32,
    plan: PlanIn,
    report: ValidationReport,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanIn {
    instance: String,
    /// Kept raw so a broken route can be reported by its id.
    routes: Vec<Value>,
    unserved: Vec<String>,
    total_distance: f64,
    total_duration: f64,
}

pub fn save_plan(plan: &Plan, report: &ValidationReport) -> String {
    let doc = PlanFileOut {
        version: PLAN_VERSION,
        plan,
        report,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plan file is always serializable");
    text.push('\n');
    text
}

fn parse_route(k: usize, raw: Value) -> Result<Route, FormatError> {
    let name = raw
        .get("id")
        .and_then(Value::as_str)
        .map_or_else(|| format!("#{k}"), str::to_string);
    let route: Route = serde_path_to_error::deserialize(raw).map_err(|e| FormatError::Route {
        route: name.clone(),
        message: format!("{}: {}", e.path(), e.inner()),
    })?;
    let n = route.sequence.len();
    if route.arrivals.len() != n || route.loads.len() != n {
        return Err(FormatError::Route {
            route: name,
            message: format!(
                "{n} stops but {} arrivals and {} loads",
                route.arrivals.len(),
                route.loads.len()
            ),
        });
    }
    Ok(route)
}

pub fn load_plan(text: &str) -> Result<(Plan, ValidationReport), FormatError> {
    let file: PlanFileIn = parse_versioned(text, "plan", PLAN_VERSION)?;
    let routes = file
        .plan
        .routes
        .into_iter()
        .enumerate()
        .map(|(k, raw)| parse_route(k, raw))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = Plan {
        instance: file.plan.instance,
        routes,
        unserved: file.plan.unserved,
        total_distance: file.plan.total_distance,
        total_duration: file.plan.total_duration,
    };
    Ok((plan, file.report))
}
