//! JSON document for handing a model to an external solver.
//!
//! ```json
//! {
//!   "format": "pdp-cqm",
//!   "version": 1,
//!   "meta": { "orders": 2, "serve_reward": 50.0 },
//!   "variables": ["x[0][0]", "x[0][1]", "x[1][0]", "x[1][1]"],
//!   "objective": { "linear": [["x[0][0]", -40.0]], "quadratic": [["x[0][0]", "x[1][1]", 3.0]] },
//!   "constraints": [
//!     { "label": "slot_unique[0]", "linear": [["x[0][0]", 1.0], ["x[1][0]", 1.0]],
//!       "quadratic": [], "sense": "<=", "rhs": 1.0 }
//!   ]
//! }
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Constraint, Expression, ModelError, QuadraticModel, Sense};

const FORMAT: &str = "pdp-cqm";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    meta: Meta,
    variables: Vec<String>,
    objective: Terms,
    constraints: Vec<ConstraintDoc>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    orders: usize,
    serve_reward: f64,
}

#[derive(Serialize, Deserialize)]
struct Terms {
    linear: Vec<(String, f64)>,
    quadratic: Vec<(String, String, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintDoc {
    label: String,
    linear: Vec<(String, f64)>,
    quadratic: Vec<(String, String, f64)>,
    sense: Sense,
    rhs: f64,
}

fn terms(model: &QuadraticModel, e: &Expression) -> Terms {
    let name = |v: usize| model.variables[v].clone();
    Terms {
        linear: e.linear.iter().map(|&(v, c)| (name(v), c)).collect(),
        quadratic: e
            .quadratic
            .iter()
            .map(|&(a, b, c)| (name(a), name(b), c))
            .collect(),
    }
}

/// Serializes deterministically: identical models give identical bytes.
pub fn model_to_json(model: &QuadraticModel) -> String {
    let doc = Document {
        format: FORMAT.into(),
        version: VERSION,
        meta: Meta {
            orders: model.num_orders,
            serve_reward: model.serve_reward,
        },
        variables: model.variables.clone(),
        objective: terms(model, &model.objective),
        constraints: model
            .constraints
            .iter()
            .map(|c| {
                let t = terms(model, &c.expr);
                ConstraintDoc {
                    label: c.label.clone(),
                    linear: t.linear,
                    quadratic: t.quadratic,
                    sense: c.sense,
                    rhs: c.rhs,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model document is always serializable")
}

pub fn model_from_json(text: &str) -> Result<QuadraticModel, ModelError> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    if doc.format != FORMAT || doc.version != VERSION {
        return Err(ModelError::Format(format!(
            "expected {FORMAT} v{VERSION}, found {} v{}",
            doc.format, doc.version
        )));
    }
    if doc.variables.len() != doc.meta.orders * doc.meta.orders {
        return Err(ModelError::Format(format!(
            "{} variables for {} orders",
            doc.variables.len(),
            doc.meta.orders
        )));
    }
    let index: HashMap<&str, usize> = doc
        .variables
        .iter()
        .enumerate()
        .map(|(k, v)| (v.as_str(), k))
        .collect();
    let lookup = |label: &str, ctx: &str| {
        index
            .get(label)
            .copied()
            .ok_or_else(|| ModelError::Format(format!("{ctx}: undeclared variable {label}")))
    };
    let expr = |lin: &[(String, f64)], quad: &[(String, String, f64)], ctx: &str| {
        Ok::<_, ModelError>(Expression {
            linear: lin
                .iter()
                .map(|(v, c)| Ok((lookup(v, ctx)?, *c)))
                .collect::<Result<_, ModelError>>()?,
            quadratic: quad
                .iter()
                .map(|(a, b, c)| Ok((lookup(a, ctx)?, lookup(b, ctx)?, *c)))
                .collect::<Result<_, ModelError>>()?,
        })
    };
    let objective = expr(&doc.objective.linear, &doc.objective.quadratic, "objective")?;
    let constraints = doc
        .constraints
        .iter()
        .map(|c| {
            Ok(Constraint {
                label: c.label.clone(),
                expr: expr(&c.linear, &c.quadratic, &c.label)?,
                sense: c.sense,
                rhs: c.rhs,
            })
        })
        .collect::<Result<_, ModelError>>()?;
    Ok(QuadraticModel {
        num_orders: doc.meta.orders,
        serve_reward: doc.meta.serve_reward,
        variables: doc.variables,
        objective,
        constraints,
    })
}
