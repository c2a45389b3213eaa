//! File formats, demonstration fixtures and SVG rendering.

mod fixtures;
mod instance;
mod plan;
mod svg;

use thiserror::Error;

use crate::model::{InputError, InstanceViolation};

pub use fixtures::{generate_fixture, FIXTURE_NAMES};
pub use instance::{load_instance, save_instance, INSTANCE_VERSION};
pub use plan::{load_plan, save_plan, PLAN_VERSION};
pub use svg::render_svg;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported {kind} file version {found}, expected {expected}")]
    Version {
        kind: &'static str,
        found: String,
        expected: u32,
    },
    #[error("instance failed {} check(s): {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Check(Vec<InstanceViolation>),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("route {route}: {message}")]
    Route { route: String, message: String },
    #[error("unknown fixture {name:?}; valid names: {}", .valid.join(", "))]
    UnknownFixture {
        name: String,
        valid: &'static [&'static str],
    },
    #[error("instance {0} has no node coordinates to draw")]
    MissingCoords(String),
}

/// Parses JSON text, checks the `version` field, then deserializes with
/// error messages that carry the path of the offending field.
fn parse_versioned<T: serde::de::DeserializeOwned>(
    text: &str,
    kind: &'static str,
    expected: u32,
) -> Result<T, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        path: "$".into(),
        message: e.to_string(),
    })?;
    match value.get("version") {
        Some(v) if v.as_u64() == Some(u64::from(expected)) => {}
        found => {
            return Err(FormatError::Version {
                kind,
                found: found.map_or("(missing)".into(), ToString::to_string),
                expected,
            })
        }
    }
    serde_path_to_error::deserialize(value).map_err(|e| FormatError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}
