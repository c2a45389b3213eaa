use serde::{Deserialize, Serialize};

use super::{parse_versioned, FormatError};
use crate::model::{
    check_instance, travel_matrix_from_coords, Instance, Limit, Order, Ownership, TravelMatrix,
    VehicleSpec,
};

pub const INSTANCE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depot: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    orders: Vec<OrderEntry>,
    fleet: Vec<VehicleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderEntry {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<[f64; 2]>,
    #[serde(default)]
    wd: f64,
    #[serde(default)]
    dd: f64,
    #[serde(default)]
    wp: f64,
    #[serde(default)]
    dp: f64,
    #[serde(default)]
    lt: f64,
    #[serde(default)]
    ut: Limit,
    #[serde(default = "one")]
    ot: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleEntry {
    id: String,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(default = "one")]
    vt: u32,
    #[serde(default)]
    rt: Limit,
    #[serde(default = "owned")]
    ownership: Ownership,
    #[serde(default = "one")]
    max_uses: u32,
}

fn one() -> u32 {
    1
}

fn owned() -> Ownership {
    Ownership::Owned
}

fn parse_error(path: String, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path,
        message: message.into(),
    }
}

/// Parses an instance file. Order `k` (0-based, file order) becomes node
/// `k + 1`; the depot is node 0. Explicit `time`/`dist` matrices take
/// precedence over coordinates; when only one matrix is given it serves as
/// both. Without matrices, Euclidean distances over the coordinates are used
/// and times are distances divided by `speed` (default 1).
pub fn load_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = parse_versioned(text, "instance", INSTANCE_VERSION)?;

    let coords: Option<Vec<(f64, f64)>> = file.depot.and_then(|d| {
        std::iter::once(Some(d))
            .chain(file.orders.iter().map(|o| o.coords))
            .map(|c| c.map(|[x, y]| (x, y)))
            .collect()
    });

    let travel = match (file.time, file.dist) {
        (Some(t), Some(d)) => TravelMatrix::from_rows(t, d)?,
        (Some(m), None) | (None, Some(m)) => TravelMatrix::from_rows(m.clone(), m)?,
        (None, None) => {
            if file.depot.is_none() {
                return Err(parse_error(
                    "depot".into(),
                    "required when no travel matrix is given",
                ));
            }
            if let Some(k) = file.orders.iter().position(|o| o.coords.is_none()) {
                return Err(parse_error(
                    format!("orders[{k}].coords"),
                    format!(
                        "order {} needs coordinates when no travel matrix is given",
                        file.orders[k].id
                    ),
                ));
            }
            let points = coords
                .as_deref()
                .expect("depot and every order have coordinates");
            travel_matrix_from_coords(points, file.speed.unwrap_or(1.0))?
        }
    };

    let orders = file
        .orders
        .into_iter()
        .enumerate()
        .map(|(k, o)| Order {
            id: o.id,
            node: k + 1,
            delivery_weight: o.wd,
            delivery_dim: o.dd,
            pickup_weight: o.wp,
            pickup_dim: o.dp,
            earliest: o.lt,
            latest: o.ut,
            zone: o.ot,
        })
        .collect();
    let fleet = file
        .fleet
        .into_iter()
        .map(|v| VehicleSpec {
            id: v.id,
            max_weight: v.w,
            max_dim: v.d,
            vehicle_type: v.vt,
            max_duration: v.rt,
            ownership: v.ownership,
            max_uses: v.max_uses,
        })
        .collect();
    let instance = Instance {
        name: file.name,
        orders,
        fleet,
        travel,
        coords,
    };
    let problems = check_instance(&instance);
    if !problems.is_empty() {
        return Err(FormatError::Check(problems));
    }
    Ok(instance)
}

/// Writes an instance with explicit matrices (and coordinates when known),
/// so loading the result reproduces it exactly.
pub fn save_instance(instance: &Instance) -> String {
    let mut by_node: Vec<&Order> = instance.orders.iter().collect();
    by_node.sort_by_key(|o| o.node);
    // files number nodes by order position; remap if the instance does not
    let nodes: Vec<usize> = std::iter::once(0)
        .chain(by_node.iter().map(|o| o.node))
        .collect();
    let travel = if nodes.iter().enumerate().all(|(k, &n)| k == n)
        && nodes.len() == instance.travel.size()
    {
        instance.travel.clone()
    } else {
        instance
            .travel
            .restrict(&nodes)
            .expect("instance nodes are in range")
    };
    let coord = |node: usize| {
        instance
            .coords
            .as_ref()
            .and_then(|c| c.get(node))
            .map(|&(x, y)| [x, y])
    };
    let file = InstanceFile {
        version: INSTANCE_VERSION,
        name: instance.name.clone(),
        depot: coord(0),
        speed: None,
        orders: by_node
            .iter()
            .map(|o| OrderEntry {
                id: o.id.clone(),
                coords: coord(o.node),
                wd: o.delivery_weight,
                dd: o.delivery_dim,
                wp: o.pickup_weight,
                dp: o.pickup_dim,
                lt: o.earliest,
                ut: o.latest,
                ot: o.zone,
            })
            .collect(),
        fleet: instance
            .fleet
            .iter()
            .map(|v| VehicleEntry {
                id: v.id.clone(),
                w: v.max_weight,
                d: v.max_dim,
                vt: v.vehicle_type,
                rt: v.max_duration,
                ownership: v.ownership,
                max_uses: v.max_uses,
            })
            .collect(),
        time: Some(travel.time_rows()),
        dist: Some(travel.dist_rows()),
    };
    let mut text =
        serde_json::to_string_pretty(&file).expect("instance file is always serializable");
    text.push('\n');
    text
}
