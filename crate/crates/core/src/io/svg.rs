use std::collections::HashMap;
use std::fmt::Write;

use super::FormatError;
use crate::model::{Instance, Limit, Plan};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;
const ROUTE_COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const ZONE_COLORS: &[&str] = &["#fdd835", "#90caf9", "#a5d6a7", "#ef9a9a"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Draws the depot (square), every order (circle filled by zone, outlined
/// when windowed) and one polyline per route from the depot through its
/// stops and back.
pub fn render_svg(instance: &Instance, plan: &Plan) -> Result<String, FormatError> {
    let coords = instance
        .coords
        .as_ref()
        .filter(|c| c.len() == instance.travel.size() && !c.is_empty())
        .ok_or_else(|| FormatError::MissingCoords(instance.name.clone()))?;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in coords {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = (y1 - y0) * scale + 2.0 * MARGIN;
    let px = |node: usize| {
        let (x, y) = coords[node];
        (
            MARGIN + (x - x0) * scale,
            height - MARGIN - (y - y0) * scale,
        )
    };

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    )
    .unwrap();
    writeln!(w, "<title>{}</title>", escape(&instance.name)).unwrap();
    writeln!(w, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();

    let node_of: HashMap<&str, usize> = instance
        .orders
        .iter()
        .map(|o| (o.id.as_str(), o.node))
        .collect();
    for (k, route) in plan.routes.iter().enumerate() {
        let mut points = vec![px(0)];
        for id in &route.sequence {
            let node = node_of.get(id.as_str()).ok_or_else(|| FormatError::Route {
                route: route.id.clone(),
                message: format!("unknown order {id}"),
            })?;
            points.push(px(*node));
        }
        points.push(px(0));
        let list: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        writeln!(
            w,
            r#"<polyline class="route" points="{}" fill="none" stroke="{}" stroke-width="2"><title>{} ({})</title></polyline>"#,
            list.join(" "),
            ROUTE_COLORS[k % ROUTE_COLORS.len()],
            escape(&route.id),
            escape(&route.vehicle)
        )
        .unwrap();
    }

    for o in &instance.orders {
        let (x, y) = px(o.node);
        let fill = ZONE_COLORS[(o.zone.max(1) as usize - 1) % ZONE_COLORS.len()];
        let stroke = if o.has_window() {
            r##" stroke="#000000" stroke-width="2""##
        } else {
            ""
        };
        writeln!(
            w,
            r#"<circle class="order" cx="{x:.2}" cy="{y:.2}" r="6" fill="{fill}"{stroke}/>"#
        )
        .unwrap();
        let mut label = escape(&o.id);
        if o.has_window() {
            let ut = match o.latest {
                Limit::Finite(u) => format!("{u}"),
                Limit::Unbounded => "inf".into(),
            };
            write!(label, " [{}, {ut}]", o.earliest).unwrap();
        }
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{label}</text>"#,
            x + 8.0,
            y - 8.0
        )
        .unwrap();
    }
    let (dx, dy) = px(0);
    writeln!(
        w,
        r##"<rect class="depot" x="{:.2}" y="{:.2}" width="14" height="14" fill="#000000"><title>depot</title></rect>"##,
        dx - 7.0,
        dy - 7.0
    )
    .unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(out)
}
