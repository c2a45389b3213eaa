use std::fmt;

use super::{Assignment, Subproblem};
use crate::model::{Order, Route};
use crate::validator::trace_route;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralViolation {
    WrongSize { expected: usize, found: usize },
    SlotMultiplyOccupied { slot: usize },
    OrderRepeated { order: usize },
    Gap { slot: usize },
}

impl fmt::Display for StructuralViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongSize { expected, found } => {
                write!(f, "assignment covers {found} orders, model has {expected}")
            }
            Self::SlotMultiplyOccupied { slot } => write!(f, "slot {slot} multiply occupied"),
            Self::OrderRepeated { order } => write!(f, "order {order} placed more than once"),
            Self::Gap { slot } => write!(f, "slot {slot} empty before an occupied slot"),
        }
    }
}

impl std::error::Error for StructuralViolation {}

/// Reads the slot-ordered sequence of subproblem order indices.
pub fn decode_sequence(
    assignment: &Assignment,
    num_orders: usize,
) -> Result<Vec<usize>, StructuralViolation> {
    if assignment.num_orders() != num_orders {
        return Err(StructuralViolation::WrongSize {
            expected: num_orders,
            found: assignment.num_orders(),
        });
    }
    let m = num_orders;
    let mut slots: Vec<Option<usize>> = vec![None; m];
    for p in 0..m {
        for i in 0..m {
            if assignment.get(i, p) {
                if slots[p].is_some() {
                    return Err(StructuralViolation::SlotMultiplyOccupied { slot: p });
                }
                slots[p] = Some(i);
            }
        }
    }
    let mut placed = vec![false; m];
    for &i in slots.iter().flatten() {
        if std::mem::replace(&mut placed[i], true) {
            return Err(StructuralViolation::OrderRepeated { order: i });
        }
    }
    if let Some(p) =
        (0..m.saturating_sub(1)).find(|&p| slots[p].is_none() && slots[p + 1].is_some())
    {
        return Err(StructuralViolation::Gap { slot: p });
    }
    Ok(slots.into_iter().flatten().collect())
}

/// Turns a structurally valid assignment into a route with derived arrival
/// and load trajectories. The route id defaults to the vehicle id.
pub fn decode(assignment: &Assignment, sub: &Subproblem) -> Result<Route, StructuralViolation> {
    let seq = decode_sequence(assignment, sub.len())?;
    let orders: Vec<&Order> = seq.iter().map(|&i| &sub.orders[i]).collect();
    let nodes: Vec<usize> = seq.iter().map(|&i| Subproblem::node(i)).collect();
    let route = trace_route(&sub.vehicle.id, &sub.vehicle, &orders, &nodes, &sub.travel)
        .expect("subproblem nodes are in range by construction");
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqm::{build_route_model, MobilityHandling, ObjectiveWeights};
    use crate::model::{travel_matrix_from_coords, VehicleSpec};

    fn sub(n: usize) -> Subproblem {
        let coords: Vec<_> = (0..=n).map(|k| (k as f64, 1.0)).collect();
        let travel = travel_matrix_from_coords(&coords, 1.0).unwrap();
        let orders = (0..n)
            .map(|k| Order::new(format!("order{}", k + 1), k + 1).with_delivery(1.0, 1.0))
            .collect();
        Subproblem::new(
            orders,
            VehicleSpec::new("t", 10.0, 10.0),
            &travel,
            MobilityHandling::Filtered,
        )
        .unwrap()
    }

    #[test]
    fn all_zero_is_empty_route() {
        let s = sub(3);
        let r = decode(&Assignment::zeros(3), &s).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.duration, 0.0);
    }

    #[test]
    fn direct_readout() {
        let s = sub(2);
        let mut a = Assignment::zeros(2);
        a.set(1, 0, true);
        a.set(0, 1, true);
        let r = decode(&a, &s).unwrap();
        assert_eq!(r.sequence, vec!["order2", "order1"]);
    }

    #[test]
    fn double_slot_reported() {
        let mut a = Assignment::zeros(2);
        a.set(0, 0, true);
        a.set(1, 0, true);
        let err = decode_sequence(&a, 2).unwrap_err();
        assert_eq!(err.to_string(), "slot 0 multiply occupied");
    }

    #[test]
    fn repeats_and_gaps() {
        let mut a = Assignment::zeros(3);
        a.set(0, 0, true);
        a.set(0, 1, true);
        assert_eq!(
            decode_sequence(&a, 3),
            Err(StructuralViolation::OrderRepeated { order: 0 })
        );
        let a = Assignment::from_bits(3, {
            let mut b = vec![false; 9];
            b[2] = true; // x[0][2]
            b
        });
        assert_eq!(
            decode_sequence(&a, 3),
            Err(StructuralViolation::Gap { slot: 1 })
        );
        assert!(matches!(
            decode_sequence(&a, 2),
            Err(StructuralViolation::WrongSize { .. })
        ));
    }

    #[test]
    fn decode_succeeds_iff_structure_holds_exhaustive() {
        for m in 1..=3usize {
            let s = sub(m);
            let model = build_route_model(&s, ObjectiveWeights::for_travel(&s.travel)).unwrap();
            let structural: Vec<usize> = model
                .constraints
                .iter()
                .enumerate()
                .filter(|(_, c)| {
                    ["slot_unique", "order_once", "contig"]
                        .iter()
                        .any(|p| c.label.starts_with(p))
                })
                .map(|(k, _)| k)
                .collect();
            let n = m * m;
            for mask in 0u32..(1 << n) {
                let bits = (0..n).map(|v| mask >> v & 1 == 1).collect();
                let a = Assignment::from_bits(m, bits);
                let holds = structural
                    .iter()
                    .all(|&k| model.constraints[k].violation(&a) <= 1e-9);
                assert_eq!(decode(&a, &s).is_ok(), holds, "m={m} mask={mask:b}");
            }
        }
    }
}
