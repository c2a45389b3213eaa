//! Seeded demonstration instances.
//!
//! All fixtures put the depot at (50, 50) on a 100 x 100 plane, use
//! Euclidean distances and unit speed, and round coordinates to one decimal.
//! Loads are `(weight, dim)` pairs with equal components unless noted.
//!
//! | name      | orders | fleet                                              | loads |
//! |-----------|--------|----------------------------------------------------|-------|
//! | `PD12`    | 11     | one truck W=D=110                                  | deliveries of 10 |
//! | `PD12_B`  | 11     | as `PD12`                                          | 3 red (5 out, 15 back), 3 green (15 out, 5 back), 5 plain (10, 10) |
//! | `PD15`    | 14     | two trucks W=D=70                                  | deliveries of 10 |
//! | `PD15_B`  | 14     | as `PD15`                                          | 2 red, 2 green, 10 plain |
//! | `PD10_TW` | 9      | one truck W=D=110                                  | 10 out, 10 back |
//! | `PD17_TW` | 16     | two trucks W=D=70                                  | 8 out, 8 back |
//! | `PD17_MR` | 16     | owned vt=2 truck and rentable vt=1 truck, W=D=70   | 7 out, 7 back |
//! | `RW1_O19` | 18     | vt=2 truck W=D=100, vt=1 truck W=D=80              | mixed |
//! | `RW2_O24` | 23     | vt=2 truck W=D=200, vt=1 truck W=D=90              | mixed |
//!
//! Time windows are cut around the arrival times of a reference tour (nearest
//! neighbour from the depot), so every windowed fixture has a feasible plan:
//!
//! * `PD10_TW` cycles four categories along the tour: purple (no window),
//!   yellow (`ut` = arrival + 15), green (`lt` = arrival - 15) and blue (both).
//! * `PD17_TW` has a morning cluster near the depot with `ut` = arrival + 20
//!   on the cluster's own tour, and an afternoon cluster farther out whose
//!   `lt` is the direct travel time from the depot.
//! * `PD17_MR` places its six `ot=1` orders in a pocket in the north-west;
//!   the other ten are `ot=2`.
//! * `RW1_O19` has 11 `ot=2` and 7 `ot=1` orders; every sixth stop of each
//!   reference tour is unwindowed, the rest get `[arrival - 8, arrival + 12]`.
//! * `RW2_O24` has 15 `ot=2` and 8 `ot=1` orders; every fourth stop gets
//!   `[arrival - 25, arrival + 30]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FormatError;
use crate::model::{travel_matrix_from_coords, Instance, Limit, Order, Ownership, VehicleSpec};

pub const FIXTURE_NAMES: &[&str] = &[
    "PD12", "PD12_B", "PD15", "PD15_B", "PD10_TW", "PD17_TW", "PD17_MR", "RW1_O19", "RW2_O24",
];

const DEPOT: (f64, f64) = (50.0, 50.0);

pub fn generate_fixture(name: &str) -> Result<Instance, FormatError> {
    let draft = match name {
        "PD12" => pd12(false),
        "PD12_B" => pd12(true),
        "PD15" => pd15(false),
        "PD15_B" => pd15(true),
        "PD10_TW" => pd10_tw(),
        "PD17_TW" => pd17_tw(),
        "PD17_MR" => pd17_mr(),
        "RW1_O19" => rw1_o19(),
        "RW2_O24" => rw2_o24(),
        _ => {
            return Err(FormatError::UnknownFixture {
                name: name.to_string(),
                valid: FIXTURE_NAMES,
            })
        }
    };
    Ok(draft.finish(name))
}

struct Draft {
    coords: Vec<(f64, f64)>,
    orders: Vec<Order>,
    fleet: Vec<VehicleSpec>,
}

impl Draft {
    fn new(fleet: Vec<VehicleSpec>) -> Self {
        Draft {
            coords: vec![DEPOT],
            orders: Vec::new(),
            fleet,
        }
    }

    fn add(&mut self, id: String, at: (f64, f64), out: (f64, f64), back: (f64, f64)) -> usize {
        let node = self.coords.len();
        self.coords.push(at);
        self.orders.push(
            Order::new(id, node)
                .with_delivery(out.0, out.1)
                .with_pickup(back.0, back.1),
        );
        node - 1
    }

    fn finish(self, name: &str) -> Instance {
        let travel =
            travel_matrix_from_coords(&self.coords, 1.0).expect("fixture coordinates are finite");
        Instance {
            name: name.to_string(),
            orders: self.orders,
            fleet: self.fleet,
            travel,
            coords: Some(self.coords),
        }
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.coords[a], self.coords[b]);
        (p.0 - q.0).hypot(p.1 - q.1)
    }

    /// Nearest-neighbour tour from the depot over the given orders, with the
    /// arrival time at each.
    fn reference_tour(&self, orders: &[usize]) -> Vec<(usize, f64)> {
        let mut left: Vec<usize> = orders.to_vec();
        let mut at = 0;
        let mut clock = 0.0;
        let mut tour = Vec::with_capacity(left.len());
        while !left.is_empty() {
            let (k, _) = left
                .iter()
                .enumerate()
                .map(|(k, &o)| (k, self.dist(at, o + 1)))
                .fold(
                    (0, f64::INFINITY),
                    |best, cur| if cur.1 < best.1 { cur } else { best },
                );
            let o = left.remove(k);
            clock += self.dist(at, o + 1);
            at = o + 1;
            tour.push((o, clock));
        }
        tour
    }

    fn window(&mut self, order: usize, lt: f64, ut: Limit) {
        let o = &mut self.orders[order];
        o.earliest = down(lt.max(0.0));
        o.latest = match ut {
            Limit::Finite(u) => Limit::Finite(up(u)),
            Limit::Unbounded => Limit::Unbounded,
        };
    }
}

fn down(x: f64) -> f64 {
    (x * 10.0).floor() / 10.0
}

fn up(x: f64) -> f64 {
    (x * 10.0).ceil() / 10.0
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn point(rng: &mut ChaCha8Rng, center: (f64, f64), half: f64) -> (f64, f64) {
    (
        round1(rng.gen_range(center.0 - half..center.0 + half)),
        round1(rng.gen_range(center.1 - half..center.1 + half)),
    )
}

fn truck(id: &str, cap: f64) -> VehicleSpec {
    VehicleSpec::new(id, cap, cap)
}

fn same(x: f64) -> (f64, f64) {
    (x, x)
}

fn pd12(pickups: bool) -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut d = Draft::new(vec![truck("truck1", 110.0)]);
    for k in 0..11 {
        let at = point(&mut rng, DEPOT, 45.0);
        let (out, back) = match (pickups, k) {
            (false, _) => (10.0, 0.0),
            (true, 0..=2) => (5.0, 15.0),
            (true, 3..=5) => (15.0, 5.0),
            (true, _) => (10.0, 10.0),
        };
        d.add(format!("n{}", k + 1), at, same(out), same(back));
    }
    d
}

fn pd15(pickups: bool) -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut d = Draft::new(vec![truck("truck1", 70.0), truck("truck2", 70.0)]);
    for k in 0..14 {
        let at = point(&mut rng, DEPOT, 45.0);
        let (out, back) = match (pickups, k) {
            (false, _) => (10.0, 0.0),
            (true, 0..=1) => (5.0, 15.0),
            (true, 2..=3) => (15.0, 5.0),
            (true, _) => (10.0, 10.0),
        };
        d.add(format!("n{}", k + 1), at, same(out), same(back));
    }
    d
}

fn pd10_tw() -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut d = Draft::new(vec![truck("truck1", 110.0)]);
    let all: Vec<usize> = (0..9)
        .map(|k| {
            d.add(
                format!("n{}", k + 1),
                point(&mut rng, DEPOT, 45.0),
                same(10.0),
                same(10.0),
            )
        })
        .collect();
    for (pos, (o, arr)) in d.reference_tour(&all).into_iter().enumerate() {
        match pos % 4 {
            1 => d.window(o, 0.0, Limit::Finite(arr + 15.0)),
            2 => d.window(o, arr - 15.0, Limit::Unbounded),
            3 => d.window(o, arr - 15.0, Limit::Finite(arr + 15.0)),
            _ => {}
        }
    }
    d
}

fn pd17_tw() -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut d = Draft::new(vec![truck("truck1", 70.0), truck("truck2", 70.0)]);
    let morning: Vec<usize> = (0..8)
        .map(|k| {
            d.add(
                format!("am{}", k + 1),
                point(&mut rng, (35.0, 38.0), 15.0),
                same(8.0),
                same(8.0),
            )
        })
        .collect();
    let afternoon: Vec<usize> = (0..8)
        .map(|k| {
            d.add(
                format!("pm{}", k + 1),
                point(&mut rng, (76.0, 74.0), 12.0),
                same(8.0),
                same(8.0),
            )
        })
        .collect();
    for (o, arr) in d.reference_tour(&morning) {
        d.window(o, 0.0, Limit::Finite(arr + 20.0));
    }
    for o in afternoon {
        let direct = d.dist(0, o + 1);
        d.window(o, direct, Limit::Unbounded);
    }
    d
}

fn pd17_mr() -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    let mut d = Draft::new(vec![
        truck("truck1", 70.0).with_type(2),
        truck("rental1", 70.0).with_ownership(Ownership::Rentable),
    ]);
    for k in 0..6 {
        let o = d.add(
            format!("r{}", k + 1),
            point(&mut rng, (20.0, 80.0), 10.0),
            same(7.0),
            same(7.0),
        );
        d.orders[o].zone = 1;
    }
    for k in 0..10 {
        let o = d.add(
            format!("n{}", k + 1),
            point(&mut rng, (62.0, 45.0), 33.0),
            same(7.0),
            same(7.0),
        );
        d.orders[o].zone = 2;
    }
    d
}

fn mixed_load(
    rng: &mut ChaCha8Rng,
    out: std::ops::RangeInclusive<u32>,
    back: std::ops::RangeInclusive<u32>,
) -> ((f64, f64), (f64, f64)) {
    let mut draw = |r: &std::ops::RangeInclusive<u32>| f64::from(rng.gen_range(r.clone()));
    ((draw(&out), draw(&out)), (draw(&back), draw(&back)))
}

fn rw1_o19() -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut d = Draft::new(vec![
        truck("truck_big", 100.0).with_type(2),
        truck("truck_small", 80.0),
    ]);
    let mut wide = Vec::new();
    let mut pocket = Vec::new();
    for k in 0..18 {
        let restricted = k % 5 == 2 || k % 5 == 4 && k < 15;
        let at = if restricted {
            point(&mut rng, (25.0, 25.0), 18.0)
        } else {
            point(&mut rng, DEPOT, 45.0)
        };
        let (out, back) = mixed_load(&mut rng, 4..=9, 0..=8);
        let o = d.add(format!("c{:02}", k + 1), at, out, back);
        d.orders[o].zone = if restricted { 1 } else { 2 };
        if restricted {
            pocket.push(o);
        } else {
            wide.push(o);
        }
    }
    for group in [wide, pocket] {
        for (pos, (o, arr)) in d.reference_tour(&group).into_iter().enumerate() {
            if pos % 6 != 5 {
                d.window(o, arr - 8.0, Limit::Finite(arr + 12.0));
            }
        }
    }
    d
}

fn rw2_o24() -> Draft {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut d = Draft::new(vec![
        truck("truck_large", 200.0).with_type(2),
        truck("truck_small", 90.0),
    ]);
    let mut wide = Vec::new();
    let mut pocket = Vec::new();
    for k in 0..23 {
        let restricted = k % 3 == 1 && pocket.len() < 8;
        let at = if restricted {
            point(&mut rng, (75.0, 25.0), 15.0)
        } else {
            point(&mut rng, DEPOT, 45.0)
        };
        let (out, back) = mixed_load(&mut rng, 5..=12, 0..=8);
        let o = d.add(format!("c{:02}", k + 1), at, out, back);
        d.orders[o].zone = if restricted { 1 } else { 2 };
        if restricted {
            pocket.push(o);
        } else {
            wide.push(o);
        }
    }
    for group in [wide, pocket] {
        for (pos, (o, arr)) in d.reference_tour(&group).into_iter().enumerate() {
            if pos % 4 == 3 {
                d.window(o, arr - 25.0, Limit::Finite(arr + 30.0));
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::save_instance;
    use crate::model::check_instance;
    use crate::validator::check_route;

    #[test]
    fn sizes_match_names() {
        let sizes = [11, 11, 14, 14, 9, 16, 16, 18, 23];
        for (name, n) in FIXTURE_NAMES.iter().zip(sizes) {
            let inst = generate_fixture(name).unwrap();
            assert_eq!(inst.orders.len(), n, "{name}");
            assert!(
                check_instance(&inst).is_empty(),
                "{name}: {:?}",
                check_instance(&inst)
            );
        }
    }

    #[test]
    fn deterministic_bytes() {
        for name in FIXTURE_NAMES {
            let a = save_instance(&generate_fixture(name).unwrap());
            let b = save_instance(&generate_fixture(name).unwrap());
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = generate_fixture("PD99").unwrap_err().to_string();
        assert!(
            err.contains("PD99") && err.contains("RW2_O24") && err.contains("PD12"),
            "{err}"
        );
    }

    #[test]
    fn pd12_totals_saturate_the_truck() {
        for name in ["PD12", "PD12_B"] {
            let inst = generate_fixture(name).unwrap();
            let out: f64 = inst.orders.iter().map(|o| o.delivery_weight).sum();
            assert_eq!(out, 110.0, "{name}");
        }
    }

    #[test]
    fn mobility_split() {
        let inst = generate_fixture("PD17_MR").unwrap();
        assert_eq!(inst.orders.iter().filter(|o| o.zone == 1).count(), 6);
        assert_eq!(inst.orders.iter().filter(|o| o.zone == 2).count(), 10);
        for (name, pocket) in [("RW1_O19", 7), ("RW2_O24", 8)] {
            let inst = generate_fixture(name).unwrap();
            assert_eq!(
                inst.orders.iter().filter(|o| o.zone == 1).count(),
                pocket,
                "{name}"
            );
        }
    }

    fn reference_routes_hold(name: &str, groups: &[(u32, usize)]) {
        let inst = generate_fixture(name).unwrap();
        let d = Draft {
            coords: inst.coords.clone().unwrap(),
            orders: inst.orders.clone(),
            fleet: inst.fleet.clone(),
        };
        for &(zone, vehicle) in groups {
            let members: Vec<usize> = (0..inst.orders.len())
                .filter(|&k| inst.orders[k].zone == zone)
                .collect();
            let tour = d.reference_tour(&members);
            let stops: Vec<&Order> = tour.iter().map(|&(o, _)| &inst.orders[o]).collect();
            let nodes: Vec<usize> = stops.iter().map(|o| o.node).collect();
            let v = check_route("ref", &inst.fleet[vehicle], &stops, &nodes, &inst.travel).unwrap();
            assert!(v.is_empty(), "{name} zone {zone}: {v:?}");
        }
    }

    #[test]
    fn windowed_fixtures_have_feasible_reference_tours() {
        reference_routes_hold("PD10_TW", &[(1, 0)]);
        reference_routes_hold("RW1_O19", &[(2, 0), (1, 1)]);
        reference_routes_hold("RW2_O24", &[(2, 0), (1, 1)]);
    }
}
