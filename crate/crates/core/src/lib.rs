//! Pickup-and-delivery route planning on a constrained quadratic model.
//!
//! An [`model::Instance`] is planned one vehicle at a time: the orchestrator
//! picks a vehicle, builds a route model over the orders it can reach, hands
//! it to a backend, decodes the answer, validates it and repeats on what is
//! left.

pub mod backends;
pub mod cqm;
pub mod io;
pub mod model;
pub mod orchestrator;
pub mod validator;
