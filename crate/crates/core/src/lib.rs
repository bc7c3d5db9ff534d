//! Exact-arithmetic simulator for arbitrary pattern formation by opaque,
//! luminous, asynchronous point robots.

pub mod geom;
pub mod model;
pub mod algo;
pub mod verify;
pub mod scenario;
pub mod sim;
pub mod render;
pub mod cli;
