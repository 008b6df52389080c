//! Cooperative output regulation for networks of parabolic PDE agents.

pub mod error;
pub mod graph;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod scenario;
pub mod signal;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use grid::GridFunction;
