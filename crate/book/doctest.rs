//! Every chapter of the guide, compiled and run as doctests.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("src/synthesis.md")]
pub mod synthesis {}

#[doc = include_str!("src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("src/scenarios.md")]
pub mod scenarios {}
