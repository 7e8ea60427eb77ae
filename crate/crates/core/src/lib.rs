//! Brownian motions on metric graphs with Wentzell vertex conditions.
//!
//! Paths are built by pasting together motions on single-vertex star graphs.
//! A semi-analytic resolvent solver serves as an independent reference for
//! Monte Carlo estimates.

pub mod graph;
pub mod wentzell;
pub mod rng;
pub mod sv;
pub mod paste;
pub mod resolvent;
pub mod mc;
pub mod fixtures;
pub mod suite;
