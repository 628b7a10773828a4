//! Cost modeling, planning, and emulation for CNN inference offloading
//! between a resource-constrained device and an edge server.
//!
//! The crate is organized around a handful of modules:
//!
//! * [`profiles`] -- system description (topology, per-split volumes and
//!   demands, link/compute/power parameters, accuracy), configuration
//!   loading, and the shipped measured defaults.
//! * [`cost`] -- the analytical delay and energy model for one execution
//!   plan (exit, split).
//! * [`phy`] -- theoretical link bitrate from physical-layer parameters.
//! * [`planner`] -- full-grid sweeps, Pareto fronts, and constrained plan
//!   selection.
//! * [`emulator`] -- deterministic event-timeline replay and a real
//!   socket-based harness with bandwidth shaping.
//! * [`report`] -- flat CSV/JSON rows for the CLI.
//!
//! The numeric core is generic over the scalar type via [`scalar::Scalar`];
//! the aliases below fix `f64`, which is what the CLI and the shipped
//! defaults use.

mod cli;
pub mod cost;
pub mod emulator;
pub mod phy;
pub mod planner;
pub mod profiles;
pub mod report;
pub mod scalar;

pub use cli::run;
pub use profiles::{CnnTopology, ExecutionPlan, Provenance};

/// Double-precision [`profiles::SystemProfile`].
pub type SystemProfile = profiles::SystemProfile<f64>;
/// Double-precision [`cost::CostReport`].
pub type CostReport = cost::CostReport<f64>;
/// Double-precision [`cost::DelayBreakdown`].
pub type DelayBreakdown = cost::DelayBreakdown<f64>;
/// Double-precision [`cost::EnergyBreakdown`].
pub type EnergyBreakdown = cost::EnergyBreakdown<f64>;
/// Double-precision [`planner::SweepResult`].
pub type SweepResult = planner::SweepResult<f64>;
/// Double-precision [`phy::PhyConfig`].
pub type PhyConfig = phy::PhyConfig<f64>;
/// Double-precision [`planner::Constraint`].
pub type Constraint = planner::Constraint<f64>;
/// Double-precision [`planner::Objective`].
pub type Objective = planner::Objective<f64>;
