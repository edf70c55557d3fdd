//! Energy-efficiency-maximizing transmit power and target rate allocation
//! for a base station multicasting to several user groups over shared,
//! interference-constrained fading channels.
//!
//! The base station knows only the fading statistics of each group's
//! links. For a candidate power/rate pair the closed-form model gives the
//! group's outage and average throughput; system energy efficiency is the
//! total throughput per watt consumed, circuit power included. The solver
//! runs block coordinate descent over the per-group coordinates: an exact
//! power step driven by the sign analysis of the EE derivative (module
//! [`power_solver`]) and an exact rate step driven by its rate counterpart
//! (module [`rate_solver`]), both via bracketed bisection, clamped to the
//! feasible boxes implied by the interference and outage constraints.
//!
//! Two independent oracles back the math: a seeded Monte Carlo fading
//! simulation for the outage/throughput expressions and a brute-force grid
//! search for solver optimality ([`oracle`]).
//!
//! ```
//! use eemax_core::{db_to_linear, solve, DescentSettings, GroupConfig, SystemConfig};
//!
//! let group = GroupConfig {
//!     user_count: 10,
//!     mean_gain_ss: 1.0,
//!     mean_gain_sp: 1.0,
//!     interference_threshold: db_to_linear(-12.3),
//!     rate_min: 15.0,
//!     rate_max: 18.5,
//!     outage_max: 0.3,
//! };
//! let sys = SystemConfig::new(vec![group], 1e-9, db_to_linear(1.0))?;
//! let report = solve(&sys, &DescentSettings::default())?;
//! assert!(report.converged && report.ee > 0.0);
//! # Ok::<(), eemax_core::Error>(())
//! ```

pub mod descent;
pub mod error;
pub mod model;
pub mod oracle;
pub mod power_solver;
pub mod rate_solver;

mod roots;

pub use descent::{solve, solve_power_only, DescentSettings, SolveReport};
pub use error::{Error, Result};
pub use model::{
    db_to_linear, group_outage, group_throughput, instantaneous_rate, max_power, min_power,
    system_ee, Allocation, GroupConfig, GroupMetrics, SystemConfig,
};
pub use oracle::{grid_search, mc_group_outage, McEstimate, McSettings};
