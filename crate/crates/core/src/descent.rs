//! Block coordinate descent over the per-group (power, rate) coordinates.
//!
//! Each cycle visits the groups in index order and applies the exact
//! constrained argmax along the power coordinate, then along the rate
//! coordinate, with every other coordinate frozen. Both steps clamp to
//! their boxes internally, so every intermediate allocation is feasible
//! and the EE record is non-decreasing. The loop stops when one full cycle
//! improves EE by less than `ee_rel_tol` (relative), or when the iteration
//! cap is reached.

use crate::error::{Error, Result};
use crate::model::{self, Allocation, GroupMetrics, SystemConfig};
use crate::power_solver::{optimal_power, PowerSubproblem};
use crate::rate_solver::{optimal_rate, RateSubproblem};

/// Stopping rule and initialization knobs for [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DescentSettings {
    /// Converged when one full cycle improves EE by less than this,
    /// relative to the cycle's starting EE.
    pub ee_rel_tol: f64,
    /// Hard cap on full cycles.
    pub max_iterations: usize,
    /// Initial power as a fraction of the `[p_min, p_max]` span; 0 starts
    /// exactly at `p_min` (the default). Rates always start at `rate_max`.
    pub init_power_fraction: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        DescentSettings {
            ee_rel_tol: 1e-8,
            max_iterations: 200,
            init_power_fraction: 0.0,
        }
    }
}

impl DescentSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.ee_rel_tol.is_finite() || self.ee_rel_tol <= 0.0 {
            return Err(Error::domain(
                "ee_rel_tol",
                self.ee_rel_tol,
                "must be finite and > 0",
            ));
        }
        if self.max_iterations < 1 {
            return Err(Error::domain(
                "max_iterations",
                self.max_iterations as f64,
                "must be at least 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.init_power_fraction) {
            return Err(Error::domain(
                "init_power_fraction",
                self.init_power_fraction,
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Final allocation plus everything needed to audit the run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub allocation: Allocation,
    /// Final system EE in (bps/Hz)/W.
    pub ee: f64,
    /// Outage and throughput per group at the final allocation.
    pub per_group: Vec<GroupMetrics>,
    /// `(cycle, ee)` record; entry 0 is the initial allocation. Always
    /// non-decreasing in EE.
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub iterations_used: usize,
}

enum RatePolicy<'a> {
    /// Rates take part in the descent.
    Optimize,
    /// Rates stay pinned to the given values; only powers move.
    Fixed(&'a [f64]),
}

/// Jointly optimize every group's transmit power and target rate.
///
/// Returns a report whose allocation is stationary for the coordinate
/// steps (when `converged` is true) and feasible in all cases: power within
/// `[p_min, p_max]` per group (hence within the interference budget) and
/// rate within `[rate_min, rate_max]`. Non-convergence within
/// `max_iterations` is reported via `converged = false`, not an error.
pub fn solve(sys: &SystemConfig, settings: &DescentSettings) -> Result<SolveReport> {
    run_descent(sys, settings, RatePolicy::Optimize)
}

/// Power-adaptation-only baseline: rates are frozen at `fixed_rates`
/// (each must lie inside its group's rate box) and only the power
/// coordinates descend.
pub fn solve_power_only(
    sys: &SystemConfig,
    fixed_rates: &[f64],
    settings: &DescentSettings,
) -> Result<SolveReport> {
    if fixed_rates.len() != sys.group_count() {
        return Err(Error::Invalid(format!(
            "{} fixed rates for {} groups",
            fixed_rates.len(),
            sys.group_count()
        )));
    }
    for (g, (&rate, cfg)) in fixed_rates.iter().zip(sys.groups()).enumerate() {
        if !(cfg.rate_min..=cfg.rate_max).contains(&rate) {
            return Err(Error::Invalid(format!(
                "fixed rate {rate} for group {g} lies outside [{}, {}]",
                cfg.rate_min, cfg.rate_max
            )));
        }
    }
    run_descent(sys, settings, RatePolicy::Fixed(fixed_rates))
}

fn run_descent(
    sys: &SystemConfig,
    settings: &DescentSettings,
    rate_policy: RatePolicy,
) -> Result<SolveReport> {
    settings.validate()?;
    let g_count = sys.group_count();

    let mut powers: Vec<f64> = (0..g_count)
        .map(|g| {
            let (p_min, p_max) = sys.power_bounds(g);
            p_min + settings.init_power_fraction * (p_max - p_min)
        })
        .collect();
    let mut rates: Vec<f64> = match rate_policy {
        RatePolicy::Optimize => sys.groups().iter().map(|g| g.rate_max).collect(),
        RatePolicy::Fixed(fixed) => fixed.to_vec(),
    };

    let mut ee = model::ee_from_parts(&powers, &rates, sys);
    let mut trace = vec![(0usize, ee)];
    let mut converged = false;
    let mut cycles = 0usize;

    while cycles < settings.max_iterations {
        cycles += 1;
        let ee_before_cycle = ee;

        for g in 0..g_count {
            let sub = PowerSubproblem::from_system(sys, g, &powers, &rates)?;
            powers[g] = optimal_power(&sub)?.power;
            ee = assert_ascent(ee, model::ee_from_parts(&powers, &rates, sys));

            if let RatePolicy::Optimize = rate_policy {
                let sub = RateSubproblem::from_system(sys, g, powers[g])?;
                rates[g] = optimal_rate(&sub)?;
                ee = assert_ascent(ee, model::ee_from_parts(&powers, &rates, sys));
            }
        }

        trace.push((cycles, ee));
        if ee - ee_before_cycle < settings.ee_rel_tol * ee_before_cycle.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    // Post-loop feasibility checks; the in-step clamps make these
    // unconditional, so a failure here is a solver bug.
    for (g, cfg) in sys.groups().iter().enumerate() {
        let (p_min, p_max) = sys.power_bounds(g);
        assert!(
            powers[g] >= p_min && powers[g] <= p_max,
            "group {g}: power {} outside [{p_min}, {p_max}]",
            powers[g]
        );
        assert!(
            cfg.mean_gain_sp * powers[g] <= cfg.interference_threshold * (1.0 + 1e-12),
            "group {g}: interference budget violated"
        );
        assert!(
            rates[g] >= cfg.rate_min && rates[g] <= cfg.rate_max,
            "group {g}: rate {} outside [{}, {}]",
            rates[g],
            cfg.rate_min,
            cfg.rate_max
        );
    }

    let per_group = sys
        .groups()
        .iter()
        .enumerate()
        .map(|(g, cfg)| {
            let outage = model::group_outage(powers[g], rates[g], cfg, sys.noise_power())?;
            let throughput = model::group_throughput(powers[g], rates[g], cfg, sys.noise_power())?;
            Ok(GroupMetrics { outage, throughput })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SolveReport {
        allocation: Allocation::new(powers, rates)?,
        ee,
        per_group,
        trace,
        converged,
        iterations_used: cycles,
    })
}

/// Every coordinate step is an exact constrained argmax along its
/// coordinate, so EE must not drop (beyond bisection-level noise).
fn assert_ascent(before: f64, after: f64) -> f64 {
    assert!(
        after >= before * (1.0 - 1e-12),
        "EE fell from {before:.15e} to {after:.15e} within a coordinate step"
    );
    after
}
