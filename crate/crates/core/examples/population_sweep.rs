//! Sweep the per-group user count for two and three simultaneously served
//! groups and print how the optimal power, rate and energy efficiency
//! respond.
//!
//! Run with: cargo run --example population_sweep

use eemax_core::{db_to_linear, solve, DescentSettings, GroupConfig, SystemConfig};

fn group(user_count: u32) -> GroupConfig {
    GroupConfig {
        user_count,
        mean_gain_ss: 1.0,
        mean_gain_sp: 1.0,
        interference_threshold: db_to_linear(-12.3),
        rate_min: 15.0,
        rate_max: 18.5,
        outage_max: 0.3,
    }
}

fn main() {
    let settings = DescentSettings::default();
    for g_count in [2usize, 3] {
        println!("{g_count} groups:");
        println!(
            "{:>5} {:>14} {:>12} {:>14} {:>6}",
            "K", "power_w", "rate", "ee", "iters"
        );
        for k in (10..=100).step_by(10) {
            let groups = (0..g_count).map(|_| group(k)).collect();
            let sys = SystemConfig::new(groups, db_to_linear(-90.0), db_to_linear(1.0))
                .expect("feasible instance");
            let report = solve(&sys, &settings).expect("solve");
            println!(
                "{k:>5} {:>14.6e} {:>12.6} {:>14.6e} {:>6}",
                report.allocation.power()[0],
                report.allocation.rate()[0],
                report.ee,
                report.iterations_used
            );
        }
        println!();
    }
}
