//! The four subcommands: solve, sweep, compare, verify.

use crate::output::{self, sig12, COMPARE_HEADER, SWEEP_HEADER, VERIFY_HEADER};
use crate::scenario::{system_with, Scenario, Sweep, SweepParam};
use crate::{map_core_err, CliError};

use eemax_core::descent::{solve, solve_power_only, SolveReport};
use eemax_core::oracle::{grid_search, mc_group_outage, McSettings, GRID_GROUP_CAP};
use eemax_core::SystemConfig;

use std::path::Path;

pub fn run_solve(scn: &Scenario, out: Option<&Path>) -> Result<(), CliError> {
    let report = solve(&scn.system, &scn.settings).map_err(map_core_err)?;
    print_report(scn, &report);
    if let Some(path) = out {
        output::write_csv(path, &SWEEP_HEADER, &report_rows("", "", &report))?;
        println!("wrote {}", path.display());
    }
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NonConverged)
    }
}

pub fn run_sweep(
    scn: &Scenario,
    param_override: Option<&str>,
    values_override: Option<Vec<f64>>,
    out: &Path,
    assert_trends: bool,
) -> Result<(), CliError> {
    let sweep = resolve_sweep(scn, param_override, values_override)?.ok_or_else(|| {
        CliError::Parse("no sweep: add a [sweep] section or pass --param/--values".into())
    })?;
    for &v in &sweep.values {
        validate_sweep_value(sweep.param, v)?;
    }

    let mut rows = Vec::new();
    let mut results: Vec<(f64, Option<SolveReport>)> = Vec::new();
    println!(
        "{:<24} {:>16} {:>11} {:>9}",
        "param", "value", "ee", "converged"
    );
    for &value in &sweep.values {
        let outcome = system_with(scn, sweep.param, value)
            .and_then(|sys| solve(&sys, &scn.settings).map_err(map_core_err));
        match outcome {
            Ok(report) => {
                println!(
                    "{:<24} {:>16} {:>11.4e} {:>9}",
                    sweep.param.name(),
                    value,
                    report.ee,
                    report.converged
                );
                rows.extend(report_rows(sweep.param.name(), &value.to_string(), &report));
                results.push((value, Some(report)));
            }
            Err(err) => {
                println!(
                    "{:<24} {:>16} {:>11} {:>9}",
                    sweep.param.name(),
                    value,
                    "-",
                    error_tag(&err)
                );
                rows.push(error_row(sweep.param.name(), &value.to_string(), &err));
                results.push((value, None));
            }
        }
    }
    output::write_csv(out, &SWEEP_HEADER, &rows)?;
    println!("wrote {}", out.display());

    if assert_trends {
        check_trends(sweep.param, &results)?;
        println!(
            "trend assertions hold across {} sweep points",
            results.len()
        );
    }
    Ok(())
}

pub fn run_compare(
    scn: &Scenario,
    param_override: Option<&str>,
    values_override: Option<Vec<f64>>,
    out: &Path,
) -> Result<(), CliError> {
    let sweep = resolve_sweep(scn, param_override, values_override)?;
    let points: Vec<(String, String, Option<SystemConfig>)> = match &sweep {
        Some(sweep) => {
            for &v in &sweep.values {
                validate_sweep_value(sweep.param, v)?;
            }
            sweep
                .values
                .iter()
                .map(|&v| {
                    let sys = system_with(scn, sweep.param, v).ok();
                    (sweep.param.name().to_string(), v.to_string(), sys)
                })
                .collect()
        }
        None => vec![(String::new(), String::new(), Some(scn.system.clone()))],
    };

    let mut rows = Vec::new();
    for (param, value, sys) in points {
        let Some(sys) = sys else {
            rows.push(vec![
                param,
                value,
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "infeasible".into(),
            ]);
            continue;
        };
        let outcome = solve(&sys, &scn.settings)
            .map_err(map_core_err)
            .and_then(|joint| {
                let rate_max: Vec<f64> = sys.groups().iter().map(|g| g.rate_max).collect();
                let power_only =
                    solve_power_only(&sys, &rate_max, &scn.settings).map_err(map_core_err)?;
                Ok((joint, power_only))
            });
        match outcome {
            Ok((joint, power_only)) => {
                println!(
                    "{param} {value}: joint {:.6e} vs power-only {:.6e} (ratio {:.6})",
                    joint.ee,
                    power_only.ee,
                    joint.ee / power_only.ee
                );
                rows.push(vec![
                    param,
                    value,
                    sig12(joint.ee),
                    sig12(power_only.ee),
                    sig12(joint.ee / power_only.ee),
                    joint.iterations_used.to_string(),
                    power_only.iterations_used.to_string(),
                    joint.converged.to_string(),
                    power_only.converged.to_string(),
                    String::new(),
                ]);
            }
            Err(err) => {
                rows.push(vec![
                    param,
                    value,
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    error_tag(&err).to_string(),
                ]);
            }
        }
    }
    output::write_csv(out, &COMPARE_HEADER, &rows)?;
    println!("wrote {}", out.display());
    Ok(())
}

enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

struct Check {
    name: &'static str,
    group: Option<usize>,
    observed: Option<f64>,
    reference: Option<f64>,
    threshold: Option<f64>,
    status: CheckStatus,
}

pub fn run_verify(
    scn: &Scenario,
    seed_override: Option<u64>,
    out: Option<&Path>,
    corrupt_allocation: bool,
) -> Result<(), CliError> {
    let seed = seed_override.unwrap_or(scn.verify.seed);
    let samples = scn.verify.mc_samples;
    let report = solve(&scn.system, &scn.settings).map_err(map_core_err)?;
    if !report.converged {
        return Err(CliError::NonConverged);
    }
    println!(
        "solved: ee {:.6e} (bps/Hz)/W after {} iterations; verifying with {} samples, seed {}",
        report.ee, report.iterations_used, samples, seed
    );
    if corrupt_allocation {
        println!(
            "note: allocation fed to Monte Carlo is deliberately corrupted (negative control)"
        );
    }

    let mut checks = Vec::new();
    let noise = scn.system.noise_power();
    for (g, cfg) in scn.system.groups().iter().enumerate() {
        let power = report.allocation.power()[g] * if corrupt_allocation { 1.25 } else { 1.0 };
        let rate = report.allocation.rate()[g];
        let mc = McSettings {
            samples,
            seed: seed.wrapping_add(g as u64),
        };
        let est = mc_group_outage(power, rate, cfg, noise, &mc).map_err(map_core_err)?;

        let outage_ref = report.per_group[g].outage;
        // the closed-form probability gives the better-behaved standard
        // error when the empirical count sits near 0 or 1
        let se_model = (outage_ref * (1.0 - outage_ref) / samples as f64).sqrt();
        let se = est.stderr_outage.max(se_model);
        let tol = 3.0 * se;
        checks.push(Check {
            name: "mc_outage",
            group: Some(g),
            observed: Some(est.outage_hat),
            reference: Some(outage_ref),
            threshold: Some(tol),
            status: pass_if((est.outage_hat - outage_ref).abs() <= tol),
        });

        let throughput_ref = report.per_group[g].throughput;
        let t_tol = 3.0 * rate * se;
        checks.push(Check {
            name: "mc_throughput",
            group: Some(g),
            observed: Some(est.throughput_hat),
            reference: Some(throughput_ref),
            threshold: Some(t_tol),
            status: pass_if((est.throughput_hat - throughput_ref).abs() <= t_tol),
        });
    }

    if scn.system.group_count() <= GRID_GROUP_CAP {
        let n = scn.verify.grid_points;
        let (_, ee_grid) = grid_search(&scn.system, n, n).map_err(map_core_err)?;
        checks.push(Check {
            name: "grid_optimality",
            group: None,
            observed: Some(report.ee),
            reference: Some(ee_grid),
            threshold: Some(5e-3),
            status: pass_if(report.ee >= ee_grid * (1.0 - 5e-3)),
        });
    } else {
        checks.push(Check {
            name: "grid_optimality",
            group: None,
            observed: None,
            reference: None,
            threshold: None,
            status: CheckStatus::Skipped,
        });
    }

    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for check in &checks {
        let status = match check.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIPPED",
        };
        let label = match check.group {
            Some(g) => format!("{}[{g}]", check.name),
            None => check.name.to_string(),
        };
        match (check.observed, check.reference, check.threshold) {
            (Some(o), Some(r), Some(t)) => {
                println!("{label}: {status} (observed {o:.6e}, reference {r:.6e}, tol {t:.3e})")
            }
            _ => println!("{label}: {status}"),
        }
        if matches!(check.status, CheckStatus::Fail) {
            failed.push(label);
        }
        rows.push(vec![
            check.name.to_string(),
            check.group.map(|g| g.to_string()).unwrap_or_default(),
            check.observed.map(sig12).unwrap_or_default(),
            check.reference.map(sig12).unwrap_or_default(),
            check.threshold.map(sig12).unwrap_or_default(),
            status.to_string(),
        ]);
    }
    if let Some(path) = out {
        output::write_csv(path, &VERIFY_HEADER, &rows)?;
        println!("wrote {}", path.display());
    }

    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn pass_if(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

fn print_report(scn: &Scenario, report: &SolveReport) {
    println!(
        "groups: {}   noise: {} W   circuit: {} W",
        scn.system.group_count(),
        sig12(scn.noise_power),
        sig12(scn.circuit_power)
    );
    println!(
        "converged: {} after {} iterations",
        report.converged, report.iterations_used
    );
    println!(
        "{:>5}  {:>18}  {:>18}  {:>18}  {:>18}",
        "group", "power_w", "rate_bpshz", "outage", "throughput_bpshz"
    );
    for g in 0..report.allocation.len() {
        println!(
            "{:>5}  {:>18}  {:>18}  {:>18}  {:>18}",
            g,
            sig12(report.allocation.power()[g]),
            sig12(report.allocation.rate()[g]),
            sig12(report.per_group[g].outage),
            sig12(report.per_group[g].throughput)
        );
    }
    println!("system EE: {} (bps/Hz)/W", sig12(report.ee));
}

/// One CSV row per group for a solved point.
fn report_rows(param: &str, value: &str, report: &SolveReport) -> Vec<Vec<String>> {
    (0..report.allocation.len())
        .map(|g| {
            vec![
                param.to_string(),
                value.to_string(),
                g.to_string(),
                sig12(report.allocation.power()[g]),
                sig12(report.allocation.rate()[g]),
                sig12(report.per_group[g].outage),
                sig12(report.per_group[g].throughput),
                sig12(report.ee),
                report.iterations_used.to_string(),
                report.converged.to_string(),
                String::new(),
            ]
        })
        .collect()
}

fn error_row(param: &str, value: &str, err: &CliError) -> Vec<String> {
    vec![
        param.to_string(),
        value.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        error_tag(err).to_string(),
    ]
}

fn error_tag(err: &CliError) -> &'static str {
    match err {
        CliError::Infeasible(_) => "infeasible",
        CliError::Numerical(_) => "numerical",
        CliError::NonConverged => "non_converged",
        CliError::Parse(_) => "invalid",
        CliError::Io(_) => "io",
        CliError::Verification(_) => "verification",
        CliError::Trend(_) => "trend",
    }
}

/// Merge the scenario's sweep section with command-line overrides; values
/// are sorted ascending and deduplicated so rows always appear in sweep
/// order.
fn resolve_sweep(
    scn: &Scenario,
    param_override: Option<&str>,
    values_override: Option<Vec<f64>>,
) -> Result<Option<Sweep>, CliError> {
    let sweep = match (param_override, values_override) {
        (Some(param), Some(values)) => Some(Sweep {
            param: SweepParam::parse(param)?,
            values,
        }),
        (None, None) => scn.sweep.clone(),
        _ => {
            return Err(CliError::Parse(
                "--param and --values must be given together".into(),
            ))
        }
    };
    match sweep {
        None => Ok(None),
        Some(mut sweep) => {
            if sweep.values.is_empty() {
                return Err(CliError::Parse("sweep has no values".into()));
            }
            sweep.values.sort_by(f64::total_cmp);
            sweep.values.dedup();
            Ok(Some(sweep))
        }
    }
}

fn validate_sweep_value(param: SweepParam, value: f64) -> Result<(), CliError> {
    match param {
        SweepParam::UserCount | SweepParam::GroupCount => {
            if !(1.0..=f64::from(u32::MAX)).contains(&value) || value.fract() != 0.0 {
                return Err(CliError::Parse(format!(
                    "{} value {value} must be a positive integer",
                    param.name()
                )));
            }
        }
        SweepParam::InterferenceThreshold => {
            if !value.is_finite() || value <= 0.0 {
                return Err(CliError::Parse(format!(
                    "interference_threshold value {value} must be finite and > 0"
                )));
            }
        }
        SweepParam::CircuitPower => {
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::Parse(format!(
                    "circuit_power value {value} must be finite and >= 0"
                )));
            }
        }
    }
    Ok(())
}

/// Monotone trend assertions over the successful sweep points.
fn check_trends(param: SweepParam, results: &[(f64, Option<SolveReport>)]) -> Result<(), CliError> {
    let slack = 1.0 + 1e-9;
    let solved: Vec<(f64, &SolveReport)> = results
        .iter()
        .filter_map(|(v, r)| r.as_ref().map(|r| (*v, r)))
        .collect();
    if solved.len() < 2 {
        return Err(CliError::Trend(format!(
            "need at least two solved points, got {}",
            solved.len()
        )));
    }
    match param {
        SweepParam::UserCount => {
            for pair in solved.windows(2) {
                let (va, a) = pair[0];
                let (vb, b) = pair[1];
                for g in 0..a.allocation.len() {
                    if b.allocation.power()[g] * slack < a.allocation.power()[g] {
                        return Err(CliError::Trend(format!(
                            "optimal power fell between {}={va} and {vb} (group {g})",
                            param.name()
                        )));
                    }
                    if b.allocation.rate()[g] > a.allocation.rate()[g] * slack {
                        return Err(CliError::Trend(format!(
                            "optimal rate rose between {}={va} and {vb} (group {g})",
                            param.name()
                        )));
                    }
                }
                if b.ee > a.ee * slack {
                    return Err(CliError::Trend(format!(
                        "EE rose between {}={va} and {vb}",
                        param.name()
                    )));
                }
            }
        }
        SweepParam::GroupCount => {
            for pair in solved.windows(2) {
                let (va, a) = pair[0];
                let (vb, b) = pair[1];
                if b.ee * slack < a.ee {
                    return Err(CliError::Trend(format!(
                        "EE fell between group_count={va} and {vb}"
                    )));
                }
            }
        }
        other => {
            return Err(CliError::Parse(format!(
                "--assert-trends is defined for user_count and group_count sweeps, not {}",
                other.name()
            )));
        }
    }
    Ok(())
}
