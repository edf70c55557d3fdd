//! Scenario files: a versioned TOML schema mapping onto the library's
//! system configuration plus sweep directives and solver/verify knobs.
//!
//! Power-like quantities accept either a linear field (`noise_power`, in
//! watts or linear gain) or its dB twin (`noise_power_db`, converted as
//! `10^(dB/10)`), never both.

use crate::{map_core_err, CliError};
use eemax_core::{db_to_linear, DescentSettings, GroupConfig, SystemConfig};
use serde::Deserialize;
use std::path::Path;

pub const SUPPORTED_SCHEMA_VERSION: u32 = 1;

/// The bundled default scenario.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema_version: u32,
    system: SystemDoc,
    #[serde(rename = "group", default)]
    groups: Vec<GroupDoc>,
    sweep: Option<SweepDoc>,
    #[serde(default)]
    solver: SolverDoc,
    #[serde(default)]
    verify: VerifyDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    noise_power: Option<f64>,
    noise_power_db: Option<f64>,
    circuit_power: Option<f64>,
    circuit_power_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    user_count: u32,
    mean_gain_ss: Option<f64>,
    mean_gain_ss_db: Option<f64>,
    mean_gain_sp: Option<f64>,
    mean_gain_sp_db: Option<f64>,
    interference_threshold: Option<f64>,
    interference_threshold_db: Option<f64>,
    rate_min: f64,
    rate_max: f64,
    outage_max: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    ee_rel_tol: Option<f64>,
    max_iterations: Option<usize>,
    init_power_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyDoc {
    mc_samples: Option<u64>,
    seed: Option<u64>,
    grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    param: String,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    UserCount,
    GroupCount,
    InterferenceThreshold,
    CircuitPower,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "user_count" => Ok(SweepParam::UserCount),
            "group_count" => Ok(SweepParam::GroupCount),
            "interference_threshold" => Ok(SweepParam::InterferenceThreshold),
            "circuit_power" => Ok(SweepParam::CircuitPower),
            other => Err(CliError::Parse(format!(
                "unknown sweep parameter `{other}` (expected user_count, group_count, \
                 interference_threshold or circuit_power)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::UserCount => "user_count",
            SweepParam::GroupCount => "group_count",
            SweepParam::InterferenceThreshold => "interference_threshold",
            SweepParam::CircuitPower => "circuit_power",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifySettings {
    pub mc_samples: u64,
    pub seed: u64,
    pub grid_points: usize,
}

/// A parsed, validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Groups as written; sweeps rebuild systems from these.
    pub groups: Vec<GroupConfig>,
    pub noise_power: f64,
    pub circuit_power: f64,
    /// The base instance (constructed from the fields above).
    pub system: SystemConfig,
    pub sweep: Option<Sweep>,
    pub settings: DescentSettings,
    pub verify: VerifySettings,
}

/// Read and validate a scenario; `None` loads the bundled default.
/// `max_iter`/`tol` are command-line overrides of the solver section.
pub fn load(
    path: Option<&Path>,
    max_iter: Option<usize>,
    tol: Option<f64>,
) -> Result<Scenario, CliError> {
    let text = match path {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
        }
        None => DEFAULT_SCENARIO.to_owned(),
    };
    let doc: ScenarioDoc = toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;

    if doc.schema_version != SUPPORTED_SCHEMA_VERSION {
        return Err(CliError::Parse(format!(
            "schema_version {} unsupported (this build reads {SUPPORTED_SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    if doc.groups.is_empty() {
        return Err(CliError::Parse(
            "scenario defines no [[group]] entries".into(),
        ));
    }

    let noise_power = linear_or_db(
        "system.noise_power",
        doc.system.noise_power,
        doc.system.noise_power_db,
    )?;
    let circuit_power = linear_or_db(
        "system.circuit_power",
        doc.system.circuit_power,
        doc.system.circuit_power_db,
    )?;

    let groups = doc
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let field = |name: &str| format!("group[{i}].{name}");
            Ok(GroupConfig {
                user_count: g.user_count,
                mean_gain_ss: linear_or_db(
                    &field("mean_gain_ss"),
                    g.mean_gain_ss,
                    g.mean_gain_ss_db,
                )?,
                mean_gain_sp: linear_or_db(
                    &field("mean_gain_sp"),
                    g.mean_gain_sp,
                    g.mean_gain_sp_db,
                )?,
                interference_threshold: linear_or_db(
                    &field("interference_threshold"),
                    g.interference_threshold,
                    g.interference_threshold_db,
                )?,
                rate_min: g.rate_min,
                rate_max: g.rate_max,
                outage_max: g.outage_max,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let system =
        SystemConfig::new(groups.clone(), noise_power, circuit_power).map_err(map_core_err)?;

    let mut settings = DescentSettings::default();
    if let Some(v) = doc.solver.ee_rel_tol {
        settings.ee_rel_tol = v;
    }
    if let Some(v) = doc.solver.max_iterations {
        settings.max_iterations = v;
    }
    if let Some(v) = doc.solver.init_power_fraction {
        settings.init_power_fraction = v;
    }
    if let Some(v) = max_iter {
        settings.max_iterations = v;
    }
    if let Some(v) = tol {
        settings.ee_rel_tol = v;
    }

    let sweep = doc
        .sweep
        .map(|s| {
            Ok(Sweep {
                param: SweepParam::parse(&s.param)?,
                values: s.values,
            })
        })
        .transpose()?;

    let verify = VerifySettings {
        mc_samples: doc.verify.mc_samples.unwrap_or(1_000_000),
        seed: doc.verify.seed.unwrap_or(42),
        grid_points: doc.verify.grid_points.unwrap_or(500),
    };
    if verify.mc_samples == 0 {
        return Err(CliError::Parse(
            "verify.mc_samples must be at least 1".into(),
        ));
    }
    if verify.grid_points == 0 {
        return Err(CliError::Parse(
            "verify.grid_points must be at least 1".into(),
        ));
    }

    Ok(Scenario {
        groups,
        noise_power,
        circuit_power,
        system,
        sweep,
        settings,
        verify,
    })
}

fn linear_or_db(name: &str, linear: Option<f64>, db: Option<f64>) -> Result<f64, CliError> {
    match (linear, db) {
        (Some(v), None) => Ok(v),
        (None, Some(db)) => Ok(db_to_linear(db)),
        (Some(_), Some(_)) => Err(CliError::Parse(format!(
            "{name}: give either the linear field or its _db twin, not both"
        ))),
        (None, None) => Err(CliError::Parse(format!(
            "{name}: missing (provide it directly or as {name}_db)"
        ))),
    }
}

/// Rebuild the system with `param` forced to `value` (applied to every
/// group where per-group). Count-valued parameters must be positive
/// integers.
pub fn system_with(
    scn: &Scenario,
    param: SweepParam,
    value: f64,
) -> Result<SystemConfig, CliError> {
    let mut groups = scn.groups.clone();
    let mut circuit = scn.circuit_power;
    match param {
        SweepParam::UserCount => {
            let k = integral_count("user_count", value)?;
            for g in &mut groups {
                g.user_count = k;
            }
        }
        SweepParam::GroupCount => {
            let n = integral_count("group_count", value)? as usize;
            groups = vec![scn.groups[0].clone(); n];
        }
        SweepParam::InterferenceThreshold => {
            if !value.is_finite() || value <= 0.0 {
                return Err(CliError::Parse(format!(
                    "interference_threshold value {value} must be > 0 (linear watts)"
                )));
            }
            for g in &mut groups {
                g.interference_threshold = value;
            }
        }
        SweepParam::CircuitPower => {
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::Parse(format!(
                    "circuit_power value {value} must be >= 0 (watts)"
                )));
            }
            circuit = value;
        }
    }
    SystemConfig::new(groups, scn.noise_power, circuit).map_err(map_core_err)
}

fn integral_count(name: &str, value: f64) -> Result<u32, CliError> {
    if !(1.0..=f64::from(u32::MAX)).contains(&value) || value.fract() != 0.0 {
        return Err(CliError::Parse(format!(
            "{name} value {value} must be a positive integer"
        )));
    }
    Ok(value as u32)
}
