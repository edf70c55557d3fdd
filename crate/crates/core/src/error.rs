//! Crate-wide error type.

/// Errors produced by configuration validation, the closed-form model, and
/// the solvers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A scalar argument or configuration field is outside its domain.
    #[error("invalid {name}: {value} ({requirement})")]
    Domain {
        name: String,
        value: f64,
        requirement: &'static str,
    },

    /// The power required to meet the outage target at the minimum rate
    /// exceeds the power allowed by the interference threshold, so the
    /// feasible power interval is empty.
    #[error("infeasible power bounds: required minimum {p_min:.6e} W exceeds interference-limited maximum {p_max:.6e} W")]
    Infeasible { p_min: f64, p_max: f64 },

    /// A root bracket could not be established within the expansion cap.
    #[error("bracketing {target}: no sign change after {doublings} interval expansions")]
    Bracket {
        target: &'static str,
        doublings: u32,
    },

    /// Joint grid enumeration requested for more groups than the cap allows.
    #[error("grid search joint enumeration is capped at {cap} groups (got {groups})")]
    GridCap { groups: usize, cap: usize },

    /// Structural validation failure (mismatched lengths, empty inputs, ...).
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            name: name.to_owned(),
            value,
            requirement,
        }
    }
}
