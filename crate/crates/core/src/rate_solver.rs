//! Per-group target-rate step: maximize system EE over one group's rate
//! with all powers frozen.
//!
//! Only this group's throughput `r * exp(-phi * (2^r - 1))` depends on the
//! rate, so the EE derivative sign is carried by the strictly decreasing
//!
//! `L2(r) = 1 - phi * r * 2^r * ln 2`
//!
//! which starts at `L2(0) = 1` and falls to `-inf`. Its unique root
//! `delta` is the unconstrained optimum; since EE rises up to `delta` and
//! falls beyond it, the constrained optimum is `delta` clamped to the rate
//! box.

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::roots;

use std::f64::consts::LN_2;

/// Frozen coefficients of one group's rate subproblem.
///
/// `phi = noise * K / (mean_gain_ss * power)` is the outage exponent per
/// unit of `2^r - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSubproblem {
    pub phi: f64,
    pub rate_min: f64,
    pub rate_max: f64,
}

impl RateSubproblem {
    /// Build the subproblem for `group` at transmit power `power`.
    pub fn from_system(sys: &SystemConfig, group: usize, power: f64) -> Result<Self> {
        if group >= sys.group_count() {
            return Err(Error::Invalid(format!(
                "rate subproblem: group {group} of {}",
                sys.group_count()
            )));
        }
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::domain("power", power, "must be finite and > 0"));
        }
        let cfg = &sys.groups()[group];
        let sub = RateSubproblem {
            phi: sys.noise_power() * f64::from(cfg.user_count) / (cfg.mean_gain_ss * power),
            rate_min: cfg.rate_min,
            rate_max: cfg.rate_max,
        };
        sub.validate()?;
        Ok(sub)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() || self.phi <= 0.0 {
            return Err(Error::domain("phi", self.phi, "must be finite and > 0"));
        }
        if !self.rate_min.is_finite() || self.rate_min <= 0.0 {
            return Err(Error::domain(
                "rate_min",
                self.rate_min,
                "must be finite and > 0",
            ));
        }
        if !self.rate_max.is_finite() || self.rate_max < self.rate_min {
            return Err(Error::domain(
                "rate_max",
                self.rate_max,
                "must be finite and >= rate_min",
            ));
        }
        Ok(())
    }

    /// Absolute rate tolerance for the bisection, scaled to the box.
    pub fn tol_r(&self) -> f64 {
        1e-10 * self.rate_max.max(1.0)
    }

    /// Group throughput at rate `r` for the frozen power:
    /// `r * exp(-phi * (2^r - 1))`.
    pub fn throughput_at(&self, r: f64) -> f64 {
        r * (-self.phi * crate::model::pow2m1(r)).exp()
    }
}

/// Sign carrier of the EE derivative in this group's rate:
/// `L2(r) = 1 - phi * r * 2^r * ln 2`. Overflow of `2^r` falls through to
/// the `-inf` limit naturally.
pub fn l2(r: f64, sub: &RateSubproblem) -> f64 {
    1.0 - sub.phi * r * r.exp2() * LN_2
}

/// Derivative of [`l2`]: `-phi * 2^r * ln2 * (1 + r * ln2)`.
pub fn l2_prime(r: f64, sub: &RateSubproblem) -> f64 {
    -sub.phi * r.exp2() * LN_2 * (1.0 + r * LN_2)
}

/// Diagnostic variant of [`l2_prime`] with an extra `2^r` factor inside
/// the bracket: `-phi * 2^r * ln2 * (1 + r * 2^r * ln2)`. Retained for
/// numerical comparison; it shares the sign of [`l2_prime`] for `r > 0`
/// but overstates the magnitude, which the finite-difference tests expose.
pub fn l2_prime_alt(r: f64, sub: &RateSubproblem) -> f64 {
    -sub.phi * r.exp2() * LN_2 * (1.0 + r * r.exp2() * LN_2)
}

/// Root `delta` of the strictly decreasing [`l2`]: the unconstrained
/// EE-optimal rate. Brackets `[0, hi]` with `hi` doubled from 1 until the
/// sign flips, then bisects on the residual until `|L2| <= 1e-11` (which
/// leaves the bracket far narrower than `tol_r`, since `|L2'| > ln 2`
/// at the root).
pub fn find_delta(sub: &RateSubproblem) -> Result<f64> {
    debug_assert!(sub.validate().is_ok());
    let f = |r: f64| l2(r, sub);
    let hi = roots::expand_until_negative(f, 1.0, "root of L2")?;
    Ok(roots::bisect_decreasing(f, 0.0, hi, 0.0, 1e-11))
}

/// One full rate step: `delta` clamped to the rate box. Quasi-concavity of
/// EE in the rate makes the clamp the constrained argmax.
pub fn optimal_rate(sub: &RateSubproblem) -> Result<f64> {
    sub.validate()?;
    let delta = find_delta(sub)?;
    Ok(delta.clamp(sub.rate_min, sub.rate_max))
}
