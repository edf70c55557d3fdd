//! Per-group transmit-power step: maximize system EE over one group's
//! power with every rate and every other group's power frozen.
//!
//! With the other coordinates frozen, the sign of the EE derivative in
//! this group's power is carried by
//!
//! `F2(p) = -chi*p^2 + gamma*p + mu - zeta*p^2*exp(omega/p)`
//!
//! which rises to a single peak at `beta` (root of `F2'`) and falls to
//! `-inf` on both ends. If the peak value is non-positive, EE only
//! decreases in power and the step lands on the lower power bound.
//! Otherwise `F2` has a second zero crossing `alpha2 > beta`, the interior
//! EE maximum. The step evaluates the candidate set `{p_min,
//! clamp(alpha2, p_min, p_max)}` through the EE objective and keeps the
//! winner, which resolves the out-of-bounds sub-cases (including the
//! interference clamp at `p_max`) by construction.

use crate::error::{Error, Result};
use crate::model::{self, SystemConfig};
use crate::roots;

/// Frozen coefficients of one group's power subproblem.
///
/// For group `g` at rate `r` with the other groups frozen:
/// - `omega`: outage exponent scale, `noise * K * (2^r - 1) / mean_gain_ss`
/// - `chi`: the group's rate `r`
/// - `gamma`: `omega * chi`
/// - `mu`: `gamma * (sum of other groups' powers + circuit power)`
/// - `zeta`: sum of other groups' throughputs
/// - `p_min`, `p_max`: feasible power interval
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSubproblem {
    pub omega: f64,
    pub chi: f64,
    pub gamma: f64,
    pub mu: f64,
    pub zeta: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl PowerSubproblem {
    /// Build the subproblem for `group` out of the current coordinates.
    /// `powers` and `rates` hold one entry per group; only the entries of
    /// the *other* groups are read.
    pub fn from_system(
        sys: &SystemConfig,
        group: usize,
        powers: &[f64],
        rates: &[f64],
    ) -> Result<Self> {
        let g_count = sys.group_count();
        if group >= g_count || powers.len() != g_count || rates.len() != g_count {
            return Err(Error::Invalid(format!(
                "power subproblem: group {group} with {} powers / {} rates for {} groups",
                powers.len(),
                rates.len(),
                g_count
            )));
        }
        let cfg = &sys.groups()[group];
        let rate = rates[group];
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::domain("rate", rate, "must be finite and > 0"));
        }
        let noise = sys.noise_power();
        let omega =
            noise * f64::from(cfg.user_count) * crate::model::pow2m1(rate) / cfg.mean_gain_ss;
        let chi = rate;
        let gamma = omega * chi;
        let mut other_power = sys.circuit_power();
        let mut zeta = 0.0;
        for i in 0..g_count {
            if i == group {
                continue;
            }
            other_power += powers[i];
            zeta += model::group_throughput(powers[i], rates[i], &sys.groups()[i], noise)?;
        }
        let (p_min, p_max) = sys.power_bounds(group);
        let sub = PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * other_power,
            zeta,
            p_min,
            p_max,
        };
        sub.validate()?;
        Ok(sub)
    }

    /// Check the coefficient invariants. `mu == 0` is accepted: it arises
    /// exactly for a single group with zero circuit power, and the sign
    /// analysis degrades gracefully there.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("chi", self.chi),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(name, v, "must be finite and > 0"));
            }
        }
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::domain("mu", self.mu, "must be finite and >= 0"));
        }
        if !self.zeta.is_finite() || self.zeta < 0.0 {
            return Err(Error::domain("zeta", self.zeta, "must be finite and >= 0"));
        }
        if !self.p_min.is_finite() || self.p_min <= 0.0 {
            return Err(Error::domain("p_min", self.p_min, "must be finite and > 0"));
        }
        if !self.p_max.is_finite() || self.p_max < self.p_min {
            return Err(Error::domain(
                "p_max",
                self.p_max,
                "must be finite and >= p_min",
            ));
        }
        Ok(())
    }

    /// Absolute power tolerance for the bisections, scaled to the box.
    pub fn tol_p(&self) -> f64 {
        1e-10 * self.p_max
    }

    /// Residual tolerance for the `F2` root, scaled to the constant term.
    pub fn f2_tol(&self) -> f64 {
        1e-12 * self.mu
    }

    /// System EE when this group transmits at `p` and everything else stays
    /// frozen: `(chi * exp(-omega/p) + zeta) / (p + mu/gamma)`.
    pub fn ee_at(&self, p: f64) -> f64 {
        (self.chi * (-self.omega / p).exp() + self.zeta) / (p + self.mu / self.gamma)
    }
}

/// Which branch of the power step chose the returned power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerCase {
    /// EE is decreasing over the whole positive axis (`F2` never positive);
    /// the step sits on the lower bound.
    DecreasingEverywhere,
    /// The interior root `alpha2` lies inside the box and wins the
    /// candidate comparison.
    InteriorRoot,
    /// `alpha2` lies above the interference-limited maximum; the step is
    /// clamped to `p_max`.
    ClampedToMax,
    /// The lower bound wins (either `alpha2` fell below it, or the EE at
    /// `p_min` beats the interior candidate).
    ClampedToMin,
}

/// Outcome of one power step.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStepResult {
    /// Chosen power, always within `[p_min, p_max]`.
    pub power: f64,
    /// Branch that produced `power`.
    pub case: PowerCase,
    /// Peak location of `F2` (root of `F2'`).
    pub beta: Option<f64>,
    /// Interior EE maximum, present only when `F2(beta) > 0`.
    pub alpha2: Option<f64>,
}

// exp(x) for x <= EXP_DIRECT is safely finite in f64
const EXP_DIRECT: f64 = 700.0;
// beyond this the exponential term itself overflows
const EXP_OVERFLOW: f64 = 709.0;

/// `zeta * p^2 * exp(omega/p)`, routed through log space when the
/// exponential alone would overflow while the product stays representable.
/// Returns `+inf` when the product itself overflows.
fn outage_penalty(p: f64, sub: &PowerSubproblem) -> f64 {
    if sub.zeta == 0.0 {
        return 0.0;
    }
    let x = sub.omega / p;
    if x <= EXP_DIRECT {
        return sub.zeta * p * p * x.exp();
    }
    let log_term = sub.zeta.ln() + 2.0 * p.ln() + x;
    if log_term > EXP_OVERFLOW {
        f64::INFINITY
    } else {
        log_term.exp()
    }
}

/// Sign carrier of the EE derivative in this group's power:
/// `F2(p) = -chi*p^2 + gamma*p + mu - zeta*p^2*exp(omega/p)`.
///
/// Returns `-inf` when the exponential term overflows (the true limit for
/// `p -> 0+` with `zeta > 0`).
pub fn f2(p: f64, sub: &PowerSubproblem) -> f64 {
    let penalty = outage_penalty(p, sub);
    if penalty.is_infinite() {
        return f64::NEG_INFINITY;
    }
    (-sub.chi * p + sub.gamma) * p + sub.mu - penalty
}

/// First derivative `F2'(p) = -2*chi*p + gamma + zeta*exp(omega/p)*(omega - 2p)`,
/// strictly decreasing in `p`. Overflow of the exponential term yields the
/// signed infinity matching `omega - 2p`.
pub fn f2_prime(p: f64, sub: &PowerSubproblem) -> f64 {
    let linear = -2.0 * sub.chi * p + sub.gamma;
    if sub.zeta == 0.0 {
        return linear;
    }
    let x = sub.omega / p;
    let factor = sub.omega - 2.0 * p;
    if x <= EXP_DIRECT {
        return linear + sub.zeta * x.exp() * factor;
    }
    if factor == 0.0 {
        return linear;
    }
    let log_term = sub.zeta.ln() + x + factor.abs().ln();
    let magnitude = if log_term > EXP_OVERFLOW {
        f64::INFINITY
    } else {
        log_term.exp()
    };
    linear + factor.signum() * magnitude
}

/// Second derivative
/// `F2''(p) = -2*chi - zeta*exp(omega/p)*(p^2 + (p - omega)^2)/p^2`,
/// negative for all `p > 0`.
pub fn f2_second(p: f64, sub: &PowerSubproblem) -> f64 {
    if sub.zeta == 0.0 {
        return -2.0 * sub.chi;
    }
    let x = sub.omega / p;
    let bracket = 1.0 + (1.0 - x) * (1.0 - x);
    if x <= EXP_DIRECT {
        return -2.0 * sub.chi - sub.zeta * x.exp() * bracket;
    }
    let log_term = sub.zeta.ln() + x + bracket.ln();
    if log_term > EXP_OVERFLOW {
        f64::NEG_INFINITY
    } else {
        -2.0 * sub.chi - log_term.exp()
    }
}

/// Locate the unique peak `beta` of `F2` (the root of the strictly
/// decreasing `F2'`), bracketing on `[1e-12 * bracket_hi, bracket_hi]` and
/// doubling the upper end until `F2'` goes negative.
pub fn find_beta(sub: &PowerSubproblem, bracket_hi: f64) -> Result<f64> {
    debug_assert!(sub.validate().is_ok());
    let fp = |p: f64| f2_prime(p, sub);
    let lo = roots::shrink_until_positive(fp, 1e-12 * bracket_hi, "peak of F2 (lower end)")?;
    let hi = roots::expand_until_negative(fp, bracket_hi, "peak of F2 (upper end)")?;
    Ok(roots::bisect_decreasing(fp, lo, hi, sub.tol_p(), 0.0))
}

/// Locate `alpha2`, the zero crossing of `F2` above its peak, or `None`
/// when `F2(beta) <= 0` (EE decreasing everywhere).
pub fn find_alpha2(sub: &PowerSubproblem, beta: f64) -> Result<Option<f64>> {
    debug_assert!(sub.validate().is_ok());
    if f2(beta, sub) <= 0.0 {
        return Ok(None);
    }
    let f = |p: f64| f2(p, sub);
    let start = beta.max(sub.p_max);
    let hi = roots::expand_until_negative(f, start, "upper root of F2")?;
    let root = roots::bisect_decreasing(f, beta, hi, 0.0, sub.f2_tol());
    Ok(Some(root))
}

/// One full power step: find the candidate set dictated by the sign
/// analysis, score each candidate through the EE objective, and return the
/// winner (lower power on exact ties, to spare interference).
pub fn optimal_power(sub: &PowerSubproblem) -> Result<PowerStepResult> {
    sub.validate()?;
    let beta = find_beta(sub, sub.p_max)?;
    let alpha2 = find_alpha2(sub, beta)?;

    let Some(alpha2) = alpha2 else {
        return Ok(PowerStepResult {
            power: sub.p_min,
            case: PowerCase::DecreasingEverywhere,
            beta: Some(beta),
            alpha2: None,
        });
    };

    // A candidate clamped up to p_min ties the p_min candidate exactly and
    // the strict comparison already sends ties to the lower power.
    let clamped = alpha2.clamp(sub.p_min, sub.p_max);
    let (power, case) = if sub.ee_at(clamped) > sub.ee_at(sub.p_min) {
        if alpha2 > sub.p_max {
            (sub.p_max, PowerCase::ClampedToMax)
        } else {
            (clamped, PowerCase::InteriorRoot)
        }
    } else {
        (sub.p_min, PowerCase::ClampedToMin)
    };

    Ok(PowerStepResult {
        power,
        case,
        beta: Some(beta),
        alpha2: Some(alpha2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// zeta = 0 subproblem (single group): the roots have closed forms.
    fn quadratic_sub() -> PowerSubproblem {
        // default-scenario single-group coefficients at rate 18.5, K = 10
        let omega = 1e-8 * crate::model::pow2m1(18.5);
        let chi = 18.5;
        let gamma = omega * chi;
        PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * 1.2589254117941673,
            zeta: 0.0,
            p_min: 9.186917529629997e-4,
            p_max: 5.888436553555991e-2,
        }
    }

    fn random_sub(rng: &mut ChaCha8Rng) -> PowerSubproblem {
        let omega = 10f64.powf(rng.random_range(-4.0..-1.0));
        let chi = rng.random_range(2.0..20.0);
        let gamma = omega * chi;
        let base_power = rng.random_range(0.05..2.0);
        let zeta = if rng.random_bool(0.5) {
            rng.random_range(0.1..30.0)
        } else {
            0.0
        };
        let p_min = omega / rng.random_range(0.5..5.0);
        PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * base_power,
            zeta,
            p_min,
            p_max: p_min * 10f64.powf(rng.random_range(0.3..3.0)),
        }
    }

    #[test]
    fn f2_is_quadratic_when_alone() {
        let sub = quadratic_sub();
        // -chi p^2 + gamma p + mu, root at the positive quadratic root
        let p = 0.01;
        let expect = -sub.chi * p * p + sub.gamma * p + sub.mu;
        assert!((f2(p, &sub) - expect).abs() < 1e-15 * expect.abs());
        assert!(f2(1e-12, &sub) > 0.0); // tends to mu > 0
        assert!(f2(1e6, &sub) < 0.0); // -chi p^2 dominates
    }

    #[test]
    fn f2_overflow_sentinels() {
        let mut sub = quadratic_sub();
        sub.zeta = 1.0;
        // omega / p >> 709 forces the exponential term to dominate
        let p = sub.omega / 1e4;
        assert_eq!(f2(p, &sub), f64::NEG_INFINITY);
        assert_eq!(f2_prime(p, &sub), f64::INFINITY);
        assert_eq!(f2_second(p, &sub), f64::NEG_INFINITY);
    }

    #[test]
    fn beta_matches_quadratic_peak() {
        let sub = quadratic_sub();
        let beta = find_beta(&sub, sub.p_max).unwrap();
        let expect = sub.gamma / (2.0 * sub.chi);
        assert!(
            (beta - expect).abs() <= 10.0 * sub.tol_p(),
            "beta {beta:.12e} vs {expect:.12e}"
        );
    }

    #[test]
    fn alpha2_matches_quadratic_root() {
        let sub = quadratic_sub();
        let beta = find_beta(&sub, sub.p_max).unwrap();
        let alpha2 = find_alpha2(&sub, beta).unwrap().unwrap();
        let expect =
            (sub.gamma + (sub.gamma * sub.gamma + 4.0 * sub.chi * sub.mu).sqrt()) / (2.0 * sub.chi);
        assert!(
            (alpha2 - expect).abs() <= 10.0 * sub.tol_p(),
            "alpha2 {alpha2:.12e} vs {expect:.12e}"
        );
    }

    #[test]
    fn beta_sign_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let sub = random_sub(&mut rng);
            let beta = find_beta(&sub, sub.p_max).unwrap();
            let eps = 10.0 * sub.tol_p();
            assert!(f2_prime(beta - eps, &sub) > 0.0);
            assert!(f2_prime(beta + eps, &sub) < 0.0);
        }
    }

    #[test]
    fn alpha2_sign_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut seen = 0;
        for _ in 0..400 {
            let sub = random_sub(&mut rng);
            let beta = find_beta(&sub, sub.p_max).unwrap();
            if let Some(alpha2) = find_alpha2(&sub, beta).unwrap() {
                let eps = 10.0 * sub.tol_p();
                assert!(f2(alpha2 - eps, &sub) > 0.0);
                assert!(f2(alpha2 + eps, &sub) < 0.0);
                seen += 1;
            }
        }
        assert!(seen > 50, "too few interior-root samples: {seen}");
    }

    #[test]
    fn f2_prime_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let sub = random_sub(&mut rng);
            let p = rng.random_range(sub.p_min..sub.p_max.min(sub.p_min * 50.0));
            let h = 1e-6 * p;
            let fd = (f2(p + h, &sub) - f2(p - h, &sub)) / (2.0 * h);
            let an = f2_prime(p, &sub);
            if !fd.is_finite() || !an.is_finite() {
                continue;
            }
            let scale = an.abs().max(fd.abs()).max(1e-300);
            assert!(
                ((fd - an) / scale).abs() < 1e-5,
                "fd {fd:.6e} vs analytic {an:.6e} at p={p:.6e}"
            );
        }
    }

    #[test]
    fn f2_second_negative_everywhere_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let sub = random_sub(&mut rng);
            let p = 10f64.powf(rng.random_range(sub.p_min.log10()..(sub.p_max.log10() + 2.0)));
            assert!(f2_second(p, &sub) < 0.0, "F2'' >= 0 at p = {p:.6e}");
        }
    }

    #[test]
    fn f2_unimodal_around_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..200 {
            let sub = random_sub(&mut rng);
            let beta = find_beta(&sub, sub.p_max).unwrap();
            // ascending side
            let mut side: Vec<f64> = (0..3)
                .map(|_| rng.random_range(beta * 0.01..beta * 0.999))
                .collect();
            side.sort_by(f64::total_cmp);
            let vals: Vec<f64> = side.iter().map(|&p| f2(p, &sub)).collect();
            if vals.iter().all(|v| v.is_finite()) && vals[0] != vals[1] && vals[1] != vals[2] {
                assert!(
                    vals[0] < vals[1] && vals[1] < vals[2],
                    "not rising: {vals:?}"
                );
            }
            // descending side
            let mut side: Vec<f64> = (0..3)
                .map(|_| rng.random_range(beta * 1.001..beta * 100.0))
                .collect();
            side.sort_by(f64::total_cmp);
            let vals: Vec<f64> = side.iter().map(|&p| f2(p, &sub)).collect();
            if vals.iter().all(|v| v.is_finite()) && vals[0] != vals[1] && vals[1] != vals[2] {
                assert!(
                    vals[0] > vals[1] && vals[1] > vals[2],
                    "not falling: {vals:?}"
                );
            }
        }
    }

    #[test]
    fn optimal_power_never_beaten_by_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..60 {
            let sub = random_sub(&mut rng);
            let step = optimal_power(&sub).unwrap();
            assert!(step.power >= sub.p_min && step.power <= sub.p_max);
            let chosen = sub.ee_at(step.power);
            let n = 10_000;
            for i in 0..=n {
                let p = sub.p_min + (sub.p_max - sub.p_min) * (i as f64) / (n as f64);
                assert!(
                    sub.ee_at(p) <= chosen * (1.0 + 1e-6),
                    "grid point {p:.9e} beats chosen {:.9e} ({:?})",
                    step.power,
                    step.case
                );
            }
        }
    }

    #[test]
    fn quadratic_case_interior_root_within_box() {
        // Single small group: the interior root fits inside the box.
        let omega = 1e-9 * crate::model::pow2m1(18.5);
        let chi = 18.5;
        let gamma = omega * chi;
        let sub = PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * 1.2589254117941673,
            zeta: 0.0,
            p_min: 9.186917529629997e-5,
            p_max: 5.888436553555991e-2,
        };
        let step = optimal_power(&sub).unwrap();
        assert_eq!(step.case, PowerCase::InteriorRoot);
        let alpha2 = step.alpha2.unwrap();
        assert!((step.power - alpha2).abs() <= f64::EPSILON * alpha2);
        assert!(alpha2 > sub.p_min && alpha2 < sub.p_max);
    }

    #[test]
    fn clamp_to_max_when_root_violates_interference_budget() {
        let sub = quadratic_sub(); // alpha2 ~ 0.0702 > p_max ~ 0.0589
        let step = optimal_power(&sub).unwrap();
        assert_eq!(step.case, PowerCase::ClampedToMax);
        assert_eq!(step.power, sub.p_max);
        assert!(step.alpha2.unwrap() > sub.p_max);
    }

    #[test]
    fn clamp_to_min_when_root_below_box() {
        // Tight outage budget pushes p_min far above the interior root.
        let omega = 1e-8 * crate::model::pow2m1(15.0);
        let chi = 15.0;
        let gamma = omega * chi;
        let sub = PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * 1e-4,
            zeta: 0.0,
            p_min: omega / 0.01005033585350145, // -ln(0.99)
            p_max: 1.0,
        };
        let step = optimal_power(&sub).unwrap();
        assert_eq!(step.case, PowerCase::ClampedToMin);
        assert_eq!(step.power, sub.p_min);
        assert!(step.alpha2.unwrap() < sub.p_min);
    }

    #[test]
    fn decreasing_everywhere_with_heavy_neighbor_throughput() {
        // A poor channel (huge omega) plus substantial throughput carried by
        // the other groups makes F2 negative on the whole axis.
        let omega = 1e-8 * crate::model::pow2m1(15.0) / 3e-5;
        let chi = 15.0;
        let gamma = omega * chi;
        let sub = PowerSubproblem {
            omega,
            chi,
            gamma,
            mu: gamma * 1.02,
            zeta: 17.8,
            p_min: omega / 0.35667494393873245, // -ln(0.7)
            p_max: 100.0,
        };
        let step = optimal_power(&sub).unwrap();
        assert_eq!(step.case, PowerCase::DecreasingEverywhere);
        assert_eq!(step.power, sub.p_min);
        assert!(step.alpha2.is_none());
        assert!(f2(step.beta.unwrap(), &sub) <= 0.0);
    }
}
