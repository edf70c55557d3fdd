//! Closed-form link model: per-user instantaneous rate, multicast group
//! outage over i.i.d. Rayleigh-faded links, average throughput, system
//! energy efficiency, and the feasible transmit-power interval implied by
//! the interference and outage constraints.
//!
//! Conventions:
//! - channel gains are linear power gains (dimensionless),
//! - powers are in watts, rates are spectral efficiencies in bps/Hz,
//! - energy efficiency is therefore in (bps/Hz)/W,
//! - dB-valued inputs convert as `linear = 10^(dB/10)` (see [`db_to_linear`]).
//!
//! Every function here is pure; all validation happens either at
//! [`SystemConfig`] construction or on entry to the individual operations.

use crate::error::{Error, Result};

/// Convert a dB-valued power quantity to linear units: `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `2^rate - 1`, evaluated as `expm1(rate * ln 2)` so small rates do not
/// lose precision to cancellation.
pub(crate) fn pow2m1(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

/// One multicast group: population, channel statistics, the interference
/// budget of its assigned licensed channel, and its service bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupConfig {
    /// Number of users served by the group (each must decode the common
    /// stream, so the worst link limits the group).
    pub user_count: u32,
    /// Mean of the exponentially distributed base-station-to-user channel
    /// power gain (linear).
    pub mean_gain_ss: f64,
    /// Mean of the exponentially distributed base-station-to-licensed-receiver
    /// interference gain (linear).
    pub mean_gain_sp: f64,
    /// Average interference threshold of the assigned licensed channel (W).
    pub interference_threshold: f64,
    /// Minimum target rate supported by the application (bps/Hz).
    pub rate_min: f64,
    /// Maximum target rate supported by the application (bps/Hz).
    pub rate_max: f64,
    /// Maximum tolerable outage probability at the minimum rate, in (0,1).
    pub outage_max: f64,
}

impl GroupConfig {
    /// Check all field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.user_count < 1 {
            return Err(Error::domain(
                "user_count",
                self.user_count as f64,
                "must be at least 1",
            ));
        }
        for (name, v) in [
            ("mean_gain_ss", self.mean_gain_ss),
            ("mean_gain_sp", self.mean_gain_sp),
            ("interference_threshold", self.interference_threshold),
            ("rate_min", self.rate_min),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(name, v, "must be finite and > 0"));
            }
        }
        if !self.rate_max.is_finite() || self.rate_max < self.rate_min {
            return Err(Error::domain(
                "rate_max",
                self.rate_max,
                "must be finite and >= rate_min",
            ));
        }
        if !self.outage_max.is_finite() || self.outage_max <= 0.0 || self.outage_max >= 1.0 {
            return Err(Error::domain(
                "outage_max",
                self.outage_max,
                "must lie strictly between 0 and 1",
            ));
        }
        Ok(())
    }
}

/// A full problem instance: the groups served simultaneously, the noise
/// power seen by every user, and the transmitter's circuit power.
///
/// Construction rejects instances whose feasible power interval is empty
/// for any group (minimum power above the interference-limited maximum);
/// such instances have no solution and failing early is the only honest
/// contract.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    groups: Vec<GroupConfig>,
    noise_power: f64,
    circuit_power: f64,
    // (p_min, p_max) per group, cached at validation time.
    power_bounds: Vec<(f64, f64)>,
}

impl SystemConfig {
    pub fn new(groups: Vec<GroupConfig>, noise_power: f64, circuit_power: f64) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Invalid("system has no groups".into()));
        }
        if !noise_power.is_finite() || noise_power <= 0.0 {
            return Err(Error::domain(
                "noise_power",
                noise_power,
                "must be finite and > 0",
            ));
        }
        if !circuit_power.is_finite() || circuit_power < 0.0 {
            return Err(Error::domain(
                "circuit_power",
                circuit_power,
                "must be finite and >= 0",
            ));
        }
        let mut power_bounds = Vec::with_capacity(groups.len());
        for group in &groups {
            group.validate()?;
            let p_min = min_power(group, noise_power)?;
            let p_max = max_power(group);
            power_bounds.push((p_min, p_max));
        }
        Ok(SystemConfig {
            groups,
            noise_power,
            circuit_power,
            power_bounds,
        })
    }

    pub fn groups(&self) -> &[GroupConfig] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn circuit_power(&self) -> f64 {
        self.circuit_power
    }

    /// Feasible transmit-power interval `(p_min, p_max)` of a group.
    pub fn power_bounds(&self, group: usize) -> (f64, f64) {
        self.power_bounds[group]
    }
}

/// A per-group (power, rate) vector: a candidate or final solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    power: Vec<f64>,
    rate: Vec<f64>,
}

impl Allocation {
    pub fn new(power: Vec<f64>, rate: Vec<f64>) -> Result<Self> {
        if power.len() != rate.len() {
            return Err(Error::Invalid(format!(
                "allocation has {} powers but {} rates",
                power.len(),
                rate.len()
            )));
        }
        if power.is_empty() {
            return Err(Error::Invalid("allocation is empty".into()));
        }
        for &p in &power {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::domain(
                    "allocation power",
                    p,
                    "must be finite and > 0",
                ));
            }
        }
        for &r in &rate {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::domain(
                    "allocation rate",
                    r,
                    "must be finite and > 0",
                ));
            }
        }
        Ok(Allocation { power, rate })
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn rate(&self) -> &[f64] {
        &self.rate
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }
}

/// Outage and average throughput of one group at some allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupMetrics {
    /// Probability that the worst user's instantaneous rate falls below the
    /// target rate.
    pub outage: f64,
    /// Average delivered rate: `rate * (1 - outage)` (bps/Hz).
    pub throughput: f64,
}

/// Instantaneous achievable rate of a single link:
/// `log2(1 + gain * power / noise)` (bps/Hz).
pub fn instantaneous_rate(gain: f64, power: f64, noise: f64) -> Result<f64> {
    for (name, v) in [("gain", gain), ("power", power), ("noise", noise)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::domain(name, v, "must be finite and > 0"));
        }
    }
    Ok((gain * power / noise).ln_1p() / std::f64::consts::LN_2)
}

/// Exponent of the outage expression:
/// `noise * K * (2^rate - 1) / (mean_gain_ss * power)`.
fn outage_exponent(power: f64, rate: f64, group: &GroupConfig, noise: f64) -> f64 {
    noise * f64::from(group.user_count) * pow2m1(rate) / (group.mean_gain_ss * power)
}

/// Probability that the worst of the group's `user_count` i.i.d. faded
/// links cannot sustain `rate` at transmit power `power`:
///
/// `1 - exp(-noise * K * (2^rate - 1) / (mean_gain_ss * power))`
///
/// Lies in `[0, 1]`; exactly 0 iff `rate == 0`, and saturates to 1.0 in
/// floating point when the exponent is very large.
pub fn group_outage(power: f64, rate: f64, group: &GroupConfig, noise: f64) -> Result<f64> {
    check_link_args(power, rate, noise)?;
    Ok(-(-outage_exponent(power, rate, group, noise)).exp_m1())
}

/// Average throughput of the group:
/// `rate * exp(-noise * K * (2^rate - 1) / (mean_gain_ss * power))`,
/// identically `rate * (1 - outage)` (bps/Hz).
pub fn group_throughput(power: f64, rate: f64, group: &GroupConfig, noise: f64) -> Result<f64> {
    check_link_args(power, rate, noise)?;
    Ok(rate * (-outage_exponent(power, rate, group, noise)).exp())
}

fn check_link_args(power: f64, rate: f64, noise: f64) -> Result<()> {
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::domain("power", power, "must be finite and > 0"));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::domain("rate", rate, "must be finite and >= 0"));
    }
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::domain("noise", noise, "must be finite and > 0"));
    }
    Ok(())
}

/// System energy efficiency: total average throughput over total consumed
/// power, `sum_g T_g / (sum_g P_g + circuit_power)`, in (bps/Hz)/W.
///
/// Panics if the allocation length does not match the system's group count
/// (the allocation is required to be valid for the system).
pub fn system_ee(alloc: &Allocation, sys: &SystemConfig) -> f64 {
    assert_eq!(
        alloc.len(),
        sys.group_count(),
        "allocation length must match group count"
    );
    ee_from_parts(alloc.power(), alloc.rate(), sys)
}

/// EE over raw coordinate slices. Rates of zero are accepted here (the
/// zero-rate limit of the throughput expression), which the strictly
/// positive `Allocation` type cannot represent.
pub(crate) fn ee_from_parts(power: &[f64], rate: &[f64], sys: &SystemConfig) -> f64 {
    let mut throughput_sum = 0.0;
    let mut power_sum = sys.circuit_power();
    for (g, group) in sys.groups().iter().enumerate() {
        throughput_sum +=
            rate[g] * (-outage_exponent(power[g], rate[g], group, sys.noise_power())).exp();
        power_sum += power[g];
    }
    throughput_sum / power_sum
}

/// The unique transmit power at which the group's outage at its minimum
/// rate equals its outage budget:
///
/// `p_min = -noise * K * (2^rate_min - 1) / (mean_gain_ss * ln(1 - outage_max))`
///
/// Errors with [`Error::Infeasible`] when this exceeds [`max_power`], i.e.
/// the feasible power interval is empty.
pub fn min_power(group: &GroupConfig, noise: f64) -> Result<f64> {
    debug_assert!(group.validate().is_ok());
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::domain("noise", noise, "must be finite and > 0"));
    }
    let p_min = -noise * f64::from(group.user_count) * pow2m1(group.rate_min)
        / (group.mean_gain_ss * (-group.outage_max).ln_1p());
    let p_max = max_power(group);
    if p_min > p_max {
        return Err(Error::Infeasible { p_min, p_max });
    }
    Ok(p_min)
}

/// Largest transmit power that keeps the average interference at the
/// licensed receiver within its threshold:
/// `interference_threshold / mean_gain_sp`.
pub fn max_power(group: &GroupConfig) -> f64 {
    debug_assert!(group.validate().is_ok());
    group.interference_threshold / group.mean_gain_sp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn test_group() -> GroupConfig {
        GroupConfig {
            user_count: 10,
            mean_gain_ss: 1.0,
            mean_gain_sp: 1.0,
            interference_threshold: db_to_linear(-12.3),
            rate_min: 15.0,
            rate_max: 18.5,
            outage_max: 0.3,
        }
    }

    const NOISE: f64 = 1e-9;

    #[test]
    fn rate_log2_of_two_is_one() {
        assert_eq!(instantaneous_rate(1.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rate_vanishes_with_gain() {
        // gain -> 0 drives the SNR (and hence the rate) to 0
        let r = instantaneous_rate(1e-300, 1.0, 1.0).unwrap();
        assert!(r > 0.0 && r < 1e-290);
    }

    #[test]
    fn rate_matches_high_precision_reference() {
        // log2(1000001) = 19.93157001201849363..., frozen from 50-digit evaluation
        let r = instantaneous_rate(1.0, 1e-3, 1e-9).unwrap();
        assert!((r - 19.931570012018494).abs() < 1e-12, "r = {r:.17}");
    }

    #[test]
    fn rate_rejects_nonpositive_inputs() {
        assert!(instantaneous_rate(0.0, 1.0, 1.0).is_err());
        assert!(instantaneous_rate(1.0, -1.0, 1.0).is_err());
        assert!(instantaneous_rate(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn outage_zero_at_zero_rate() {
        assert_eq!(group_outage(0.01, 0.0, &test_group(), NOISE).unwrap(), 0.0);
    }

    #[test]
    fn outage_limits_in_power() {
        let g = test_group();
        assert!(group_outage(1e12, 15.0, &g, NOISE).unwrap() < 1e-12);
        assert!(group_outage(1e-12, 15.0, &g, NOISE).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn outage_matches_direct_evaluation() {
        // 1 - exp(-0.032767) = 0.03223597766119341..., frozen from 50-digit
        // evaluation; the Monte Carlo cross-check lives in the oracle tests.
        let out = group_outage(0.01, 15.0, &test_group(), NOISE).unwrap();
        assert!((out - 0.03223597766119341).abs() < 1e-12, "out = {out:.17}");
    }

    #[test]
    fn outage_rejects_nonpositive_power() {
        assert!(group_outage(0.0, 1.0, &test_group(), NOISE).is_err());
        assert!(group_outage(-1.0, 1.0, &test_group(), NOISE).is_err());
    }

    #[test]
    fn throughput_approaches_rate_at_high_power() {
        let t = group_throughput(1e9, 12.0, &test_group(), NOISE).unwrap();
        assert!((t - 12.0).abs() < 1e-9);
    }

    #[test]
    fn min_power_round_trip_hits_outage_budget() {
        let g = test_group();
        let p_min = min_power(&g, NOISE).unwrap();
        let out = group_outage(p_min, g.rate_min, &g, NOISE).unwrap();
        assert!((out - g.outage_max).abs() < 1e-12);
    }

    #[test]
    fn min_power_vanishes_with_loose_constraints() {
        let base = min_power(&test_group(), NOISE).unwrap();
        // outage budget -> 1 divides p_min by -ln(1 - budget) -> infinity
        let mut g = test_group();
        g.outage_max = 1.0 - 1e-12;
        assert!(min_power(&g, NOISE).unwrap() < base / 50.0);
        // rate_min -> 0 sends 2^r - 1 (and with it p_min) to zero
        let mut g = test_group();
        g.rate_min = 1e-14;
        assert!(min_power(&g, NOISE).unwrap() < 1e-12);
    }

    #[test]
    fn min_power_detects_empty_interval() {
        let mut g = test_group();
        g.interference_threshold = 1e-9; // p_max far below the outage-driven p_min
        match min_power(&g, NOISE) {
            Err(Error::Infeasible { p_min, p_max }) => assert!(p_min > p_max),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn max_power_is_threshold_over_gain() {
        let mut g = test_group();
        g.interference_threshold = 1.0;
        g.mean_gain_sp = 1.0;
        assert_eq!(max_power(&g), 1.0);
        g.interference_threshold = db_to_linear(-12.3);
        assert_eq!(max_power(&g), db_to_linear(-12.3));
        g.mean_gain_sp = 2.0;
        assert_eq!(max_power(&g), db_to_linear(-12.3) / 2.0);
    }

    #[test]
    fn system_rejects_infeasible_instance() {
        let mut g = test_group();
        g.mean_gain_sp = 1e6; // shrinks p_max below p_min
        assert!(matches!(
            SystemConfig::new(vec![g], NOISE, 1.0),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn system_rejects_bad_rate_box() {
        let mut g = test_group();
        g.rate_min = 19.0; // above rate_max
        assert!(matches!(
            SystemConfig::new(vec![g], NOISE, 1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn ee_zero_when_rates_zero() {
        let sys = SystemConfig::new(vec![test_group(), test_group()], NOISE, 1.0).unwrap();
        assert_eq!(ee_from_parts(&[0.01, 0.01], &[0.0, 0.0], &sys), 0.0);
    }

    #[test]
    fn ee_single_group_low_outage_limit() {
        // outage ~ 0, so EE ~ rate / (power + circuit)
        let sys = SystemConfig::new(vec![test_group()], NOISE, 1.0).unwrap();
        let alloc = Allocation::new(vec![1e6], vec![15.0]).unwrap();
        let ee = system_ee(&alloc, &sys);
        assert!((ee - 15.0 / (1e6 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ee_two_symmetric_groups() {
        let g = test_group();
        let sys2 = SystemConfig::new(vec![g.clone(), g.clone()], NOISE, 1.2).unwrap();
        let (p, r) = (0.03, 16.0);
        let t = group_throughput(p, r, &g, NOISE).unwrap();
        let alloc = Allocation::new(vec![p, p], vec![r, r]).unwrap();
        let ee = system_ee(&alloc, &sys2);
        assert!((ee - 2.0 * t / (2.0 * p + 1.2)).abs() < 1e-12);
    }

    #[test]
    fn allocation_validates_shape_and_sign() {
        assert!(Allocation::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Allocation::new(vec![], vec![]).is_err());
        assert!(Allocation::new(vec![0.0], vec![1.0]).is_err());
        assert!(Allocation::new(vec![1.0], vec![-1.0]).is_err());
    }

    proptest! {
        // Sample the outage exponent directly and derive the power that
        // produces it, guaranteeing the strict interior of [0, 1).
        #[test]
        fn outage_strictly_inside_unit_interval(
            x in 1e-6..30.0f64,
            rate in 0.5..20.0f64,
            k in 1u32..80,
            gain in 0.1..10.0f64,
        ) {
            let mut g = test_group();
            g.user_count = k;
            g.mean_gain_ss = gain;
            let power = NOISE * f64::from(k) * pow2m1(rate) / (gain * x);
            let out = group_outage(power, rate, &g, NOISE).unwrap();
            prop_assert!(out > 0.0 && out < 1.0);
        }

        #[test]
        fn outage_monotonicity(
            power in 1e-5..1.0f64,
            rate in 0.5..20.0f64,
            k in 1u32..60,
            factor in 1.02..4.0f64,
        ) {
            let mut g = test_group();
            g.user_count = k;
            let base = group_outage(power, rate, &g, NOISE).unwrap();
            prop_assume!(base > 1e-12 && base < 1.0 - 1e-12);

            // decreasing in power
            prop_assert!(group_outage(power * factor, rate, &g, NOISE).unwrap() < base);
            // increasing in rate
            prop_assert!(group_outage(power, rate * factor, &g, NOISE).unwrap() > base);
            // increasing in user count
            let mut more_users = g.clone();
            more_users.user_count = k + 1;
            prop_assert!(group_outage(power, rate, &more_users, NOISE).unwrap() > base);
            // decreasing in mean link gain
            let mut better_links = g.clone();
            better_links.mean_gain_ss *= factor;
            prop_assert!(group_outage(power, rate, &better_links, NOISE).unwrap() < base);
        }

        // The two throughput forms, rate*(1-outage) and the direct
        // exponential, must agree to near machine precision.
        #[test]
        fn throughput_identity(
            power in 1e-5..1.0f64,
            rate in 0.1..20.0f64,
            k in 1u32..60,
        ) {
            let mut g = test_group();
            g.user_count = k;
            let direct = group_throughput(power, rate, &g, NOISE).unwrap();
            let via_outage = rate * (1.0 - group_outage(power, rate, &g, NOISE).unwrap());
            let scale = direct.abs().max(1e-300);
            prop_assert!((direct - via_outage).abs() / scale < 1e-14);
        }

        #[test]
        fn ee_invariant_under_group_permutation(
            p1 in 1e-4..0.05f64,
            p2 in 1e-4..0.05f64,
            r1 in 15.0..18.5f64,
            r2 in 15.0..18.5f64,
            k1 in 1u32..40,
            k2 in 1u32..40,
        ) {
            let mut ga = test_group();
            ga.user_count = k1;
            let mut gb = test_group();
            gb.user_count = k2;
            let fwd = SystemConfig::new(vec![ga.clone(), gb.clone()], NOISE, 1.0).unwrap();
            let rev = SystemConfig::new(vec![gb, ga], NOISE, 1.0).unwrap();
            let ee_fwd = system_ee(&Allocation::new(vec![p1, p2], vec![r1, r2]).unwrap(), &fwd);
            let ee_rev = system_ee(&Allocation::new(vec![p2, p1], vec![r2, r1]).unwrap(), &rev);
            prop_assert!((ee_fwd - ee_rev).abs() <= 1e-15 * ee_fwd.abs().max(1.0));
        }
    }
}
