//! Independent verification engines: a seeded Monte Carlo fading
//! simulation that validates the closed-form outage and throughput, and a
//! brute-force grid search that validates solver optimality.
//!
//! Reproducibility contract: all randomness comes from ChaCha8 (via
//! `rand_chacha`, a fixed, portable generator). Trials are consumed in
//! fixed blocks of [`MC_CHUNK`] draws, block `i` reading stream `i` of the
//! seeded generator, so the estimate depends only on `(inputs, seed,
//! samples)` — never on how the blocks might be scheduled.

use crate::error::{Error, Result};
use crate::model::{self, Allocation, GroupConfig, SystemConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Trials per RNG stream block.
pub const MC_CHUNK: u64 = 1 << 16;

/// Joint grid enumeration is limited to this many groups.
pub const GRID_GROUP_CAP: usize = 2;

/// Monte Carlo sample budget and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
}

impl McSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::domain(
                "samples",
                self.samples as f64,
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Empirical outage/throughput estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Fraction of trials in which the worst user's rate fell at or below
    /// the target rate.
    pub outage_hat: f64,
    /// `rate * (1 - outage_hat)` (bps/Hz).
    pub throughput_hat: f64,
    /// `sqrt(outage_hat * (1 - outage_hat) / samples)`.
    pub stderr_outage: f64,
}

/// Simulate the group outage: per trial, draw one exponential channel gain
/// per user (inverse CDF: `-mean * ln(u)`, `u` in (0,1]), form the worst
/// user's instantaneous rate, and count trials where it fails to reach the
/// target rate. Deterministic for a fixed seed.
pub fn mc_group_outage(
    power: f64,
    rate: f64,
    group: &GroupConfig,
    noise: f64,
    mc: &McSettings,
) -> Result<McEstimate> {
    mc.validate()?;
    group.validate()?;
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::domain("power", power, "must be finite and > 0"));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::domain("rate", rate, "must be finite and >= 0"));
    }
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::domain("noise", noise, "must be finite and > 0"));
    }

    let users = group.user_count as usize;
    let mean = group.mean_gain_ss;
    let snr_scale = power / noise;

    let mut failures = 0u64;
    let mut remaining = mc.samples;
    let mut stream = 0u64;
    while remaining > 0 {
        let block = remaining.min(MC_CHUNK);
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(stream);
        for _ in 0..block {
            let mut min_gain = f64::INFINITY;
            for _ in 0..users {
                // u = 1 - x maps the generator's [0,1) onto (0,1]
                let x: f64 = rng.random();
                let gain = -mean * (-x).ln_1p();
                if gain < min_gain {
                    min_gain = gain;
                }
            }
            let worst_rate = (min_gain * snr_scale).ln_1p() / std::f64::consts::LN_2;
            if worst_rate <= rate {
                failures += 1;
            }
        }
        remaining -= block;
        stream += 1;
    }

    let n = mc.samples as f64;
    let outage_hat = failures as f64 / n;
    Ok(McEstimate {
        outage_hat,
        throughput_hat: rate * (1.0 - outage_hat),
        stderr_outage: (outage_hat * (1.0 - outage_hat) / n).sqrt(),
    })
}

/// Exhaustive maximization of system EE over per-group uniform grids on
/// `[p_min, p_max] x [rate_min, rate_max]`.
///
/// Because only the power sum couples the groups, the best joint grid
/// point factors: for each group and each power grid point, take the best
/// throughput over the rate grid, then enumerate power combinations. The
/// result is exactly the best point of the full `(grid_p * grid_r)^G`
/// product grid at a fraction of the cost. Joint enumeration is capped at
/// [`GRID_GROUP_CAP`] groups.
pub fn grid_search(sys: &SystemConfig, grid_p: usize, grid_r: usize) -> Result<(Allocation, f64)> {
    let g_count = sys.group_count();
    if g_count > GRID_GROUP_CAP {
        return Err(Error::GridCap {
            groups: g_count,
            cap: GRID_GROUP_CAP,
        });
    }
    if grid_p < 1 || grid_r < 1 {
        return Err(Error::domain(
            "grid points",
            grid_p.min(grid_r) as f64,
            "must be >= 1",
        ));
    }

    struct GroupGrid {
        powers: Vec<f64>,
        best_throughput: Vec<f64>,
        best_rate: Vec<f64>,
    }

    let grids: Vec<GroupGrid> = (0..g_count)
        .map(|g| {
            let cfg = &sys.groups()[g];
            let (p_min, p_max) = sys.power_bounds(g);
            let powers: Vec<f64> = grid_points(p_min, p_max, grid_p);
            let rates: Vec<f64> = grid_points(cfg.rate_min, cfg.rate_max, grid_r);
            // exponent coefficient per rate, shared across the power loop
            let c = sys.noise_power() * f64::from(cfg.user_count) / cfg.mean_gain_ss;
            let rate_coeff: Vec<f64> = rates.iter().map(|&r| c * model::pow2m1(r)).collect();
            let mut best_throughput = Vec::with_capacity(powers.len());
            let mut best_rate = Vec::with_capacity(powers.len());
            for &p in &powers {
                let mut best_t = f64::NEG_INFINITY;
                let mut best_r = rates[0];
                for (j, &r) in rates.iter().enumerate() {
                    let t = r * (-rate_coeff[j] / p).exp();
                    if t > best_t {
                        best_t = t;
                        best_r = r;
                    }
                }
                best_throughput.push(best_t);
                best_rate.push(best_r);
            }
            GroupGrid {
                powers,
                best_throughput,
                best_rate,
            }
        })
        .collect();

    let circuit = sys.circuit_power();
    let mut best_ee = f64::NEG_INFINITY;
    let mut best_idx = vec![0usize; g_count];
    match g_count {
        1 => {
            for (i, &p) in grids[0].powers.iter().enumerate() {
                let ee = grids[0].best_throughput[i] / (p + circuit);
                if ee > best_ee {
                    best_ee = ee;
                    best_idx[0] = i;
                }
            }
        }
        2 => {
            for (i, &p0) in grids[0].powers.iter().enumerate() {
                let t0 = grids[0].best_throughput[i];
                for (j, &p1) in grids[1].powers.iter().enumerate() {
                    let ee = (t0 + grids[1].best_throughput[j]) / (p0 + p1 + circuit);
                    if ee > best_ee {
                        best_ee = ee;
                        best_idx = vec![i, j];
                    }
                }
            }
        }
        _ => unreachable!("guarded by GRID_GROUP_CAP"),
    }

    let powers: Vec<f64> = best_idx
        .iter()
        .enumerate()
        .map(|(g, &i)| grids[g].powers[i])
        .collect();
    let rates: Vec<f64> = best_idx
        .iter()
        .enumerate()
        .map(|(g, &i)| grids[g].best_rate[i])
        .collect();
    let alloc = Allocation::new(powers, rates)?;
    let ee = model::system_ee(&alloc, sys);
    Ok((alloc, ee))
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}
