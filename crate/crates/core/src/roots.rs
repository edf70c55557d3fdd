//! Crate-private bisection with bracket expansion.
//!
//! Every root target in this crate decreases through zero (positive on the
//! left of the root, negative on the right), so a single sign convention
//! suffices. Functions may return `±inf` sentinels at extreme arguments;
//! the sign logic treats those like any other signed value.

use crate::error::{Error, Result};

/// Cap on bracket-expansion doublings/halvings.
pub(crate) const MAX_EXPANSIONS: u32 = 200;

/// Cap on bisection iterations; the interval midpoint stops moving in f64
/// well before this.
pub(crate) const MAX_BISECT_ITERS: u32 = 400;

/// Double `hi` until `f(hi) < 0`, starting from `start`.
pub(crate) fn expand_until_negative(
    f: impl Fn(f64) -> f64,
    start: f64,
    target: &'static str,
) -> Result<f64> {
    let mut hi = start;
    for _ in 0..=MAX_EXPANSIONS {
        if f(hi) < 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::Bracket {
        target,
        doublings: MAX_EXPANSIONS,
    })
}

/// Halve `lo` until `f(lo) > 0`, starting from `start`.
pub(crate) fn shrink_until_positive(
    f: impl Fn(f64) -> f64,
    start: f64,
    target: &'static str,
) -> Result<f64> {
    let mut lo = start;
    for _ in 0..=MAX_EXPANSIONS {
        if f(lo) > 0.0 {
            return Ok(lo);
        }
        lo *= 0.5;
        if lo == 0.0 {
            break;
        }
    }
    Err(Error::Bracket {
        target,
        doublings: MAX_EXPANSIONS,
    })
}

/// Bisect a decreasing sign change on `[lo, hi]` (`f(lo) >= 0 >= f(hi)`).
///
/// Stops when `|f(mid)| <= ftol`, when the interval width drops to `xtol`,
/// or when the midpoint can no longer be represented between the bounds.
/// Pass `xtol = 0.0` to drive purely on the residual (the interval then
/// shrinks to f64 resolution if the residual target is unreachable).
pub(crate) fn bisect_decreasing(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
) -> f64 {
    debug_assert!(lo < hi);
    for _ in 0..MAX_BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // f64 exhausted
        }
        let fm = f(mid);
        if fm.abs() <= ftol {
            return mid;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= xtol {
            break;
        }
    }
    0.5 * (lo + hi)
}
