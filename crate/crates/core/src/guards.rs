//! Clamped inverse trigonometric/hyperbolic functions with trip counters.
//!
//! Floating-point noise routinely pushes `acosh`/`asin`/`acos` arguments a few
//! ulps outside their domains. Every call site in this crate goes through the
//! guarded variants below, which clamp the argument and count how often the
//! clamp actually fired. The trainer reports the trip rate so that a model
//! whose geometry is degenerating is visible in the logs.

use std::sync::atomic::{AtomicU64, Ordering};

/// `acosh` arguments are floored here rather than at exactly 1 so that the
/// derivative-bearing quantity `sqrt(arg^2 - 1)` stays nonzero.
pub const ACOSH_FLOOR: f64 = 1.0 + 1e-15;

/// Floor for `1 - c^2` style gradient denominators.
pub const GRAD_DENOM_FLOOR: f64 = 1e-15;

static ACOSH_CLAMPS: AtomicU64 = AtomicU64::new(0);
static ASIN_CLAMPS: AtomicU64 = AtomicU64::new(0);
static ACOS_CLAMPS: AtomicU64 = AtomicU64::new(0);
static GRAD_DENOM_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Cumulative clamp counts since process start (or the last [`reset`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GuardSnapshot {
    pub acosh_clamps: u64,
    pub asin_clamps: u64,
    pub acos_clamps: u64,
    pub grad_denom_clamps: u64,
}

impl GuardSnapshot {
    pub fn total(&self) -> u64 {
        self.acosh_clamps + self.asin_clamps + self.acos_clamps + self.grad_denom_clamps
    }

    /// Trips that happened after `earlier` was taken.
    pub fn since(&self, earlier: &GuardSnapshot) -> GuardSnapshot {
        GuardSnapshot {
            acosh_clamps: self.acosh_clamps - earlier.acosh_clamps,
            asin_clamps: self.asin_clamps - earlier.asin_clamps,
            acos_clamps: self.acos_clamps - earlier.acos_clamps,
            grad_denom_clamps: self.grad_denom_clamps - earlier.grad_denom_clamps,
        }
    }
}

pub fn snapshot() -> GuardSnapshot {
    GuardSnapshot {
        acosh_clamps: ACOSH_CLAMPS.load(Ordering::Relaxed),
        asin_clamps: ASIN_CLAMPS.load(Ordering::Relaxed),
        acos_clamps: ACOS_CLAMPS.load(Ordering::Relaxed),
        grad_denom_clamps: GRAD_DENOM_CLAMPS.load(Ordering::Relaxed),
    }
}

/// Zero all counters. Test-friendly; production code only ever reads deltas.
pub fn reset() {
    ACOSH_CLAMPS.store(0, Ordering::Relaxed);
    ASIN_CLAMPS.store(0, Ordering::Relaxed);
    ACOS_CLAMPS.store(0, Ordering::Relaxed);
    GRAD_DENOM_CLAMPS.store(0, Ordering::Relaxed);
}

/// `acosh` with the argument floored at [`ACOSH_FLOOR`].
#[inline]
pub fn guarded_acosh(arg: f64) -> f64 {
    if arg < ACOSH_FLOOR {
        ACOSH_CLAMPS.fetch_add(1, Ordering::Relaxed);
        ACOSH_FLOOR.acosh()
    } else {
        arg.acosh()
    }
}

/// `asin` with the argument clamped to `[-1, 1]`.
#[inline]
pub fn guarded_asin(arg: f64) -> f64 {
    if !(-1.0..=1.0).contains(&arg) {
        ASIN_CLAMPS.fetch_add(1, Ordering::Relaxed);
        arg.clamp(-1.0, 1.0).asin()
    } else {
        arg.asin()
    }
}

/// `acos` with the argument clamped to `[-1, 1]`.
#[inline]
pub fn guarded_acos(arg: f64) -> f64 {
    if !(-1.0..=1.0).contains(&arg) {
        ACOS_CLAMPS.fetch_add(1, Ordering::Relaxed);
        arg.clamp(-1.0, 1.0).acos()
    } else {
        arg.acos()
    }
}

/// `sqrt` of a gradient denominator, floored at [`GRAD_DENOM_FLOOR`].
#[inline]
pub fn guarded_denom_sqrt(arg: f64) -> f64 {
    if arg < GRAD_DENOM_FLOOR {
        GRAD_DENOM_CLAMPS.fetch_add(1, Ordering::Relaxed);
        GRAD_DENOM_FLOOR.sqrt()
    } else {
        arg.sqrt()
    }
}
