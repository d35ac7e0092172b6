//! Simulation time base.
//!
//! All timing in the simulator is carried as integer nanoseconds so that
//! interval arithmetic is exact: power-state timelines must partition the
//! simulated horizon without gaps or overlap, and two runs with the same
//! inputs must agree to the last bit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

/// A duration or instant on the simulated clock, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Nanos(pub u64);

impl Nanos {
    pub const ZERO: Nanos = Nanos(0);

    pub fn from_us(us: u64) -> Self {
        Nanos(us * 1_000)
    }

    pub fn from_ms(ms: u64) -> Self {
        Nanos(ms * 1_000_000)
    }

    /// Rounds a fractional microsecond value to the nearest nanosecond.
    /// Negative inputs clamp to zero.
    pub fn from_us_f64(us: f64) -> Self {
        Nanos((us * 1e3).round().max(0.0) as u64)
    }

    pub fn as_us_f64(self) -> f64 {
        self.0 as f64 / 1e3
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, rhs: Nanos) -> Nanos {
        Nanos(self.0.saturating_sub(rhs.0))
    }
}

impl Add for Nanos {
    type Output = Nanos;
    fn add(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 + rhs.0)
    }
}

impl AddAssign for Nanos {
    fn add_assign(&mut self, rhs: Nanos) {
        self.0 += rhs.0;
    }
}

impl Sub for Nanos {
    type Output = Nanos;
    fn sub(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 - rhs.0)
    }
}

impl Mul<u64> for Nanos {
    type Output = Nanos;
    fn mul(self, rhs: u64) -> Nanos {
        Nanos(self.0 * rhs)
    }
}

impl Sum for Nanos {
    fn sum<I: Iterator<Item = Nanos>>(iter: I) -> Nanos {
        Nanos(iter.map(|n| n.0).sum())
    }
}

impl fmt::Display for Nanos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// Half-open interval `[start, end)` on the simulated clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: Nanos,
    pub end: Nanos,
}

impl Interval {
    pub fn new(start: Nanos, end: Nanos) -> Self {
        debug_assert!(start <= end, "interval start after end");
        Interval { start, end }
    }

    pub fn duration(&self) -> Nanos {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Clips the interval to `[0, horizon)`.
    pub fn clip(&self, horizon: Nanos) -> Interval {
        Interval {
            start: self.start.min(horizon),
            end: self.end.min(horizon),
        }
    }
}
