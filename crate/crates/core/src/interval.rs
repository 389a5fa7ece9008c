//! Real intervals used for spatial domains and time windows.

use std::fmt;

/// An interval `[lo, hi]` (or `(lo, hi)` when `closed` is false).
///
/// Degenerate closed intervals with `lo == hi` are single points and are not empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: 0.0,
        hi: 0.0,
        closed: false,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            closed: true,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            closed: false,
        }
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        if self.closed {
            self.lo > self.hi
        } else {
            self.lo >= self.hi
        }
    }

    pub fn is_point(&self) -> bool {
        self.closed && self.lo == self.hi
    }

    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.closed {
            self.lo <= x && x <= self.hi
        } else {
            self.lo < x && x < self.hi
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else if self.closed {
            write!(f, "[{}, {}]", self.lo, self.hi)
        } else {
            write!(f, "({}, {})", self.lo, self.hi)
        }
    }
}
