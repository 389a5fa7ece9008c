//! Sampled field snapshots on uniform grids.

use crate::error::{Error, Result};
use crate::reflection::PiecewiseField;
use crate::wavestate::{self, FieldSample, ModeSpec};

/// What a snapshot's time parameter refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// Trapped eigenmode at time `t`.
    Cavity { t: f64 },
    /// Released split state at time `t` after release.
    Free { t: f64 },
    /// Reflection, trailing edge having travelled `s`.
    Reflection { s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub phase: Phase,
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub rho: Vec<f64>,
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        hi
                    } else {
                        lo + i as f64 * h
                    }
                })
                .collect()
        }
    }
}

impl Snapshot {
    pub fn sample(
        phase: Phase,
        lo: f64,
        hi: f64,
        points: usize,
        f: impl Fn(f64) -> FieldSample,
    ) -> Result<Self> {
        if points < 2 {
            return Err(Error::GridTooCoarse { points, min: 2 });
        }
        if !(lo < hi) {
            return Err(Error::param(
                "grid",
                format!("empty sampling range [{lo}, {hi}]"),
            ));
        }
        let x = linspace(lo, hi, points);
        let samples: Vec<FieldSample> = x.iter().map(|&xi| f(xi)).collect();
        Ok(Snapshot {
            phase,
            e: samples.iter().map(|s| s.e).collect(),
            b: samples.iter().map(|s| s.b).collect(),
            rho: samples.iter().map(FieldSample::density).collect(),
            x,
        })
    }

    /// Eigenmode over the cavity `[0, a]`.
    pub fn cavity(mode: &ModeSpec, t: f64, points: usize) -> Result<Self> {
        Self::sample(Phase::Cavity { t }, 0.0, mode.a(), points, |x| {
            wavestate::eigenmode(mode, x, t)
        })
    }

    /// Split state over its support `[−ct, a + ct]`.
    pub fn free(mode: &ModeSpec, t: f64, points: usize) -> Result<Self> {
        wavestate::split_state(mode, 0.0, t)?;
        let reach = mode.c() * t;
        Self::sample(Phase::Free { t }, -reach, mode.a() + reach, points, |x| {
            wavestate::split_state(mode, x, t).unwrap_or_default()
        })
    }

    /// Reflecting pulse over `[−a, 0]`.
    pub fn reflection(mode: &ModeSpec, s: f64, points: usize) -> Result<Self> {
        Self::reflection_on(mode, s, -mode.a(), 0.0, points)
    }

    pub fn reflection_on(mode: &ModeSpec, s: f64, lo: f64, hi: f64, points: usize) -> Result<Self> {
        let field = PiecewiseField::reflection(mode, s)?;
        Self::sample(Phase::Reflection { s }, lo, hi, points, |x| field.eval(x))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn grid_step(&self) -> f64 {
        match self.x.len() {
            0 | 1 => 0.0,
            n => (self.x[n - 1] - self.x[0]) / (n - 1) as f64,
        }
    }
}
