//! Trapped cavity eigenmode and the released, split two-pulse state.
//!
//! Coordinates follow the resonator: the cavity occupies `[0, a]` and the
//! release happens at `t = 0`. Fields are normalized so that
//! `∫ (E² + B²) dx = 1`, i.e. `E² + B²` is the photon's probability density.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cavity length, mode index and wave speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    a: f64,
    n: u32,
    c: f64,
}

impl ModeSpec {
    pub fn new(a: f64, n: u32, c: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param(
                "a",
                format!("cavity length must be positive, got {a}"),
            ));
        }
        if n == 0 {
            return Err(Error::param("n", "mode index must be at least 1"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(
                "c",
                format!("wave speed must be positive, got {c}"),
            ));
        }
        Ok(ModeSpec { a, n, c })
    }

    /// Mode `n` of a unit cavity with unit wave speed.
    pub fn normalized(n: u32) -> Result<Self> {
        ModeSpec::new(1.0, n, 1.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Wave number `nπ/a`.
    pub fn k(&self) -> f64 {
        PI * f64::from(self.n) / self.a
    }

    pub fn omega(&self) -> f64 {
        self.c * self.k()
    }

    /// Eigenmode amplitude `√(2/a)`.
    pub fn amplitude(&self) -> f64 {
        (2.0 / self.a).sqrt()
    }

    /// Amplitude of each free half-pulse, `√(1/(2a))`.
    pub fn pulse_amplitude(&self) -> f64 {
        0.5 * self.amplitude()
    }

    /// `sin(k u)` on `0 ≤ u ≤ a`, zero elsewhere.
    pub fn profile(&self, u: f64) -> f64 {
        if (0.0..=self.a).contains(&u) {
            (self.k() * u).sin()
        } else {
            0.0
        }
    }
}

impl Default for ModeSpec {
    fn default() -> Self {
        ModeSpec {
            a: 1.0,
            n: 1,
            c: 1.0,
        }
    }
}

/// Electric and magnetic field values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub e: f64,
    pub b: f64,
}

impl FieldSample {
    pub const ZERO: FieldSample = FieldSample { e: 0.0, b: 0.0 };

    pub fn new(e: f64, b: f64) -> Self {
        FieldSample { e, b }
    }

    /// `E² + B²`.
    pub fn density(&self) -> f64 {
        self.e * self.e + self.b * self.b
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.b.is_finite()
    }
}

impl std::ops::Add for FieldSample {
    type Output = FieldSample;

    fn add(self, rhs: FieldSample) -> FieldSample {
        FieldSample::new(self.e + rhs.e, self.b + rhs.b)
    }
}

/// Trapped standing-wave eigenmode; zero outside the cavity.
pub fn eigenmode(mode: &ModeSpec, x: f64, t: f64) -> FieldSample {
    if !(0.0..=mode.a).contains(&x) {
        return FieldSample::ZERO;
    }
    let amp = mode.amplitude();
    let (kx, wt) = (mode.k() * x, mode.omega() * t);
    FieldSample::new(amp * kx.sin() * wt.cos(), amp * kx.cos() * wt.sin())
}

/// Analytic boundary residuals of the eigenmode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    /// `|E(0)| + |E(a)|`, maximized over time.
    pub e_value: f64,
    /// `|∂B/∂x(0)| + |∂B/∂x(a)|`, maximized over time.
    pub b_slope: f64,
}

pub fn boundary_check(mode: &ModeSpec) -> BoundaryResidual {
    let amp = mode.amplitude();
    let k = mode.k();
    // The time factors are bounded by one, so the spatial factors are the worst case.
    let e_at = |x: f64| (amp * (k * x).sin()).abs();
    let db_at = |x: f64| (amp * k * (k * x).sin()).abs();
    BoundaryResidual {
        e_value: e_at(0.0) + e_at(mode.a),
        b_slope: db_at(0.0) + db_at(mode.a),
    }
}

/// Right-moving half of the released state.
pub fn right_mover(mode: &ModeSpec, x: f64, t: f64) -> FieldSample {
    let g = mode.pulse_amplitude() * mode.profile(x - mode.c * t);
    FieldSample::new(g, g)
}

/// Left-moving half of the released state.
pub fn left_mover(mode: &ModeSpec, x: f64, t: f64) -> FieldSample {
    let g = mode.pulse_amplitude() * mode.profile(x + mode.c * t);
    FieldSample::new(g, -g)
}

/// Released state: two counter-propagating copies of the cavity profile.
pub fn split_state(mode: &ModeSpec, x: f64, t: f64) -> Result<FieldSample> {
    if !(t >= 0.0) {
        return Err(Error::param(
            "t",
            format!("time must be non-negative, got {t}"),
        ));
    }
    Ok(right_mover(mode, x, t) + left_mover(mode, x, t))
}

/// Extent of the split state while both halves are still free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeReport {
    pub t: f64,
    /// Distance between the outermost edges.
    pub range: f64,
    /// Distance between the two pulse centers.
    pub centers_gap: f64,
}

pub fn nonlocality_range(a: f64, c: f64, t: f64) -> Result<RangeReport> {
    check_geometry(a, c)?;
    if !(t >= 0.0) {
        return Err(Error::param(
            "t",
            format!("time must be non-negative, got {t}"),
        ));
    }
    let centers_gap = 2.0 * c * t;
    Ok(RangeReport {
        t,
        range: centers_gap + a,
        centers_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorTiming {
    /// Maximal non-locality range, reached when reflection completes.
    pub max_range: f64,
    /// Time at which the reflection completes.
    pub completion_time: f64,
}

/// Maximal range and reflection completion time for a mirror at distance `d`
/// from the source center.
pub fn mirror_timing(a: f64, c: f64, d: f64) -> Result<MirrorTiming> {
    check_geometry(a, c)?;
    if !(d > a) {
        return Err(Error::param(
            "D",
            format!("mirror distance must exceed pulse length ({d} <= {a})"),
        ));
    }
    let max_range = 2.0 * d + a;
    Ok(MirrorTiming {
        max_range,
        completion_time: max_range / (2.0 * c),
    })
}

pub(crate) fn check_geometry(a: f64, c: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::param(
            "a",
            format!("pulse length must be positive, got {a}"),
        ));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param(
            "c",
            format!("wave speed must be positive, got {c}"),
        ));
    }
    Ok(())
}
