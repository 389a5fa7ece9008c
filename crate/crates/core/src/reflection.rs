//! Normal-incidence reflection of one length-`a` pulse from an ideal mirror
//! at `x = 0`.
//!
//! The process is parameterized by the distance `s ∈ [0, a]` travelled by
//! the trailing edge since the leading edge touched the mirror (`t = s/c`).
//! Near the mirror the incident and reflected parts superpose into a
//! standing wave (SW); the rest of the pulse is a running wave (RW). For
//! `s ≤ a/2` the RW is the incident tail, afterwards it is the reflected
//! head.
//!
//! Field values carry the prefactor `1/√a`, so `E² + B²` integrates to one.
//! The energy ledger is reported without that prefactor and sums to `a`.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::wavestate::{FieldSample, ModeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `s ≤ a/2`: the SW domain grows and the inner discontinuity moves away
    /// from the mirror.
    First,
    /// `s ≥ a/2`: the SW domain shrinks and the discontinuity returns.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPhase {
    pub s: f64,
    pub stage: Stage,
}

impl ReflectionPhase {
    pub fn new(a: f64, s: f64) -> Result<Self> {
        check_s(a, s)?;
        let stage = if s <= 0.5 * a {
            Stage::First
        } else {
            Stage::Second
        };
        Ok(ReflectionPhase { s, stage })
    }
}

fn check_s(a: f64, s: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::param(
            "a",
            format!("pulse length must be positive, got {a}"),
        ));
    }
    if !(0.0..=a).contains(&s) {
        return Err(Error::param(
            "s",
            format!("reflection parameter must lie in [0, {a}], got {s}"),
        ));
    }
    Ok(())
}

/// Running-wave and standing-wave domains at one instant.
///
/// Either may degenerate to a single point; they touch at the inner
/// discontinuity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSplit {
    pub rw: Interval,
    pub sw: Interval,
}

pub fn domains(a: f64, s: f64) -> Result<DomainSplit> {
    check_s(a, s)?;
    Ok(if s <= 0.5 * a {
        DomainSplit {
            rw: Interval::closed(-a + s, -s),
            sw: Interval::closed(-s, 0.0),
        }
    } else {
        DomainSplit {
            rw: Interval::closed(-s, -a + s),
            sw: Interval::closed(-a + s, 0.0),
        }
    })
}

/// Position of the inner discontinuity, `−min(s, a − s)`, for `0 < s < a`.
pub fn inner_location(a: f64, s: f64) -> Option<f64> {
    (s > 0.0 && s < a).then(|| -s.min(a - s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    EValue,
    BValue,
    DeDx,
    DbDx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscontinuityKind {
    Edge,
    Inner,
    MirrorSurface,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscontinuityRecord {
    pub location: f64,
    pub quantity: Quantity,
    /// Right limit minus left limit.
    pub jump: f64,
    pub kind: DiscontinuityKind,
}

impl DiscontinuityRecord {
    pub fn magnitude(&self) -> f64 {
        self.jump.abs()
    }
}

/// Analytic shape of one segment, before the `1/√a` prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentShape {
    /// `E = e_sign·sin k(x − offset)`, `B = b_sign·sin k(x − offset)`.
    Running {
        e_sign: f64,
        b_sign: f64,
        offset: f64,
    },
    /// `E = −2 sin kx · cos ks`, `B = 2 cos kx · sin ks`.
    Standing { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub domain: Interval,
    pub shape: SegmentShape,
}

/// Value and slope of both fields at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Limit {
    pub value: FieldSample,
    pub slope: FieldSample,
}

impl Limit {
    fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::EValue => self.value.e,
            Quantity::BValue => self.value.b,
            Quantity::DeDx => self.slope.e,
            Quantity::DbDx => self.slope.b,
        }
    }
}

/// Exact piecewise description of the reflecting pulse: ordered non-empty
/// segments, zero everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    k: f64,
    prefactor: f64,
    phase: ReflectionPhase,
    segments: Vec<Segment>,
}

impl PiecewiseField {
    pub fn reflection(mode: &ModeSpec, s: f64) -> Result<Self> {
        let phase = ReflectionPhase::new(mode.a(), s)?;
        Ok(Self::build(mode, phase))
    }

    /// Builds with an explicit stage. Both stages are accepted at `s = a/2`,
    /// where they must agree.
    pub fn with_stage(mode: &ModeSpec, s: f64, stage: Stage) -> Result<Self> {
        let natural = ReflectionPhase::new(mode.a(), s)?;
        if natural.stage != stage && s != 0.5 * mode.a() {
            return Err(Error::param(
                "stage",
                format!("{stage:?} is not valid at s = {s}"),
            ));
        }
        Ok(Self::build(mode, ReflectionPhase { s, stage }))
    }

    fn build(mode: &ModeSpec, phase: ReflectionPhase) -> Self {
        let a = mode.a();
        let s = phase.s;
        let (rw, sw, running) = match phase.stage {
            Stage::First => (
                Interval::closed(-a + s, -s),
                Interval::closed(-s, 0.0),
                SegmentShape::Running {
                    e_sign: -1.0,
                    b_sign: -1.0,
                    offset: s,
                },
            ),
            Stage::Second => (
                Interval::closed(-s, -a + s),
                Interval::closed(-a + s, 0.0),
                SegmentShape::Running {
                    e_sign: -1.0,
                    b_sign: 1.0,
                    offset: -s,
                },
            ),
        };
        let mut segments = Vec::with_capacity(2);
        if rw.length() > 0.0 {
            segments.push(Segment {
                domain: rw,
                shape: running,
            });
        }
        if sw.length() > 0.0 {
            segments.push(Segment {
                domain: sw,
                shape: SegmentShape::Standing { s },
            });
        }
        PiecewiseField {
            k: mode.k(),
            prefactor: 1.0 / a.sqrt(),
            phase,
            segments,
        }
    }

    pub fn phase(&self) -> ReflectionPhase {
        self.phase
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn support(&self) -> Interval {
        match (self.segments.first(), self.segments.last()) {
            (Some(first), Some(last)) => Interval::closed(first.domain.lo, last.domain.hi),
            _ => Interval::EMPTY,
        }
    }

    /// Sorted segment borders, including both support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|seg| [seg.domain.lo, seg.domain.hi])
            .collect();
        pts.dedup();
        pts
    }

    fn limit_of(&self, seg: &Segment, x: f64) -> Limit {
        let k = self.k;
        let p = self.prefactor;
        match seg.shape {
            SegmentShape::Running {
                e_sign,
                b_sign,
                offset,
            } => {
                let (sin, cos) = (k * (x - offset)).sin_cos();
                Limit {
                    value: FieldSample::new(p * e_sign * sin, p * b_sign * sin),
                    slope: FieldSample::new(p * e_sign * k * cos, p * b_sign * k * cos),
                }
            }
            SegmentShape::Standing { s } => {
                let (sx, cx) = (k * x).sin_cos();
                let (ss, cs) = (k * s).sin_cos();
                Limit {
                    value: FieldSample::new(-2.0 * p * sx * cs, 2.0 * p * cx * ss),
                    slope: FieldSample::new(-2.0 * p * k * cx * cs, -2.0 * p * k * sx * ss),
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> FieldSample {
        if x > 0.0 {
            return FieldSample::ZERO;
        }
        self.segments
            .iter()
            .find(|seg| seg.domain.contains(x))
            .map_or(FieldSample::ZERO, |seg| self.limit_of(seg, x).value)
    }

    /// Left and right limits of values and slopes at `x`.
    pub fn one_sided(&self, x: f64) -> (Limit, Limit) {
        let left = self
            .segments
            .iter()
            .find(|seg| seg.domain.lo < x && x <= seg.domain.hi)
            .map_or_else(Limit::default, |seg| self.limit_of(seg, x));
        let right = self
            .segments
            .iter()
            .find(|seg| seg.domain.lo <= x && x < seg.domain.hi && x <= 0.0)
            .map_or_else(Limit::default, |seg| self.limit_of(seg, x));
        (left, right)
    }
}

/// Field at `x` after the trailing edge has travelled `s`.
pub fn reflect_field(mode: &ModeSpec, s: f64, x: f64) -> Result<FieldSample> {
    Ok(PiecewiseField::reflection(mode, s)?.eval(x))
}

/// Probability density from the closed-form density expressions.
pub fn density(mode: &ModeSpec, s: f64, x: f64) -> Result<f64> {
    let a = mode.a();
    let DomainSplit { rw, sw } = domains(a, s)?;
    let k = mode.k();
    if x > 0.0 {
        return Ok(0.0);
    }
    if sw.length() > 0.0 && sw.contains(x) {
        let (sx, cx) = (k * x).sin_cos();
        let (ss, cs) = (k * s).sin_cos();
        return Ok(4.0 / a * (sx * sx * cs * cs + cx * cx * ss * ss));
    }
    if rw.contains(x) {
        let shifted = if s <= 0.5 * a { x - s } else { x + s };
        return Ok(2.0 / a * (k * shifted).sin().powi(2));
    }
    Ok(0.0)
}

/// Every jump in value or slope of either field at `s`.
///
/// Inner records appear only for `0 < s < a`. At `s = a/2` the far edge
/// coincides with the inner discontinuity and is reported as inner.
pub fn discontinuities(mode: &ModeSpec, s: f64) -> Result<Vec<DiscontinuityRecord>> {
    let field = PiecewiseField::reflection(mode, s)?;
    let a = mode.a();
    let inner = inner_location(a, s);
    let mut borders = field.breakpoints();
    if borders.last() != Some(&0.0) {
        borders.push(0.0);
    }
    let value_scale = field.prefactor();
    let slope_scale = field.prefactor() * mode.k();
    let mut out = Vec::new();
    for x in borders {
        let kind = match inner {
            Some(_) if x == 0.0 => DiscontinuityKind::MirrorSurface,
            Some(xd) if (x - xd).abs() <= 1e-12 * a => DiscontinuityKind::Inner,
            _ => DiscontinuityKind::Edge,
        };
        let (left, right) = field.one_sided(x);
        for q in [
            Quantity::EValue,
            Quantity::BValue,
            Quantity::DeDx,
            Quantity::DbDx,
        ] {
            let jump = right.get(q) - left.get(q);
            let scale = match q {
                Quantity::EValue | Quantity::BValue => value_scale,
                Quantity::DeDx | Quantity::DbDx => slope_scale,
            };
            if jump.abs() > 1e-12 * scale {
                out.push(DiscontinuityRecord {
                    location: x,
                    quantity: q,
                    jump,
                    kind,
                });
            }
        }
    }
    Ok(out)
}

/// Energies in the RW and SW domains, unnormalized (they sum to `a`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedger {
    pub a: f64,
    pub e_rw: f64,
    pub e_e_sw: f64,
    pub e_b_sw: f64,
    pub e_sw: f64,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.e_rw + self.e_sw
    }

    /// `(e_rw + e_sw)/a`, which should be one.
    pub fn normalized_total(&self) -> f64 {
        self.total() / self.a
    }
}

pub fn energy_ledger(mode: &ModeSpec, s: f64) -> Result<EnergyLedger> {
    let a = mode.a();
    check_s(a, s)?;
    let k = mode.k();
    let (s2, c2) = ((k * s).sin().powi(2), (k * s).cos().powi(2));
    let sin2 = (2.0 * k * s).sin() / (2.0 * k);
    let sin4 = (4.0 * k * s).sin() / (2.0 * k);
    let ledger = if s <= 0.5 * a {
        EnergyLedger {
            a,
            e_rw: a - 2.0 * s + sin4,
            e_e_sw: 2.0 * (s - sin2) * c2,
            e_b_sw: 2.0 * (s + sin2) * s2,
            e_sw: 2.0 * s - sin4,
        }
    } else {
        EnergyLedger {
            a,
            e_rw: 2.0 * s - a - sin4,
            e_e_sw: (2.0 * (a - s) + 2.0 * sin2) * c2,
            e_b_sw: (2.0 * (a - s) - 2.0 * sin2) * s2,
            e_sw: 2.0 * (a - s) + sin4,
        }
    };
    Ok(ledger)
}
