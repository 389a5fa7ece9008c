//! Where and when each part of the photon meets each instrument.
//!
//! Each half-pulse is treated as a continuum of parcels labelled by their
//! offset `u ∈ [0, a]` from the trailing edge, carrying probability weight
//! `sin²(ku)/a` (a half-pulse holds one half). A parcel moves at `±c`, flips
//! direction at the mirror and, with a blocking source, is absorbed when it
//! returns to `x = a/2`. Superposed parcels never interfere in `E² + B²`, so
//! the parcel weights reproduce the probability density exactly, including
//! inside the standing-wave region near the mirror.
//!
//! Every time that matters for a parcel is affine in `u`, so `[0, a]` splits
//! into sub-intervals on which the ordered list of instrument interactions is
//! fixed. Masses then follow from the closed-form cumulative weight.

use std::collections::BTreeMap;

use super::{Branch, InstrumentKind, Scenario};
use crate::error::Result;
use crate::interval::Interval;
use crate::reflection;
use crate::wavestate;

/// Which half of the split photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pulse {
    Left,
    Right,
}

impl Pulse {
    pub const BOTH: [Pulse; 2] = [Pulse::Left, Pulse::Right];
}

/// `offset + slope·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Affine {
    pub offset: f64,
    pub slope: f64,
}

impl Affine {
    fn new(offset: f64, slope: f64) -> Self {
        Affine { offset, slope }
    }

    fn constant(v: f64) -> Self {
        Affine::new(v, 0.0)
    }

    pub fn at(&self, u: f64) -> f64 {
        self.offset + self.slope * u
    }

    fn root(&self, other: &Affine) -> Option<f64> {
        let ds = self.slope - other.slope;
        (ds != 0.0).then(|| (other.offset - self.offset) / ds)
    }
}

/// A sub-interval of parcel labels sharing one interaction history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub u_lo: f64,
    pub u_hi: f64,
    /// Pulse weight scale times detection probability on this piece.
    pub factor: f64,
    pub time: Affine,
    /// Relative to the source center.
    pub position: Affine,
}

/// One instrument meeting one branch of the photon.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingEvent {
    pub instrument: usize,
    pub branch: Branch,
    pub pulse: Pulse,
    /// Absolute times spanned by the event.
    pub interval: Interval,
    /// Probability that this event produces the click.
    pub mass: f64,
    pub(crate) pieces: Vec<Piece>,
}

/// Parcel weight geometry for one mode.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Weight {
    a: f64,
    k: f64,
}

impl Weight {
    pub fn new(a: f64, k: f64) -> Self {
        Weight { a, k }
    }

    /// `∫₀ᵘ sin²(kv)/a dv`.
    pub fn cumulative(&self, u: f64) -> f64 {
        (0.5 * u - (2.0 * self.k * u).sin() / (4.0 * self.k)) / self.a
    }

    /// Label `u` in `[lo, hi]` at which the cumulative reaches `target`.
    pub fn invert(&self, lo: f64, hi: f64, target: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Instrument geometry shifted to source-centered coordinates.
struct Probe {
    index: usize,
    kind: InstrumentKind,
    position: f64,
    insert: f64,
    remove: f64,
    efficiency: f64,
}

pub(crate) struct Geometry {
    pub a: f64,
    pub c: f64,
    pub mirror: Option<f64>,
    pub blocking: bool,
    pub returning: bool,
}

impl Geometry {
    pub fn of(scenario: &Scenario) -> Self {
        Geometry {
            a: scenario.mode.a(),
            c: scenario.mode.c(),
            mirror: scenario.mirror_distance,
            blocking: scenario.source_blocking,
            returning: scenario.has_returning_pulse(),
        }
    }

    /// `x0 = −a/2 + u`, initial parcel position.
    fn start(&self) -> Affine {
        Affine::new(-0.5 * self.a, 1.0)
    }

    fn branch(&self, pulse: Pulse, reflected: bool) -> Branch {
        match (pulse, reflected, self.returning) {
            (Pulse::Left, _, false) => Branch::Left,
            (Pulse::Left, _, true) => Branch::LeadingPulse,
            (Pulse::Right, true, true) => Branch::TrailingPulse,
            (Pulse::Right, _, _) => Branch::Right,
        }
    }

    /// Time at which the parcel crosses `p`, per leg: (leg reflected?, time).
    fn crossing_times(&self, pulse: Pulse, p: f64) -> Vec<(bool, Affine)> {
        let x0 = self.start();
        let c = self.c;
        match pulse {
            Pulse::Left => vec![(false, Affine::new((x0.offset - p) / c, 1.0 / c))],
            Pulse::Right => {
                let mut legs = vec![(false, Affine::new((p - x0.offset) / c, -1.0 / c))];
                if let Some(d) = self.mirror {
                    legs.push((true, Affine::new((2.0 * d - x0.offset - p) / c, -1.0 / c)));
                }
                legs
            }
        }
    }

    fn reflection_time(&self) -> Option<Affine> {
        let x0 = self.start();
        self.mirror
            .map(|d| Affine::new((d - x0.offset) / self.c, -1.0 / self.c))
    }

    fn absorption_time(&self) -> Option<Affine> {
        let x0 = self.start();
        match (self.mirror, self.blocking) {
            (Some(d), true) => Some(Affine::new(
                (2.0 * d - x0.offset - 0.5 * self.a) / self.c,
                -1.0 / self.c,
            )),
            _ => None,
        }
    }

    /// Position of parcel `u` at absolute time `t`, with the leg, or `None`
    /// once it has been absorbed by the source.
    fn position_at(&self, pulse: Pulse, u: f64, t: f64) -> Option<(bool, Affine)> {
        let x0 = self.start();
        let c = self.c;
        match pulse {
            Pulse::Left => Some((false, Affine::new(x0.offset - c * t, 1.0))),
            Pulse::Right => {
                if let Some(tb) = self.absorption_time() {
                    if t > tb.at(u) {
                        return None;
                    }
                }
                match (self.mirror, self.reflection_time()) {
                    (Some(d), Some(tr)) if t > tr.at(u) => {
                        Some((true, Affine::new(2.0 * d - x0.offset - c * t, -1.0)))
                    }
                    _ => Some((false, Affine::new(x0.offset + c * t, 1.0))),
                }
            }
        }
    }

    /// Whether the parcel actually passes `p` on the given leg.
    fn leg_reaches(&self, pulse: Pulse, reflected: bool, u: f64, p: f64) -> bool {
        let x0 = self.start().at(u);
        match (pulse, reflected) {
            (Pulse::Left, _) => p <= x0,
            (Pulse::Right, false) => p >= x0 && self.mirror.is_none_or(|d| p <= d),
            (Pulse::Right, true) => match self.mirror {
                Some(d) => p <= d && (!self.blocking || p >= 0.5 * self.a),
                None => false,
            },
        }
    }
}

struct Interaction {
    probe: usize,
    time: f64,
    reflected: bool,
    time_fn: Affine,
    position_fn: Affine,
}

fn probes(scenario: &Scenario, include: &[bool]) -> Vec<Probe> {
    scenario
        .instruments
        .iter()
        .enumerate()
        .filter(|(i, _)| include[*i])
        .map(|(index, inst)| Probe {
            index,
            kind: inst.kind,
            position: inst.position - scenario.source_position,
            insert: inst.insertion_time,
            remove: inst.removal_time.unwrap_or(f64::INFINITY),
            efficiency: inst.efficiency,
        })
        .collect()
}

fn interactions(geo: &Geometry, pulse: Pulse, probes: &[Probe], u: f64) -> Vec<Interaction> {
    let mut out = Vec::new();
    for (pi, probe) in probes.iter().enumerate() {
        match probe.kind {
            InstrumentKind::PhotonDetector => {
                for (reflected, tf) in geo.crossing_times(pulse, probe.position) {
                    let t = tf.at(u);
                    if t >= 0.0
                        && geo.leg_reaches(pulse, reflected, u, probe.position)
                        && probe.insert <= t
                        && t <= probe.remove
                    {
                        // detectors inside the source region are not reached by the returning pulse
                        if reflected {
                            if let Some(tb) = geo.absorption_time() {
                                if t > tb.at(u) {
                                    continue;
                                }
                            }
                        }
                        out.push(Interaction {
                            probe: pi,
                            time: t,
                            reflected,
                            time_fn: tf,
                            position_fn: Affine::constant(probe.position),
                        });
                    }
                }
            }
            InstrumentKind::ElectronGun { width } => {
                let shot = probe.insert;
                if let Some((reflected, pos)) = geo.position_at(pulse, u, shot) {
                    let x = pos.at(u);
                    if (x - probe.position).abs() <= 0.5 * width {
                        out.push(Interaction {
                            probe: pi,
                            time: shot,
                            reflected,
                            time_fn: Affine::constant(shot),
                            position_fn: pos,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|p, q| p.time.total_cmp(&q.time).then(p.probe.cmp(&q.probe)));
    out
}

/// Labels in `(0, a)` where the interaction history of a parcel can change.
fn breakpoints(geo: &Geometry, pulse: Pulse, probes: &[Probe]) -> Vec<f64> {
    let mut times: Vec<Affine> = Vec::new();
    let mut constants = vec![0.0];
    let c = geo.c;
    for probe in probes {
        let mut sites = vec![probe.position];
        if let InstrumentKind::ElectronGun { width } = probe.kind {
            sites.push(probe.position - 0.5 * width);
            sites.push(probe.position + 0.5 * width);
        }
        for p in sites {
            times.extend(geo.crossing_times(pulse, p).into_iter().map(|(_, t)| t));
        }
        constants.push(probe.insert);
        if probe.remove.is_finite() {
            constants.push(probe.remove);
        }
    }
    if pulse == Pulse::Right {
        times.extend(geo.reflection_time());
        times.extend(geo.absorption_time());
        if let Some(d) = geo.mirror {
            // leg existence for detectors beyond the source face
            times.extend(geo.crossing_times(pulse, d).into_iter().map(|(_, t)| t));
            times.push(Affine::new(0.5 * geo.a / c, 0.0));
        }
    }
    let mut roots = Vec::new();
    for (i, f) in times.iter().enumerate() {
        for &k in &constants {
            roots.extend(f.root(&Affine::constant(k)));
        }
        for g in &times[..i] {
            roots.extend(f.root(g));
        }
    }
    let a = geo.a;
    let mut pts: Vec<f64> = roots
        .into_iter()
        .filter(|u| u.is_finite() && *u > 0.0 && *u < a)
        .collect();
    pts.push(0.0);
    pts.push(a);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * a);
    pts
}

/// Events for the selected pulses, masses scaled by `scale`, restricted to
/// the instruments flagged in `include`.
pub(crate) fn events_for(
    scenario: &Scenario,
    pulses: &[Pulse],
    scale: f64,
    include: &[bool],
) -> Vec<CrossingEvent> {
    let geo = Geometry::of(scenario);
    let weight = Weight::new(geo.a, scenario.mode.k());
    let probes = probes(scenario, include);
    let mut grouped: BTreeMap<(usize, Branch, Pulse), Vec<Piece>> = BTreeMap::new();
    for &pulse in pulses {
        let pts = breakpoints(&geo, pulse, &probes);
        for w in pts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= 1e-14 * geo.a {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let mut survival = 1.0;
            for hit in interactions(&geo, pulse, &probes, mid) {
                let probe = &probes[hit.probe];
                let p = survival * probe.efficiency;
                survival *= 1.0 - probe.efficiency;
                if p > 0.0 {
                    grouped
                        .entry((probe.index, geo.branch(pulse, hit.reflected), pulse))
                        .or_default()
                        .push(Piece {
                            u_lo: lo,
                            u_hi: hi,
                            factor: scale * p,
                            time: hit.time_fn,
                            position: hit.position_fn,
                        });
                }
                if survival == 0.0 {
                    break;
                }
            }
        }
    }
    let mut events: Vec<CrossingEvent> = grouped
        .into_iter()
        .filter_map(|((instrument, branch, pulse), pieces)| {
            let mass: f64 = pieces
                .iter()
                .map(|pc| pc.factor * (weight.cumulative(pc.u_hi) - weight.cumulative(pc.u_lo)))
                .sum();
            if mass <= 1e-14 {
                return None;
            }
            let (t_lo, t_hi) =
                pieces
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), pc| {
                        let (t0, t1) = (pc.time.at(pc.u_lo), pc.time.at(pc.u_hi));
                        (lo.min(t0).min(t1), hi.max(t0).max(t1))
                    });
            Some(CrossingEvent {
                instrument,
                branch,
                pulse,
                interval: Interval::closed(t_lo, t_hi),
                mass,
                pieces,
            })
        })
        .collect();
    events.sort_by(|p, q| {
        p.interval
            .lo
            .total_cmp(&q.interval.lo)
            .then(p.instrument.cmp(&q.instrument))
    });
    events
}

/// Born-rule crossing events of every instrument, ordered by start time.
pub fn crossing_events(scenario: &Scenario) -> Result<Vec<CrossingEvent>> {
    scenario.validate()?;
    let include = vec![true; scenario.instruments.len()];
    Ok(events_for(scenario, &Pulse::BOTH, 1.0, &include))
}

/// Photon probability density at absolute position `x` and time `t`,
/// assembled from the free-pulse and reflection field expressions.
///
/// Parts of the reflected pulse absorbed by a blocking source are excluded.
/// Instruments are ignored.
pub fn scenario_density(scenario: &Scenario, x: f64, t: f64) -> Result<f64> {
    scenario.validate()?;
    let mode = &scenario.mode;
    let (a, c) = (mode.a(), mode.c());
    let xr = x - scenario.source_position;
    // free-state coordinates put the cavity on [0, a]
    let xc = xr + 0.5 * a;
    let left = wavestate::left_mover(mode, xc, t).density();
    let right = match scenario.mirror_distance {
        None => wavestate::right_mover(mode, xc, t).density(),
        Some(d) => {
            if xr > d {
                0.0
            } else {
                let s = c * t - (d - 0.5 * a);
                if s <= 0.0 {
                    wavestate::right_mover(mode, xc, t).density()
                } else if s <= a {
                    // a lone half-pulse carries half of the reflection density
                    0.5 * reflection::density(mode, s, xr - d)?
                } else {
                    // free reflected pulse: mirror image of an unreflected copy
                    let mirrored = 2.0 * d - xr + 0.5 * a;
                    let absorbed = scenario.source_blocking && xr < 0.5 * a;
                    if absorbed {
                        0.0
                    } else {
                        wavestate::right_mover(mode, mirrored, t).density()
                    }
                }
            }
        }
    };
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Instrument, Scenario};
    use crate::validation::integrate_piecewise;
    use crate::wavestate::ModeSpec;

    fn base() -> Scenario {
        Scenario::new(ModeSpec::default()).with_mirror(5.0)
    }

    #[test]
    fn weight_halves() {
        let w = Weight::new(1.0, std::f64::consts::PI);
        assert!((w.cumulative(1.0) - 0.5).abs() < 1e-15);
        let u = w.invert(0.0, 1.0, 0.25);
        assert!((u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_right_detector() {
        let s = base().with_instrument(Instrument::detector("D", 3.0, 1.0));
        let ev = crossing_events(&s).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].mass - 0.5).abs() < 1e-14);
        assert!((ev[0].interval.lo - 2.5).abs() < 1e-14);
        assert!((ev[0].interval.hi - 3.5).abs() < 1e-14);
        assert_eq!(ev[0].branch, Branch::Right);
    }

    #[test]
    fn detector_behind_reflected_pulse_sees_nothing() {
        let s = base()
            .transparent_source()
            .with_instrument(Instrument::detector("D", 3.0, 8.0));
        assert!(crossing_events(&s).unwrap().is_empty());
    }

    #[test]
    fn returning_pulse_in_front_of_both() {
        let s = base()
            .transparent_source()
            .with_instrument(Instrument::detector("D", -12.0, 8.0));
        let ev = crossing_events(&s).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].branch, Branch::LeadingPulse);
        assert_eq!(ev[1].branch, Branch::TrailingPulse);
        let gap = ev[1].interval.lo - ev[0].interval.lo;
        assert!((gap - 10.0).abs() < 1e-12);
        assert!((ev[0].mass + ev[1].mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn upstream_detector_shadows_downstream() {
        let s = base()
            .transparent_source()
            .with_instrument(Instrument::detector("far", -5.0, 8.0))
            .with_instrument(Instrument::detector("near", -3.0, 8.0));
        let ev = crossing_events(&s).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(s.instruments[ev[0].instrument].id, "near");
        assert!((ev[0].mass - 0.5).abs() < 1e-14);
    }

    #[test]
    fn blocking_source_absorbs_returning_pulse() {
        let s = base().with_instrument(Instrument::detector("L", -3.0, 6.0));
        // the left pulse already passed -3 by t = 3.5 and the reflected one is absorbed
        assert!(crossing_events(&s).unwrap().is_empty());
    }

    #[test]
    fn partial_efficiency_passes_the_rest() {
        let s = base()
            .transparent_source()
            .with_instrument(Instrument::detector("near", -3.0, 8.0).with_efficiency(0.25))
            .with_instrument(Instrument::detector("far", -5.0, 8.0));
        let ev = crossing_events(&s).unwrap();
        let mass = |id: &str| -> f64 {
            ev.iter()
                .filter(|e| s.instruments[e.instrument].id == id)
                .map(|e| e.mass)
                .sum()
        };
        assert!((mass("near") - 0.125).abs() < 1e-14);
        assert!((mass("far") - 0.375).abs() < 1e-14);
    }

    #[test]
    fn gun_mass_matches_density_integral() {
        // shot in the middle of the reflection
        for shot in [4.6, 5.0, 5.3] {
            let s = base().with_instrument(Instrument::electron_gun("G", 4.5, 1.0, shot));
            let ev = crossing_events(&s).unwrap();
            let mass: f64 = ev.iter().map(|e| e.mass).sum();
            let sr = shot - 4.5;
            let mut cuts: Vec<f64> = vec![4.0, 5.0, 5.0 - sr, 4.0 + sr, 5.0 - sr.min(1.0 - sr)];
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let q = integrate_piecewise(|x| scenario_density(&s, x, shot).unwrap(), &cuts, 1e-11)
                .unwrap();
            assert!((mass - 0.5).abs() < 1e-12, "shot {shot}: {mass}");
            assert!((q.value - 0.5).abs() < 1e-8, "shot {shot}: {}", q.value);
        }
    }

    #[test]
    fn late_insertion_keeps_unpassed_fraction() {
        let s0 = base();
        // mass of the right pulse still left of x = 3 at time t, by quadrature
        let unpassed = |t: f64| {
            let lo = t - 0.5;
            integrate_piecewise(|x| scenario_density(&s0, x, t).unwrap(), &[lo, 3.0], 1e-12)
                .unwrap()
                .value
        };
        let (mut lo, mut hi) = (2.5, 3.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if unpassed(mid) > 0.3 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_insert = 0.5 * (lo + hi);
        // removed before the reflected pulse comes back past x = 3
        let s = base().with_instrument(Instrument::detector("D", 3.0, t_insert).removed_at(5.0));
        let ev = crossing_events(&s).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].mass - 0.3).abs() < 1e-9, "{}", ev[0].mass);
    }

    proptest::proptest! {
        #[test]
        fn gun_mass_equals_density_mass(pos in -8.0f64..6.0, width in 0.05f64..2.0, shot in 0.0f64..9.0) {
            let s = base()
                .transparent_source()
                .with_instrument(Instrument::electron_gun("G", pos, width, shot));
            let mass: f64 = crossing_events(&s).unwrap().iter().map(|e| e.mass).sum();
            let (lo, hi) = (pos - 0.5 * width, (pos + 0.5 * width).min(5.0));
            let mut cuts = vec![lo, hi];
            // kinks of the free pulses and of the reflecting one
            let r = shot - 4.5;
            for x in [-shot - 0.5, -shot + 0.5, shot - 0.5, shot + 0.5, 5.0 - r, 4.0 + r,
                      5.0 - r.min(1.0 - r), 10.0 - shot - 0.5, 10.0 - shot + 0.5] {
                if x > lo && x < hi {
                    cuts.push(x);
                }
            }
            cuts.sort_by(f64::total_cmp);
            let q = if hi > lo {
                integrate_piecewise(|x| scenario_density(&s, x, shot).unwrap(), &cuts, 1e-11)
                    .unwrap()
                    .value
            } else {
                0.0
            };
            proptest::prop_assert!((mass - q).abs() < 1e-7, "mass {} density {}", mass, q);
        }
    }

    #[test]
    fn trailing_edge_reaches_mirror_at_completion_time() {
        let s = base();
        let geo = Geometry::of(&s);
        let tr = geo.reflection_time().unwrap();
        let t = wavestate::mirror_timing(1.0, 1.0, 5.0).unwrap();
        assert!((tr.at(0.0) - t.completion_time).abs() < 1e-15);
        let s = Scenario::new(ModeSpec::new(2.0, 1, 0.5).unwrap()).with_mirror(4.0);
        let tr = Geometry::of(&s).reflection_time().unwrap();
        assert!((tr.at(0.0) - 10.0).abs() < 1e-14);
    }
}
