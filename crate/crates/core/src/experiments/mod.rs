//! Delayed-choice arrangements around the split photon.
//!
//! Coordinates here put the origin at the source center: both half-pulses
//! start on `[−a/2, a/2]` and the optional mirror sits at `x = D`. An
//! arrangement ([`Scenario`]) lists photon detectors (points swept by the
//! pulses while they are inserted) and electron guns (instantaneous position
//! probes of a region), and picks one of two outcome models:
//!
//! * [`OutcomeModel::ConventionalQm`]: Born-rule sampling over the crossing
//!   events, each event carrying its share of the photon's probability.
//! * [`OutcomeModel::PreferredWay`]: the comparator in which the whole
//!   photon routes itself toward the first inserted instrument it can reach.

mod kinematics;
mod sampling;
mod stats;

use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::wavestate::{self, ModeSpec};

pub use kinematics::{crossing_events, scenario_density, CrossingEvent, Pulse};
pub use sampling::{eg_scatter, sample_trial, Click, Experiment, TrialOutcome};
pub use stats::{
    chi_squared_goodness, chi_squared_homogeneity, run, run_with_outcomes, wilson_interval,
    ChiSquaredTest, Histogram, InstrumentStats, StatsReport,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstrumentKind {
    /// Absorbs whatever part of the photon sweeps its position while inserted.
    PhotonDetector,
    /// Probes `[position − width/2, position + width/2]` at its insertion time.
    ElectronGun { width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub id: String,
    pub kind: InstrumentKind,
    pub position: f64,
    /// For electron guns this is the shot time.
    pub insertion_time: f64,
    pub removal_time: Option<f64>,
    pub efficiency: f64,
}

impl Instrument {
    pub fn detector(id: impl Into<String>, position: f64, insertion_time: f64) -> Self {
        Instrument {
            id: id.into(),
            kind: InstrumentKind::PhotonDetector,
            position,
            insertion_time,
            removal_time: None,
            efficiency: 1.0,
        }
    }

    pub fn electron_gun(id: impl Into<String>, position: f64, width: f64, shot_time: f64) -> Self {
        Instrument {
            id: id.into(),
            kind: InstrumentKind::ElectronGun { width },
            position,
            insertion_time: shot_time,
            removal_time: None,
            efficiency: 1.0,
        }
    }

    pub fn removed_at(mut self, t: f64) -> Self {
        self.removal_time = Some(t);
        self
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        self.efficiency = efficiency;
        self
    }

    pub fn is_gun(&self) -> bool {
        matches!(self.kind, InstrumentKind::ElectronGun { .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(format!("instrument `{}`: {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::Scenario("instrument id must not be empty".into()));
        }
        if !self.position.is_finite() {
            return bad("position must be finite".into());
        }
        if !(self.insertion_time.is_finite() && self.insertion_time >= 0.0) {
            return bad("insertion time must be non-negative".into());
        }
        if let Some(r) = self.removal_time {
            if !(r > self.insertion_time) {
                return bad("removal time must exceed insertion time".into());
            }
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return bad("efficiency must lie in [0, 1]".into());
        }
        if let InstrumentKind::ElectronGun { width } = self.kind {
            if !(width.is_finite() && width > 0.0) {
                return bad("electron gun width must be positive".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutcomeModel {
    #[default]
    ConventionalQm,
    PreferredWay,
}

impl OutcomeModel {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeModel::ConventionalQm => "qm",
            OutcomeModel::PreferredWay => "preferred-way",
        }
    }
}

impl fmt::Display for OutcomeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OutcomeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qm" | "conventional-qm" | "conventional" => Ok(OutcomeModel::ConventionalQm),
            "preferred-way" | "preferred" => Ok(OutcomeModel::PreferredWay),
            other => Err(Error::Scenario(format!("unknown outcome model `{other}`"))),
        }
    }
}

/// How the comparator model picks between several reachable instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieRule {
    #[default]
    EarliestInserted,
    /// The instrument the photon could reach first.
    Closest,
}

impl TieRule {
    pub fn name(&self) -> &'static str {
        match self {
            TieRule::EarliestInserted => "earliest-inserted",
            TieRule::Closest => "closest",
        }
    }
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "earliest-inserted" => Ok(TieRule::EarliestInserted),
            "closest" => Ok(TieRule::Closest),
            other => Err(Error::Scenario(format!("unknown tie rule `{other}`"))),
        }
    }
}

/// Which part of the split photon an outcome resolved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Left,
    Right,
    /// The free left-mover, once the reflected pulse follows it.
    LeadingPulse,
    /// The reflected pulse travelling behind the leading one.
    TrailingPulse,
    None,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Left => "left",
            Branch::Right => "right",
            Branch::LeadingPulse => "leading",
            Branch::TrailingPulse => "trailing",
            Branch::None => "none",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: ModeSpec,
    pub source_position: f64,
    /// Distance from the source center to the mirror; `None` is free space.
    pub mirror_distance: Option<f64>,
    /// When set, the returning reflected pulse is absorbed at the source's
    /// right face `x = a/2`.
    pub source_blocking: bool,
    /// Relative phase of the two halves; carried along, never observable here.
    pub eta: f64,
    /// Whether the comparator model treats the mirror as a detector.
    pub mirror_is_detector: bool,
    pub tie_rule: TieRule,
    pub instruments: Vec<Instrument>,
    pub model: OutcomeModel,
    pub trials: u64,
    pub seed: u64,
}

impl Scenario {
    pub const DEFAULT_TRIALS: u64 = 100_000;

    pub fn new(mode: ModeSpec) -> Self {
        Scenario {
            mode,
            source_position: 0.0,
            mirror_distance: None,
            source_blocking: true,
            eta: 0.0,
            mirror_is_detector: false,
            tie_rule: TieRule::default(),
            instruments: Vec::new(),
            model: OutcomeModel::default(),
            trials: Self::DEFAULT_TRIALS,
            seed: 0,
        }
    }

    pub fn with_mirror(mut self, d: f64) -> Self {
        self.mirror_distance = Some(d);
        self
    }

    pub fn transparent_source(mut self) -> Self {
        self.source_blocking = false;
        self
    }

    pub fn with_instrument(mut self, instrument: Instrument) -> Self {
        self.instruments.push(instrument);
        self
    }

    pub fn with_model(mut self, model: OutcomeModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn instrument_index(&self, id: &str) -> Option<usize> {
        self.instruments.iter().position(|i| i.id == id)
    }

    /// Whether the reflected pulse can come back past the source.
    pub fn has_returning_pulse(&self) -> bool {
        self.mirror_distance.is_some() && !self.source_blocking
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.mode.a();
        if !self.source_position.is_finite() {
            return Err(Error::Scenario("source position must be finite".into()));
        }
        if let Some(d) = self.mirror_distance {
            if !(d.is_finite() && d > a) {
                return Err(Error::Scenario(format!(
                    "mirror distance must exceed pulse length (D = {d}, a = {a})"
                )));
            }
        }
        if !self.eta.is_finite() {
            return Err(Error::Scenario("phase eta must be finite".into()));
        }
        if self.trials == 0 {
            return Err(Error::Scenario("trial count must be at least 1".into()));
        }
        for (i, inst) in self.instruments.iter().enumerate() {
            inst.validate()?;
            for other in &self.instruments[..i] {
                if other.id == inst.id {
                    return Err(Error::Scenario(format!(
                        "duplicate instrument id `{}`",
                        inst.id
                    )));
                }
                if other.position == inst.position {
                    return Err(Error::Scenario(format!(
                        "instrument positions must be distinct (`{}` and `{}` at {})",
                        other.id, inst.id, inst.position
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Time windows and regions of the delayed-choice arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    /// Spatial region `(D − a, D)` occupied by the reflecting pulse.
    ReflectionRegion,
    /// Time interval `[t_D − a/c, t_D]` during which reflection happens.
    ReflectionTime,
    /// Shot interval `[(L − a/2)/c, (L + a/2)/c]` for a gun at distance `L`.
    LeftGunShot,
    /// Insertion interval `(0, (S − a/2)/c)` for a detector at distance `S`,
    /// before the pulse reaches it.
    DetectorInsertion,
}

/// `distance` is `D`, `L` or `S` according to `kind`.
pub fn window(kind: WindowKind, a: f64, c: f64, distance: f64) -> Result<Interval> {
    wavestate::check_geometry(a, c)?;
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::param(
            "distance",
            format!("must be positive, got {distance}"),
        ));
    }
    Ok(match kind {
        WindowKind::ReflectionRegion => {
            wavestate::mirror_timing(a, c, distance)?;
            Interval::open(distance - a, distance)
        }
        WindowKind::ReflectionTime => {
            let t_d = wavestate::mirror_timing(a, c, distance)?.completion_time;
            Interval::closed(t_d - a / c, t_d)
        }
        WindowKind::LeftGunShot => Interval::closed(
            ((distance - 0.5 * a) / c).max(0.0),
            (distance + 0.5 * a) / c,
        ),
        WindowKind::DetectorInsertion => {
            let hi = (distance - 0.5 * a) / c;
            if hi > 0.0 {
                Interval::open(0.0, hi)
            } else {
                Interval::EMPTY
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        assert_eq!(
            window(WindowKind::ReflectionTime, 1.0, 1.0, 5.0).unwrap(),
            Interval::closed(4.5, 5.5)
        );
        assert_eq!(
            window(WindowKind::LeftGunShot, 1.0, 1.0, 3.0).unwrap(),
            Interval::closed(2.5, 3.5)
        );
        assert!(window(WindowKind::DetectorInsertion, 1.0, 1.0, 0.5)
            .unwrap()
            .is_empty());
        assert_eq!(
            window(WindowKind::DetectorInsertion, 1.0, 1.0, 3.0).unwrap(),
            Interval::open(0.0, 2.5)
        );
        assert_eq!(
            window(WindowKind::ReflectionRegion, 1.0, 1.0, 5.0).unwrap(),
            Interval::open(4.0, 5.0)
        );
    }

    #[test]
    fn window_rejects_bad_geometry() {
        assert!(window(WindowKind::ReflectionTime, 1.0, 1.0, 0.8).is_err());
        assert!(window(WindowKind::ReflectionRegion, 1.0, 1.0, 1.0).is_err());
        assert!(window(WindowKind::LeftGunShot, 1.0, 0.0, 3.0).is_err());
        assert!(window(WindowKind::DetectorInsertion, 1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        let base = Scenario::new(ModeSpec::default());
        assert!(base.clone().with_mirror(0.5).validate().is_err());
        let err = base.clone().with_mirror(1.0).validate().unwrap_err();
        assert!(err
            .to_string()
            .contains("mirror distance must exceed pulse length"));
        assert!(base.clone().with_mirror(5.0).validate().is_ok());
        let dup = base
            .clone()
            .with_instrument(Instrument::detector("D1", 3.0, 1.0))
            .with_instrument(Instrument::detector("D2", 3.0, 1.0));
        assert!(dup.validate().is_err());
        let bad_eff = base
            .clone()
            .with_instrument(Instrument::detector("D1", 3.0, 1.0).with_efficiency(1.5));
        assert!(bad_eff.validate().is_err());
        let bad_removal = base
            .clone()
            .with_instrument(Instrument::detector("D1", 3.0, 1.0).removed_at(1.0));
        assert!(bad_removal.validate().is_err());
        assert!(base.with_trials(0).validate().is_err());
    }

    #[test]
    fn model_names_parse() {
        assert_eq!(
            "qm".parse::<OutcomeModel>().unwrap(),
            OutcomeModel::ConventionalQm
        );
        assert_eq!(
            "preferred-way".parse::<OutcomeModel>().unwrap(),
            OutcomeModel::PreferredWay
        );
        assert!("bohm".parse::<OutcomeModel>().is_err());
        assert_eq!("closest".parse::<TieRule>().unwrap(), TieRule::Closest);
    }
}
