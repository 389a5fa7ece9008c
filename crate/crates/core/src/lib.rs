//! Analytic model of a single photon released from a Fabry-Perot resonator.
//!
//! The crate covers the trapped eigenmode and the split two-pulse state
//! ([`wavestate`]), reflection of one pulse from an ideal mirror with its
//! moving inner discontinuity and energy ledger ([`reflection`]), numerical
//! oracles for both ([`validation`]), and a Monte Carlo harness for
//! delayed-choice detector and electron-gun arrangements ([`experiments`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod interval;
pub mod reflection;
pub mod snapshot;
pub mod validation;
pub mod wavestate;

pub use error::{Error, Result};
pub use experiments::{
    Branch, CrossingEvent, Experiment, Instrument, InstrumentKind, OutcomeModel, Scenario,
    StatsReport, TieRule, TrialOutcome, WindowKind,
};
pub use interval::Interval;
pub use reflection::{
    DiscontinuityKind, DiscontinuityRecord, DomainSplit, EnergyLedger, PiecewiseField, Quantity,
};
pub use snapshot::{Phase, Snapshot};
pub use validation::{LocatedJump, QuadResult};
pub use wavestate::{FieldSample, ModeSpec, RangeReport};
