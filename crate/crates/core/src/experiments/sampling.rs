//! Per-trial sampling under both outcome models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kinematics::{events_for, CrossingEvent, Pulse, Weight};
use super::{Branch, OutcomeModel, Scenario, TieRule};
use crate::error::{Error, Result};

/// A registered detection or electron scatter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Click {
    pub instrument: usize,
    pub time: f64,
    /// Absolute scatter position, for electron guns.
    pub scatter_position: Option<f64>,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub clicks: Vec<Click>,
    /// Comparator model only: the tie rules disagree on the chosen pulse.
    pub model_undetermined: bool,
    /// Some electron gun has no overlap with either pulse at its shot time.
    pub no_overlap: bool,
}

impl TrialOutcome {
    pub fn clicked(&self) -> Option<usize> {
        self.clicks.first().map(|c| c.instrument)
    }

    pub fn click_time(&self) -> Option<f64> {
        self.clicks.first().map(|c| c.time)
    }

    pub fn scatter_position(&self) -> Option<f64> {
        self.clicks.first().and_then(|c| c.scatter_position)
    }

    pub fn resolved_branch(&self) -> Branch {
        self.clicks.first().map_or(Branch::None, |c| c.branch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    pulse: Pulse,
    insertion: f64,
    arrival: f64,
    index: usize,
}

/// Candidate chosen by each tie rule.
fn pick(cands: &[Candidate], rule: TieRule) -> Option<Candidate> {
    let key = |c: &Candidate| match rule {
        TieRule::EarliestInserted => (c.insertion, c.arrival, c.index),
        TieRule::Closest => (c.arrival, c.insertion, c.index),
    };
    cands.iter().copied().min_by(|p, q| {
        let (p, q) = (key(p), key(q));
        p.0.total_cmp(&q.0)
            .then(p.1.total_cmp(&q.1))
            .then(p.2.cmp(&q.2))
    })
}

/// A scenario prepared for repeated sampling.
#[derive(Debug, Clone)]
pub struct Experiment {
    scenario: Scenario,
    weight: Weight,
    /// Events the sampler walks through, in time order.
    events: Vec<CrossingEvent>,
    /// Events of the conventional model, used for expected masses.
    born: Vec<CrossingEvent>,
    model_undetermined: bool,
    no_overlap: bool,
    chosen: Option<Pulse>,
}

impl Experiment {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let all = vec![true; scenario.instruments.len()];
        let born = events_for(&scenario, &Pulse::BOTH, 1.0, &all);
        let no_overlap = scenario.instruments.iter().enumerate().any(|(i, inst)| {
            inst.is_gun() && !born.iter().any(|e| e.instrument == i) && {
                // a gun shadowed by an earlier instrument still overlaps
                let only: Vec<bool> = (0..all.len()).map(|j| j == i).collect();
                events_for(&scenario, &Pulse::BOTH, 1.0, &only).is_empty()
            }
        });
        let (events, chosen, model_undetermined) = match scenario.model {
            OutcomeModel::ConventionalQm => (born.clone(), None, false),
            OutcomeModel::PreferredWay => {
                let mut cands = Vec::new();
                for pulse in Pulse::BOTH {
                    for ev in events_for(&scenario, &[pulse], 2.0, &all) {
                        if cands
                            .iter()
                            .any(|c: &Candidate| c.index == ev.instrument && c.pulse == pulse)
                        {
                            continue;
                        }
                        cands.push(Candidate {
                            pulse,
                            insertion: scenario.instruments[ev.instrument].insertion_time,
                            arrival: ev.interval.lo,
                            index: ev.instrument,
                        });
                    }
                }
                if scenario.mirror_is_detector && scenario.mirror_distance.is_some() {
                    cands.push(Candidate {
                        pulse: Pulse::Right,
                        insertion: 0.0,
                        arrival: 0.0,
                        index: usize::MAX,
                    });
                }
                let first = pick(&cands, TieRule::EarliestInserted);
                let near = pick(&cands, TieRule::Closest);
                let undetermined =
                    cands.len() >= 2 && first.map(|c| c.pulse) != near.map(|c| c.pulse);
                match pick(&cands, scenario.tie_rule) {
                    Some(c) => (
                        events_for(&scenario, &[c.pulse], 2.0, &all),
                        Some(c.pulse),
                        undetermined,
                    ),
                    None => (Vec::new(), None, undetermined),
                }
            }
        };
        let weight = Weight::new(scenario.mode.a(), scenario.mode.k());
        Ok(Experiment {
            scenario,
            weight,
            events,
            born,
            model_undetermined,
            no_overlap,
            chosen,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Events the sampler uses under the scenario's model.
    pub fn events(&self) -> &[CrossingEvent] {
        &self.events
    }

    /// Conventional-model click probability of each instrument.
    pub fn born_masses(&self) -> Vec<f64> {
        masses(&self.born, self.scenario.instruments.len())
    }

    /// Click probability of each instrument under the scenario's model.
    pub fn model_masses(&self) -> Vec<f64> {
        masses(&self.events, self.scenario.instruments.len())
    }

    /// The pulse the comparator model assigns the photon to.
    pub fn chosen_pulse(&self) -> Option<Pulse> {
        self.chosen
    }

    pub fn model_undetermined(&self) -> bool {
        self.model_undetermined
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.scenario.seed);
        rng.set_stream(trial);
        rng
    }

    pub fn sample(&self, trial: u64) -> TrialOutcome {
        let mut rng = self.rng(trial);
        let mut remaining = 1.0;
        let mut clicks = Vec::new();
        for ev in &self.events {
            if remaining <= 0.0 {
                break;
            }
            let r: f64 = rng.random();
            if r * remaining < ev.mass {
                clicks.push(self.locate(ev, &mut rng));
                break;
            }
            remaining -= ev.mass;
        }
        TrialOutcome {
            trial,
            clicks,
            model_undetermined: self.model_undetermined,
            no_overlap: self.no_overlap,
        }
    }

    /// Draw where and when inside `ev` the click happens.
    fn locate(&self, ev: &CrossingEvent, rng: &mut ChaCha8Rng) -> Click {
        let w = &self.weight;
        let masses: Vec<f64> = ev
            .pieces
            .iter()
            .map(|p| p.factor * (w.cumulative(p.u_hi) - w.cumulative(p.u_lo)))
            .collect();
        let total: f64 = masses.iter().sum();
        let mut r = rng.random::<f64>() * total;
        let mut chosen = ev.pieces.len() - 1;
        for (i, m) in masses.iter().enumerate() {
            if r < *m {
                chosen = i;
                break;
            }
            r -= m;
        }
        let piece = &ev.pieces[chosen];
        let v: f64 = rng.random();
        let lo = w.cumulative(piece.u_lo);
        let hi = w.cumulative(piece.u_hi);
        let u = w.invert(piece.u_lo, piece.u_hi, lo + v * (hi - lo));
        let inst = &self.scenario.instruments[ev.instrument];
        Click {
            instrument: ev.instrument,
            time: piece.time.at(u),
            scatter_position: inst
                .is_gun()
                .then(|| piece.position.at(u) + self.scenario.source_position),
            branch: ev.branch,
        }
    }

    /// Scatter position for gun `gun`, conditioned on that gun scattering.
    /// `None` when the gun never overlaps the photon.
    pub fn scatter(&self, gun: usize, trial: u64) -> Result<Option<f64>> {
        if !self
            .scenario
            .instruments
            .get(gun)
            .is_some_and(|i| i.is_gun())
        {
            return Err(Error::Scenario(format!(
                "instrument {gun} is not an electron gun"
            )));
        }
        let mut rng = self.rng(trial);
        let evs: Vec<&CrossingEvent> = self.events.iter().filter(|e| e.instrument == gun).collect();
        let total: f64 = evs.iter().map(|e| e.mass).sum();
        if total <= 0.0 {
            return Ok(None);
        }
        let mut r = rng.random::<f64>() * total;
        let mut ev = evs[evs.len() - 1];
        for e in &evs {
            if r < e.mass {
                ev = e;
                break;
            }
            r -= e.mass;
        }
        Ok(self.locate(ev, &mut rng).scatter_position)
    }
}

fn masses(events: &[CrossingEvent], n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n];
    for e in events {
        m[e.instrument] += e.mass;
    }
    m
}

/// Sample one trial of `scenario`.
pub fn sample_trial(scenario: &Scenario, trial: u64) -> Result<TrialOutcome> {
    Ok(Experiment::new(scenario.clone())?.sample(trial))
}

/// Conditional scatter position of electron gun `gun` in one draw.
pub fn eg_scatter(scenario: &Scenario, gun: usize, trial: u64) -> Result<Option<f64>> {
    Experiment::new(scenario.clone())?.scatter(gun, trial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Instrument;
    use crate::wavestate::ModeSpec;

    fn iii() -> Scenario {
        Scenario::new(ModeSpec::default())
            .with_mirror(5.0)
            .with_instrument(Instrument::detector("D1", 3.0, 1.0))
            .with_instrument(Instrument::detector("D2", -3.0, 1.5))
    }

    #[test]
    fn deterministic_per_trial() {
        let exp = Experiment::new(iii().with_seed(7)).unwrap();
        for t in 0..50 {
            assert_eq!(exp.sample(t), exp.sample(t));
        }
        let other = Experiment::new(iii().with_seed(8)).unwrap();
        let differs = (0..50).any(|t| exp.sample(t) != other.sample(t));
        assert!(differs);
    }

    #[test]
    fn clicks_fall_inside_events() {
        let exp = Experiment::new(iii()).unwrap();
        for t in 0..500 {
            let out = exp.sample(t);
            assert_eq!(out.clicks.len(), 1);
            let c = out.clicks[0];
            let ev = exp
                .events()
                .iter()
                .find(|e| e.instrument == c.instrument)
                .unwrap();
            assert!(ev.interval.contains(c.time));
        }
    }

    #[test]
    fn preferred_way_follows_earliest_insertion() {
        let exp = Experiment::new(iii().with_model(OutcomeModel::PreferredWay)).unwrap();
        assert_eq!(exp.chosen_pulse(), Some(Pulse::Right));
        assert!(!exp.model_undetermined());
        let m = exp.model_masses();
        assert!((m[0] - 1.0).abs() < 1e-14);
        assert_eq!(m[1], 0.0);
    }

    #[test]
    fn preferred_way_undetermined_when_rules_disagree() {
        let s = Scenario::new(ModeSpec::default())
            .with_mirror(5.0)
            .transparent_source()
            .with_instrument(Instrument::detector("D1", -20.0, 1.0))
            .with_instrument(Instrument::detector("D2", -3.0, 8.0))
            .with_model(OutcomeModel::PreferredWay);
        let exp = Experiment::new(s).unwrap();
        // D2 intercepts the returning pulse; D1 is earlier-inserted and sees the left one first
        assert!(exp.model_undetermined());
    }

    #[test]
    fn scatter_positions_stay_in_window() {
        let s = Scenario::new(ModeSpec::default())
            .with_mirror(5.0)
            .with_instrument(Instrument::electron_gun("G", 4.5, 1.0, 5.0));
        let exp = Experiment::new(s).unwrap();
        for t in 0..200 {
            let x = exp.scatter(0, t).unwrap().unwrap();
            assert!((4.5..=5.0).contains(&x), "{x}");
        }
    }

    #[test]
    fn gun_without_overlap_is_flagged() {
        let s = Scenario::new(ModeSpec::default())
            .with_mirror(5.0)
            .with_instrument(Instrument::electron_gun("G", -20.0, 1.0, 2.0));
        let out = sample_trial(&s, 0).unwrap();
        assert!(out.no_overlap);
        assert_eq!(out.resolved_branch(), Branch::None);
        assert_eq!(eg_scatter(&s, 0, 0).unwrap(), None);
    }
}
