//! Monte Carlo runs and the statistics drawn from them.

use std::fmt;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sampling::{Experiment, TrialOutcome};
use super::{Branch, Scenario};
use crate::error::{Error, Result};

/// Fixed-width histogram over `[lo, hi)`; the last bin is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::param(
                "histogram range",
                format!("[{lo}, {hi}] is not a valid range"),
            ));
        }
        if bins == 0 {
            return Err(Error::param("bins", "need at least one bin"));
        }
        Ok(Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    /// Returns false when `x` falls outside the range.
    pub fn add(&mut self, x: f64) -> bool {
        if !(x >= self.lo && x <= self.hi) {
            return false;
        }
        let i = (((x - self.lo) / self.bin_width()) as usize).min(self.bins() - 1);
        self.counts[i] += 1;
        true
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentStats {
    pub id: String,
    pub count: u64,
    pub rate: f64,
    pub ci95: (f64, f64),
    /// Click probability under the conventional model.
    pub expected: f64,
    /// Click times, or scatter positions for guns.
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub trials: u64,
    pub model: super::OutcomeModel,
    pub instruments: Vec<InstrumentStats>,
    pub none_count: u64,
    pub branch_counts: Vec<(Branch, u64)>,
    /// Trials with more than one click.
    pub anti_coincidence_violations: u64,
    /// Clicks outside their instrument's active window or before the light
    /// cone from the source allows.
    pub causality_violations: u64,
    pub model_undetermined: u64,
    pub no_overlap: u64,
}

impl StatsReport {
    pub fn instrument(&self, id: &str) -> Option<&InstrumentStats> {
        self.instruments.iter().find(|s| s.id == id)
    }

    pub fn branch_count(&self, branch: Branch) -> u64 {
        self.branch_counts
            .iter()
            .find(|(b, _)| *b == branch)
            .map_or(0, |(_, n)| *n)
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {} trials {}", self.model, self.trials)?;
        for s in &self.instruments {
            writeln!(
                f,
                "  {:<8} count {:>9}  rate {:.6}  ci95 [{:.6}, {:.6}]  expected {:.6}",
                s.id, s.count, s.rate, s.ci95.0, s.ci95.1, s.expected
            )?;
        }
        writeln!(f, "  none     count {:>9}", self.none_count)?;
        for (b, n) in &self.branch_counts {
            writeln!(f, "  branch {b}: {n}")?;
        }
        write!(
            f,
            "  anti-coincidence violations {}  causality violations {}  undetermined {}  no-overlap {}",
            self.anti_coincidence_violations,
            self.causality_violations,
            self.model_undetermined,
            self.no_overlap
        )
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_p(statistic: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::param("dof", e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Two-sample homogeneity test on binned counts. Bins empty in both samples
/// are skipped.
pub fn chi_squared_homogeneity(x: &[u64], y: &[u64]) -> Result<ChiSquaredTest> {
    if x.len() != y.len() {
        return Err(Error::param(
            "bins",
            format!("length mismatch {} vs {}", x.len(), y.len()),
        ));
    }
    let nx: f64 = x.iter().sum::<u64>() as f64;
    let ny: f64 = y.iter().sum::<u64>() as f64;
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::param(
            "counts",
            "both samples need at least one count",
        ));
    }
    let n = nx + ny;
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&a, &b) in x.iter().zip(y) {
        let col = (a + b) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        let ea = nx * col / n;
        let eb = ny * col / n;
        stat += (a as f64 - ea).powi(2) / ea + (b as f64 - eb).powi(2) / eb;
    }
    let dof = used.saturating_sub(1);
    Ok(ChiSquaredTest {
        statistic: stat,
        dof,
        p_value: chi_p(stat, dof)?,
    })
}

/// Goodness of fit of `observed` against bin probabilities `expected`
/// (rescaled to sum to one).
pub fn chi_squared_goodness(observed: &[u64], expected: &[f64]) -> Result<ChiSquaredTest> {
    if observed.len() != expected.len() {
        return Err(Error::param(
            "bins",
            format!("length mismatch {} vs {}", observed.len(), expected.len()),
        ));
    }
    let total_p: f64 = expected.iter().sum();
    if !(total_p > 0.0) || expected.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::param(
            "expected",
            "probabilities must be non-negative with positive sum",
        ));
    }
    let n: f64 = observed.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = n * p / total_p;
        if e == 0.0 {
            if o > 0 {
                stat = f64::INFINITY;
            }
            continue;
        }
        used += 1;
        stat += (o as f64 - e).powi(2) / e;
    }
    let dof = used.saturating_sub(1);
    Ok(ChiSquaredTest {
        statistic: stat,
        dof,
        p_value: chi_p(stat, dof)?,
    })
}

const HIST_BINS: usize = 50;

/// Run every trial of `scenario` and return the summary with all outcomes.
pub fn run_with_outcomes(scenario: &Scenario) -> Result<(StatsReport, Vec<TrialOutcome>)> {
    let exp = Experiment::new(scenario.clone())?;
    let outcomes: Vec<TrialOutcome> = (0..scenario.trials)
        .into_par_iter()
        .map(|t| exp.sample(t))
        .collect();
    let report = summarize(&exp, &outcomes)?;
    Ok((report, outcomes))
}

pub fn run(scenario: &Scenario) -> Result<StatsReport> {
    run_with_outcomes(scenario).map(|(r, _)| r)
}

fn summarize(exp: &Experiment, outcomes: &[TrialOutcome]) -> Result<StatsReport> {
    let sc = exp.scenario();
    let n = outcomes.len() as u64;
    let expected = exp.born_masses();
    let mut counts = vec![0u64; sc.instruments.len()];
    let mut none = 0;
    let mut branches: Vec<(Branch, u64)> = [
        Branch::Left,
        Branch::Right,
        Branch::LeadingPulse,
        Branch::TrailingPulse,
        Branch::None,
    ]
    .into_iter()
    .map(|b| (b, 0))
    .collect();
    let mut anti = 0;
    let mut causal = 0;
    let mut undetermined = 0;
    let mut no_overlap = 0;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); sc.instruments.len()];
    let c = sc.mode.c();
    let half = 0.5 * sc.mode.a();
    for out in outcomes {
        if out.clicks.len() > 1 {
            anti += 1;
        }
        if out.model_undetermined {
            undetermined += 1;
        }
        if out.no_overlap {
            no_overlap += 1;
        }
        let b = out.resolved_branch();
        if let Some(slot) = branches.iter_mut().find(|(x, _)| *x == b) {
            slot.1 += 1;
        }
        if out.clicks.is_empty() {
            none += 1;
        }
        for click in &out.clicks {
            let inst = &sc.instruments[click.instrument];
            counts[click.instrument] += 1;
            let reach = ((inst.position - sc.source_position).abs() - half).max(0.0) / c;
            let late = inst.removal_time.is_some_and(|r| click.time > r + 1e-9);
            if click.time + 1e-9 < inst.insertion_time || click.time + 1e-9 < reach || late {
                causal += 1;
            }
            samples[click.instrument].push(click.scatter_position.unwrap_or(click.time));
        }
    }
    let mut instruments = Vec::with_capacity(sc.instruments.len());
    for (i, inst) in sc.instruments.iter().enumerate() {
        let histogram = match samples[i]
            .iter()
            .copied()
            .fold(None, |acc: Option<(f64, f64)>, v| {
                Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
            }) {
            Some((lo, hi)) if hi > lo => {
                let mut h = Histogram::new(lo, hi, HIST_BINS)?;
                for &v in &samples[i] {
                    h.add(v);
                }
                Some(h)
            }
            _ => None,
        };
        instruments.push(InstrumentStats {
            id: inst.id.clone(),
            count: counts[i],
            rate: if n == 0 {
                0.0
            } else {
                counts[i] as f64 / n as f64
            },
            ci95: wilson_interval(counts[i], n),
            expected: expected[i],
            histogram,
        });
    }
    Ok(StatsReport {
        trials: n,
        model: sc.model,
        instruments,
        none_count: none,
        branch_counts: branches,
        anti_coincidence_violations: anti,
        causality_violations: causal,
        model_undetermined: undetermined,
        no_overlap,
    })
}
