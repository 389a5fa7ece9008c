//! Independent numerical oracles: quadrature, a finite-difference jump
//! locator, and an identity suite tying the closed-form energy ledger to
//! integrals of the field itself.
//!
//! Nothing here calls the closed-form ledger to produce its numbers; the
//! identity suite only *compares* against it.

use crate::error::{Error, Result};
use crate::reflection::{self, DomainSplit, PiecewiseField, Quantity};
use crate::snapshot::Snapshot;
use crate::wavestate::ModeSpec;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 24;
/// Halvings performed before the Richardson estimate is trusted.
const MIN_DEPTH: u32 = 4;

/// Outcome of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: usize,
}

/// Composite Simpson on `[lo, hi]`, halving the panel width until the
/// Richardson estimate `|S₂ₙ − Sₙ| / 15` drops below `tol`.
///
/// The returned value is the extrapolated `S₂ₙ + (S₂ₙ − Sₙ)/15`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadResult> {
    if !(lo <= hi) {
        return Err(Error::param(
            "lo",
            format!("need lo <= hi, got [{lo}, {hi}]"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    let width = hi - lo;
    // endpoints, even interior nodes, odd interior nodes
    let ends = f(lo) + f(hi);
    let mut evens = 0.0;
    let mut odds = f(lo + 0.5 * width);
    let mut evaluations = 3usize;
    let mut panels = 1usize; // Simpson panels, each two sub-intervals wide
    let simpson = |evens: f64, odds: f64, panels: usize| {
        let h = width / (2 * panels) as f64;
        h / 3.0 * (ends + 2.0 * evens + 4.0 * odds)
    };
    let mut prev = simpson(evens, odds, panels);
    for depth in 1..=MAX_DEPTH {
        evens += odds;
        panels *= 2;
        let h = width / (2 * panels) as f64;
        odds = (0..panels).map(|i| f(lo + (2 * i + 1) as f64 * h)).sum();
        evaluations += panels;
        let cur = simpson(evens, odds, panels);
        let est_error = (cur - prev).abs() / 15.0;
        let value = cur + (cur - prev) / 15.0;
        if !value.is_finite() {
            return Err(Error::param("f", "integrand is not finite on the interval"));
        }
        if depth >= MIN_DEPTH && est_error < tol {
            return Ok(QuadResult {
                value,
                est_error,
                evaluations,
            });
        }
        if depth == MAX_DEPTH {
            return Err(Error::NonConvergence {
                depth,
                best: value,
                est_error,
            });
        }
        prev = cur;
    }
    unreachable!("loop returns at MAX_DEPTH")
}

/// Integrates across consecutive `breaks`, one smooth panel at a time.
///
/// `breaks` must be sorted; repeated points contribute empty panels.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: f64,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::param("breaks", "need at least two break points"));
    }
    let panels = (breaks.len() - 1) as f64;
    let mut total = QuadResult {
        value: 0.0,
        est_error: 0.0,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let q = integrate(&f, w[0], w[1], tol / panels)?;
        total.value += q.value;
        total.est_error += q.est_error;
        total.evaluations += q.evaluations;
    }
    Ok(total)
}

/// A discontinuity found on a sampled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedJump {
    pub location: f64,
    /// Half a grid step: the location is known to `± half_width`.
    pub half_width: f64,
    pub quantity: Quantity,
    /// Peak `|second difference|` within the flagged cells.
    pub score: f64,
}

pub const MIN_GRID: usize = 64;
pub const JUMP_THRESHOLD: f64 = 30.0;

/// Flags cells whose centered second difference exceeds
/// [`JUMP_THRESHOLD`] times the median over the grid.
pub fn locate_jumps(snapshot: &Snapshot) -> Result<Vec<LocatedJump>> {
    locate_jumps_with(snapshot, JUMP_THRESHOLD)
}

pub fn locate_jumps_with(snapshot: &Snapshot, multiplier: f64) -> Result<Vec<LocatedJump>> {
    let n = snapshot.x.len();
    if n < MIN_GRID {
        return Err(Error::GridTooCoarse {
            points: n,
            min: MIN_GRID,
        });
    }
    let h = (snapshot.x[n - 1] - snapshot.x[0]) / (n - 1) as f64;
    let field_scale = snapshot
        .e
        .iter()
        .chain(&snapshot.b)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    for (values, value_q, slope_q) in [
        (&snapshot.e, Quantity::EValue, Quantity::DeDx),
        (&snapshot.b, Quantity::BValue, Quantity::DbDx),
    ] {
        for cluster in flag_clusters(values, multiplier, field_scale) {
            // widen by one cell each side so a kink shared between two cells is centred
            let lo = cluster.start.saturating_sub(1).max(1);
            let hi = (cluster.end + 1).min(n - 2);
            let d2 = |i: usize| values[i - 1] - 2.0 * values[i] + values[i + 1];
            let (mut wsum, mut xsum, mut signed, mut abs_sum) = (0.0, 0.0, 0.0, 0.0);
            for i in lo..=hi {
                let w = d2(i).abs();
                wsum += w;
                xsum += w * snapshot.x[i];
                signed += d2(i);
                abs_sum += w;
            }
            // a step leaves a +/- pair that nearly cancels; a kink does not
            let quantity = if signed.abs() < 0.5 * abs_sum {
                value_q
            } else {
                slope_q
            };
            out.push(LocatedJump {
                location: xsum / wsum,
                half_width: 0.5 * h,
                quantity,
                score: cluster.peak,
            });
        }
    }
    out.sort_by(|p, q| p.location.total_cmp(&q.location));
    Ok(out)
}

struct Cluster {
    start: usize,
    end: usize,
    peak: f64,
}

fn flag_clusters(values: &[f64], multiplier: f64, field_scale: f64) -> Vec<Cluster> {
    let n = values.len();
    let d2: Vec<f64> = (1..n - 1)
        .map(|i| (values[i - 1] - 2.0 * values[i] + values[i + 1]).abs())
        .collect();
    // round-off level relative to the larger of the two fields
    let floor = 1e-12 * field_scale;
    if values.iter().all(|v| v.abs() <= floor) {
        return Vec::new();
    }
    // Median over the non-trivial interior cells; zero regions outside the
    // support carry no information about the smooth curvature.
    let mut interior: Vec<f64> = d2[1..d2.len() - 1]
        .iter()
        .copied()
        .filter(|&v| v > floor)
        .collect();
    if interior.is_empty() {
        return Vec::new();
    }
    interior.sort_by(f64::total_cmp);
    let median = interior[interior.len() / 2];
    let threshold = (multiplier * median).max(floor);

    let mut clusters: Vec<Cluster> = Vec::new();
    // d2[j] belongs to grid index j + 1; skip the boundary cell at each end
    for j in 1..d2.len() - 1 {
        if d2[j] <= threshold {
            continue;
        }
        let i = j + 1;
        match clusters.last_mut() {
            Some(c) if c.end + 1 >= i => {
                c.end = i;
                c.peak = c.peak.max(d2[j]);
            }
            _ => clusters.push(Cluster {
                start: i,
                end: i,
                peak: d2[j],
            }),
        }
    }
    clusters
}

/// Per-`s` residuals of the energy identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityRow {
    pub s: f64,
    /// `|e_E_sw + e_B_sw − e_sw|` from the closed forms.
    pub split_residual: f64,
    /// Largest gap between a closed-form ledger entry and its quadrature.
    pub oracle_residual: f64,
    /// `|(e_rw + e_sw)/a − 1|`.
    pub conservation_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub max_split_residual: f64,
    pub max_oracle_residual: f64,
    pub max_conservation_residual: f64,
}

/// Field-square integrals over the reflection domains, in the unnormalized
/// convention of the ledger (prefactor `1/√a` removed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureLedger {
    pub e_rw: f64,
    pub e_e_sw: f64,
    pub e_b_sw: f64,
}

pub fn quadrature_ledger(mode: &ModeSpec, s: f64, tol: f64) -> Result<QuadratureLedger> {
    let DomainSplit { rw, sw } = reflection::domains(mode.a(), s)?;
    let field = PiecewiseField::reflection(mode, s)?;
    let a = mode.a();
    let e2 = |x: f64| a * field.eval(x).e.powi(2);
    let b2 = |x: f64| a * field.eval(x).b.powi(2);
    let e_rw = integrate(|x| e2(x) + b2(x), rw.lo, rw.hi, tol)?.value;
    let e_e_sw = integrate(e2, sw.lo, sw.hi, tol)?.value;
    let e_b_sw = integrate(b2, sw.lo, sw.hi, tol)?.value;
    Ok(QuadratureLedger {
        e_rw,
        e_e_sw,
        e_b_sw,
    })
}

pub fn identity_suite(mode: &ModeSpec, s_samples: &[f64]) -> Result<IdentityReport> {
    let mut rows = Vec::with_capacity(s_samples.len());
    for &s in s_samples {
        let ledger = reflection::energy_ledger(mode, s)?;
        let quad = quadrature_ledger(mode, s, DEFAULT_TOL)?;
        let oracle_residual = [
            (ledger.e_rw - quad.e_rw).abs(),
            (ledger.e_e_sw - quad.e_e_sw).abs(),
            (ledger.e_b_sw - quad.e_b_sw).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        rows.push(IdentityRow {
            s,
            split_residual: (ledger.e_e_sw + ledger.e_b_sw - ledger.e_sw).abs(),
            oracle_residual,
            conservation_residual: (ledger.normalized_total() - 1.0).abs(),
        });
    }
    let max = |f: fn(&IdentityRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(IdentityReport {
        max_split_residual: max(|r| r.split_residual),
        max_oracle_residual: max(|r| r.oracle_residual),
        max_conservation_residual: max(|r| r.conservation_residual),
        rows,
    })
}
