//! Command implementations. Each returns its CSV or report as a string so
//! the binary only handles I/O and exit codes.

use std::fmt::Write as _;

use fpdce_core::experiments::{run_with_outcomes, Experiment};
use fpdce_core::reflection::{energy_ledger, inner_location};
use fpdce_core::validation::{identity_suite, integrate_piecewise, locate_jumps};
use fpdce_core::wavestate::{self, boundary_check};
use fpdce_core::{ModeSpec, OutcomeModel, PiecewiseField, Result, Scenario, Snapshot, StatsReport};

/// Decimal rendering of CSV values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NumberFormat {
    /// Fixed 17 significant digits instead of the shortest round-trip form.
    pub fixed17: bool,
}

impl NumberFormat {
    pub fn render(&self, v: f64) -> String {
        if self.fixed17 {
            format!("{v:.16e}")
        } else {
            format!("{v:?}")
        }
    }
}

pub fn snapshot_csv(snap: &Snapshot, fmt: NumberFormat) -> String {
    let mut out = String::from("x,E,B,rho\n");
    for i in 0..snap.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt.render(snap.x[i]),
            fmt.render(snap.e[i]),
            fmt.render(snap.b[i]),
            fmt.render(snap.rho[i])
        );
    }
    out
}

/// `steps` evenly spaced values from 0 to `a`, both ends included.
pub fn energy_csv(mode: &ModeSpec, steps: usize, fmt: NumberFormat) -> Result<String> {
    let mut out = String::from("s,e_rw,e_E_sw,e_B_sw,e_sw,total\n");
    let a = mode.a();
    let steps = steps.max(2);
    for i in 0..steps {
        let s = a * i as f64 / (steps - 1) as f64;
        let l = energy_ledger(mode, s)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt.render(s),
            fmt.render(l.e_rw),
            fmt.render(l.e_e_sw),
            fmt.render(l.e_b_sw),
            fmt.render(l.e_sw),
            fmt.render(l.normalized_total())
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub s: f64,
    pub analytic: f64,
    pub located: f64,
    pub grid_step: f64,
}

impl TrackRow {
    pub fn residual(&self) -> f64 {
        (self.located - self.analytic).abs()
    }
}

/// Inner discontinuity position at `steps` interior values of `s`.
pub fn track(mode: &ModeSpec, steps: usize, grid: usize) -> Result<Vec<TrackRow>> {
    let a = mode.a();
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let s = a * (i + 1) as f64 / (steps + 1) as f64;
        let snap = Snapshot::reflection(mode, s, grid)?;
        let step = snap.grid_step();
        let located = locate_jumps(&snap)?
            .iter()
            .map(|j| j.location)
            .filter(|x| *x < -0.5 * step)
            .fold(f64::NAN, f64::max);
        rows.push(TrackRow {
            s,
            analytic: inner_location(a, s).unwrap_or(0.0),
            located,
            grid_step: step,
        });
    }
    Ok(rows)
}

pub fn track_csv(rows: &[TrackRow], fmt: NumberFormat) -> String {
    let mut out = String::from("s,x_D_analytic,x_D_located,residual\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt.render(r.s),
            fmt.render(r.analytic),
            fmt.render(r.located),
            fmt.render(r.residual())
        );
    }
    out
}

pub struct DceRun {
    pub csv: String,
    pub report: StatsReport,
    /// Broken hard invariants; empty on success.
    pub violations: Vec<String>,
}

pub fn dce(scenario: &Scenario, fmt: NumberFormat) -> Result<DceRun> {
    let exp = Experiment::new(scenario.clone())?;
    let masses = exp.model_masses();
    let (report, outcomes) = run_with_outcomes(scenario)?;
    let mut csv = String::from("trial,instrument,click_time,scatter_x,branch\n");
    for o in &outcomes {
        let id = o
            .clicked()
            .map_or("", |i| scenario.instruments[i].id.as_str());
        let time = o.click_time().map(|t| fmt.render(t)).unwrap_or_default();
        let x = o
            .scatter_position()
            .map(|x| fmt.render(x))
            .unwrap_or_default();
        let _ = writeln!(csv, "{},{id},{time},{x},{}", o.trial, o.resolved_branch());
    }
    let mut violations = Vec::new();
    if report.anti_coincidence_violations > 0 {
        violations.push(format!(
            "{} trials with more than one click",
            report.anti_coincidence_violations
        ));
    }
    if report.causality_violations > 0 {
        violations.push(format!(
            "{} clicks outside their allowed window",
            report.causality_violations
        ));
    }
    for (st, m) in report.instruments.iter().zip(&masses) {
        if *m == 0.0 && st.count > 0 {
            violations.push(format!(
                "{} clicked {} times but is never reached",
                st.id, st.count
            ));
        }
    }
    Ok(DceRun {
        csv,
        report,
        violations,
    })
}

/// Human-readable summary, with the comparator model marked as such.
pub fn dce_summary(run: &DceRun) -> String {
    let mut out = run.report.to_string();
    if run.report.model == OutcomeModel::PreferredWay {
        out.push_str("\n  note: preferred-way is the comparator model, not the Born rule");
    }
    if run.violations.is_empty() {
        out.push_str("\n  invariants: ok");
    } else {
        for v in &run.violations {
            let _ = write!(out, "\n  violation: {v}");
        }
    }
    out.push('\n');
    out
}

pub struct CheckReport {
    pub lines: Vec<String>,
    pub ok: bool,
}

/// Closed-form identities against the independent oracles.
pub fn check(mode: &ModeSpec, steps: usize) -> Result<CheckReport> {
    let a = mode.a();
    let steps = steps.max(2);
    let samples: Vec<f64> = (0..steps)
        .map(|i| a * i as f64 / (steps - 1) as f64)
        .collect();
    let ids = identity_suite(mode, &samples)?;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut verdict = |label: &str, value: f64, tol: f64| {
        let pass = value <= tol;
        ok &= pass;
        lines.push(format!(
            "{label}: {value:.3e} (tol {tol:.0e}) {}",
            if pass { "ok" } else { "FAIL" }
        ));
    };
    let b = boundary_check(mode);
    verdict("cavity boundary residual", b.e_value.max(b.b_slope), 1e-12);
    verdict("ledger split residual", ids.max_split_residual, 1e-12);
    verdict(
        "ledger conservation residual",
        ids.max_conservation_residual,
        1e-12,
    );
    verdict("ledger vs quadrature", ids.max_oracle_residual, 1e-8);

    let mut worst_norm: f64 = 0.0;
    for &s in &samples {
        let field = PiecewiseField::reflection(mode, s)?;
        let q = integrate_piecewise(|x| field.eval(x).density(), &field.breakpoints(), 1e-11)?;
        worst_norm = worst_norm.max((q.value - 1.0).abs());
    }
    for t in [0.0, 0.2 * a, 5.0 * a] {
        let ct = mode.c() * t;
        let mut cuts = vec![-ct, ct, a - ct, a + ct];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let q = integrate_piecewise(
            |x| wavestate::split_state(mode, x, t).map_or(f64::NAN, |f| f.density()),
            &cuts,
            1e-11,
        )?;
        worst_norm = worst_norm.max((q.value - 1.0).abs());
    }
    verdict("normalization", worst_norm, 1e-8);

    let rows = track(mode, 50, 1024)?;
    let worst_track = rows
        .iter()
        .map(|r| r.residual() / r.grid_step)
        .fold(0.0, f64::max);
    verdict("discontinuity track (grid cells)", worst_track, 1.0);
    Ok(CheckReport { lines, ok })
}
