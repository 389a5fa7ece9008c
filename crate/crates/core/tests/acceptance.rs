//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fpdce_core::experiments::{
    chi_squared_goodness, chi_squared_homogeneity, run, run_with_outcomes, window, Experiment,
    Instrument, OutcomeModel, Scenario, WindowKind,
};
use fpdce_core::reflection::{self, energy_ledger, inner_location, Quantity};
use fpdce_core::validation::{integrate_piecewise, locate_jumps, quadrature_ledger};
use fpdce_core::wavestate::{self, mirror_timing};
use fpdce_core::{Branch, Interval, ModeSpec, PiecewiseField, Snapshot};

type Check = std::result::Result<String, String>;

const N: u64 = 100_000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> std::result::Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || {
        format!("took {took:?}, budget {budget:?}")
    })
}

/// Three binomial standard deviations around `p` at `n` trials.
fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn conservation() -> Check {
    let start = Instant::now();
    let mut worst_closed: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for n in 1..=3 {
        let mode = ModeSpec::normalized(n).map_err(|e| e.to_string())?;
        for i in 0..1000 {
            let s = f64::from(i) / 999.0;
            let l = energy_ledger(&mode, s).map_err(|e| e.to_string())?;
            worst_closed = worst_closed.max((l.normalized_total() - 1.0).abs());
            let q = quadrature_ledger(&mode, s, 1e-10).map_err(|e| e.to_string())?;
            let total = (q.e_rw + q.e_e_sw + q.e_b_sw) / mode.a();
            worst_quad = worst_quad.max((total - 1.0).abs());
        }
    }
    ensure(worst_closed <= 1e-12, || {
        format!("closed-form residual {worst_closed:e}")
    })?;
    ensure(worst_quad <= 1e-8, || {
        format!("quadrature residual {worst_quad:e}")
    })?;
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!(
        "closed {worst_closed:.1e}, quadrature {worst_quad:.1e}, {:?}",
        start.elapsed()
    ))
}

fn midpoint_collapse() -> Check {
    let mode = ModeSpec::default();
    let l = energy_ledger(&mode, 0.5).map_err(|e| e.to_string())?;
    ensure(l.e_rw.abs() <= 1e-15, || {
        format!("e_rw(a/2) = {:e}", l.e_rw)
    })?;
    let split = reflection::domains(1.0, 0.5).map_err(|e| e.to_string())?;
    ensure(split.rw.is_point(), || format!("RW domain {}", split.rw))?;
    let snap = Snapshot::reflection(&mode, 0.5, 1024).map_err(|e| e.to_string())?;
    let max_e = snap.e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(max_e <= 1e-12, || format!("max |E| = {max_e:e}"))?;
    Ok(format!("e_rw = {:e}, max |E| = {max_e:.1e}", l.e_rw))
}

fn discontinuity_kinematics() -> Check {
    let start = Instant::now();
    let mode = ModeSpec::default();
    let mut track = Vec::with_capacity(50);
    let mut worst: f64 = 0.0;
    let mut step = 0.0;
    for i in 0..50 {
        let s = f64::from(i + 1) / 51.0;
        let snap = Snapshot::reflection(&mode, s, 1024).map_err(|e| e.to_string())?;
        step = snap.grid_step();
        let jumps = locate_jumps(&snap).map_err(|e| e.to_string())?;
        let inner = jumps
            .iter()
            .filter(|j| j.location < -0.5 * step)
            .map(|j| j.location)
            .fold(f64::NEG_INFINITY, f64::max);
        let expected = inner_location(1.0, s).ok_or("no analytic inner point")?;
        let residual = (inner - expected).abs();
        worst = worst.max(residual);
        ensure(residual <= step, || {
            format!("s = {s}: located {inner}, expected {expected}")
        })?;
        track.push((s, inner));
    }
    // out and back: strictly away from the mirror, then toward it
    for w in track.windows(2) {
        let ((s0, x0), (s1, x1)) = (w[0], w[1]);
        if s1 <= 0.5 {
            ensure(x1 < x0, || {
                format!("not receding between s = {s0} and {s1}")
            })?;
        } else if s0 >= 0.5 {
            ensure(x1 > x0, || {
                format!("not returning between s = {s0} and {s1}")
            })?;
        }
    }
    let vertex = track
        .iter()
        .copied()
        .fold((0.0, 0.0), |m, p| if p.1 < m.1 { p } else { m });
    ensure((vertex.1 + 0.5).abs() <= 2.0 * step + 1.0 / 51.0, || {
        format!("vertex at {vertex:?}")
    })?;
    within_budget(start, Duration::from_secs(5))?;
    Ok(format!(
        "max residual {worst:.2e} (cell {step:.2e}), vertex s = {:.3} x = {:.3}, {:?}",
        vertex.0,
        vertex.1,
        start.elapsed()
    ))
}

fn continuity() -> Check {
    let mode = ModeSpec::default();
    let mut worst_value: f64 = 0.0;
    let mut smallest_slope = f64::INFINITY;
    for i in 1..1000 {
        let s = f64::from(i) / 1000.0;
        let field = PiecewiseField::reflection(&mode, s).map_err(|e| e.to_string())?;
        let x = inner_location(1.0, s).ok_or("missing border")?;
        let (l, r) = field.one_sided(x);
        worst_value = worst_value
            .max((l.value.e - r.value.e).abs())
            .max((l.value.b - r.value.b).abs());
        if i != 500 {
            let jump = (l.slope.e - r.slope.e)
                .abs()
                .min((l.slope.b - r.slope.b).abs());
            smallest_slope = smallest_slope.min(jump);
            ensure(jump > 0.0, || format!("no slope jump at s = {s}"))?;
        }
    }
    ensure(worst_value < 1e-12, || {
        format!("value jump {worst_value:e}")
    })?;
    // the analytic list agrees: slope records only at the inner border
    let recs = reflection::discontinuities(&mode, 0.3).map_err(|e| e.to_string())?;
    let inner_value = recs.iter().any(|r| {
        r.kind == reflection::DiscontinuityKind::Inner
            && matches!(r.quantity, Quantity::EValue | Quantity::BValue)
    });
    ensure(!inner_value, || {
        "value jump recorded at inner border".into()
    })?;
    Ok(format!(
        "max value jump {worst_value:.1e}, min slope jump {smallest_slope:.3}"
    ))
}

fn end_state() -> Check {
    let mode = ModeSpec::default();
    let end = Snapshot::reflection(&mode, 1.0, 1024).map_err(|e| e.to_string())?;
    let start = PiecewiseField::reflection(&mode, 0.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, &x) in end.x.iter().enumerate() {
        let inc = start.eval(-1.0 - x);
        worst = worst
            .max((end.e[i] + inc.e).abs())
            .max((end.b[i] - inc.b).abs());
    }
    ensure(worst <= 1e-12, || format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn normalization() -> Check {
    let mode = ModeSpec::default();
    let tol = 1e-11;
    let mut worst: f64 = 0.0;
    let mut record = |label: String, v: f64| -> std::result::Result<(), String> {
        worst = worst.max((v - 1.0).abs());
        ensure((v - 1.0).abs() <= 1e-8, || format!("{label}: {v}"))
    };
    let cavity = integrate_piecewise(
        |x| wavestate::eigenmode(&mode, x, 0.37).density(),
        &[0.0, 1.0],
        tol,
    )
    .map_err(|e| e.to_string())?;
    record("cavity".into(), cavity.value)?;
    for t in [0.0, 0.2, 5.0] {
        let mut cuts = vec![-t, t, 1.0 - t, 1.0 + t];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let q = integrate_piecewise(
            |x| wavestate::split_state(&mode, x, t).map_or(f64::NAN, |f| f.density()),
            &cuts,
            tol,
        )
        .map_err(|e| e.to_string())?;
        record(format!("free t = {t}"), q.value)?;
    }
    for s in [0.1, 0.25, 0.5, 0.9] {
        let field = PiecewiseField::reflection(&mode, s).map_err(|e| e.to_string())?;
        let q = integrate_piecewise(|x| field.eval(x).density(), &field.breakpoints(), tol)
            .map_err(|e| e.to_string())?;
        record(format!("reflection s = {s}"), q.value)?;
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn scenario_iii() -> Scenario {
    Scenario::new(ModeSpec::default())
        .with_mirror(5.0)
        .with_instrument(Instrument::detector("D1", 3.0, 1.0))
        .with_trials(N)
        .with_seed(11)
}

fn scenario_iv() -> Scenario {
    Scenario::new(ModeSpec::default())
        .with_mirror(5.0)
        .transparent_source()
        .with_trials(N)
        .with_seed(12)
}

fn guns(left_distance: f64, seed: u64) -> Scenario {
    Scenario::new(ModeSpec::default())
        .with_mirror(5.0)
        .with_instrument(Instrument::electron_gun(
            "EGL",
            -left_distance,
            1.0,
            left_distance,
        ))
        .with_instrument(Instrument::electron_gun("EGR", 4.5, 1.0, 5.0))
        .with_trials(N)
        .with_seed(seed)
}

fn monte_carlo() -> Check {
    let budget = Duration::from_secs(10);
    let tol = three_sigma(0.5, N);
    let mut notes = Vec::new();

    // III, single detector, both models
    let t0 = Instant::now();
    let qm = run(&scenario_iii()).map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    let rate = qm.instrument("D1").ok_or("D1 missing")?.rate;
    ensure((rate - 0.5).abs() <= tol, || format!("III QM rate {rate}"))?;
    let t0 = Instant::now();
    let pw =
        run(&scenario_iii().with_model(OutcomeModel::PreferredWay)).map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    let pw_count = pw.instrument("D1").ok_or("D1 missing")?.count;
    ensure(pw_count == N, || {
        format!("III preferred-way count {pw_count}")
    })?;
    notes.push(format!("III rate {rate:.4} vs 1"));

    // III, two detectors in anti-coincidence
    let t0 = Instant::now();
    let two = run(&scenario_iii().with_instrument(Instrument::detector("D2", -3.0, 1.5)))
        .map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    ensure(two.anti_coincidence_violations == 0, || {
        format!("{} double clicks", two.anti_coincidence_violations)
    })?;
    ensure(two.none_count == 0, || {
        format!("{} silent trials", two.none_count)
    })?;
    for s in &two.instruments {
        ensure((s.rate - 0.5).abs() <= tol, || {
            format!("III {} rate {}", s.id, s.rate)
        })?;
    }

    // IV(a): detector behind the reflected pulse
    let t0 = Instant::now();
    let a = run(&scenario_iv().with_instrument(Instrument::detector("D", 3.0, 8.0)))
        .map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    ensure(a.none_count == N, || {
        format!("IV(a) {} clicks", N - a.none_count)
    })?;

    // IV(c): in front of both pulses
    let t0 = Instant::now();
    let (c, outs) =
        run_with_outcomes(&scenario_iv().with_instrument(Instrument::detector("D", -12.0, 8.0)))
            .map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    ensure(c.none_count == 0, || {
        format!("IV(c) {} silent trials", c.none_count)
    })?;
    let lead = c.branch_count(Branch::LeadingPulse);
    let frac = lead as f64 / N as f64;
    ensure((frac - 0.5).abs() <= tol, || {
        format!("IV(c) leading fraction {frac}")
    })?;
    let times = |b: Branch| -> Vec<f64> {
        outs.iter()
            .filter(|o| o.resolved_branch() == b)
            .filter_map(|o| o.click_time())
            .collect()
    };
    let (lt, tt) = (times(Branch::LeadingPulse), times(Branch::TrailingPulse));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let lead_max = lt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trail_min = tt.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(lead_max < trail_min, || {
        "IV(c) click-time clusters overlap".into()
    })?;
    let gap = mean(&tt) - mean(&lt);
    ensure((gap - 10.0).abs() <= 0.01, || {
        format!("IV(c) cluster gap {gap}")
    })?;
    notes.push(format!("IV(c) gap {gap:.4}"));

    // IV(d): two detectors between the pulses
    let t0 = Instant::now();
    let d = run(&scenario_iv()
        .with_instrument(Instrument::detector("near", -3.0, 8.0))
        .with_instrument(Instrument::detector("far", -5.0, 8.0)))
    .map_err(|e| e.to_string())?;
    within_budget(t0, budget)?;
    let near = d.instrument("near").ok_or("near missing")?;
    let far = d.instrument("far").ok_or("far missing")?;
    ensure(far.count == 0, || {
        format!("IV(d) far detector clicked {} times", far.count)
    })?;
    ensure((near.rate - 0.5).abs() <= tol, || {
        format!("IV(d) rate {}", near.rate)
    })?;

    // II: two electron guns, both shooting orders
    let mut sides = Vec::new();
    for (distance, seed) in [(3.0, 21), (7.0, 22)] {
        let t0 = Instant::now();
        let r = run(&guns(distance, seed)).map_err(|e| e.to_string())?;
        within_budget(t0, budget)?;
        ensure(r.none_count == 0, || {
            format!("II {} silent trials", r.none_count)
        })?;
        let left = r.instrument("EGL").ok_or("EGL missing")?;
        ensure((left.rate - 0.5).abs() <= tol, || {
            format!("II left rate {}", left.rate)
        })?;
        sides.push([left.count, N - left.count]);
    }
    let test = chi_squared_homogeneity(&sides[0], &sides[1]).map_err(|e| e.to_string())?;
    ensure(test.p_value > 0.01, || {
        format!("II ordering p = {}", test.p_value)
    })?;
    notes.push(format!("II ordering p {:.3}", test.p_value));

    Ok(notes.join(", "))
}

fn scatter_statistics() -> Check {
    let s = Scenario::new(ModeSpec::default())
        .with_mirror(5.0)
        .with_instrument(Instrument::electron_gun("EG", 4.5, 1.0, 5.0))
        .with_seed(2026);
    let exp = Experiment::new(s).map_err(|e| e.to_string())?;
    let bins = 50;
    let mut counts = vec![0u64; bins];
    for t in 0..N {
        let x = exp
            .scatter(0, t)
            .map_err(|e| e.to_string())?
            .ok_or("no overlap")?;
        let xi = x - 5.0;
        ensure((-0.5..=0.0).contains(&xi), || format!("scatter at {x}"))?;
        let i = (((xi + 0.5) * bins as f64 / 0.5) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let cdf =
        |xi: f64| xi / 2.0 + (2.0 * std::f64::consts::PI * xi).sin() / (4.0 * std::f64::consts::PI);
    let expected: Vec<f64> = (0..bins)
        .map(|i| {
            let lo = -0.5 + 0.5 * i as f64 / bins as f64;
            let hi = -0.5 + 0.5 * (i + 1) as f64 / bins as f64;
            cdf(hi) - cdf(lo)
        })
        .collect();
    let test = chi_squared_goodness(&counts, &expected).map_err(|e| e.to_string())?;
    ensure(test.p_value > 0.01, || {
        format!(
            "chi2 = {:.2}, dof {}, p = {}",
            test.statistic, test.dof, test.p_value
        )
    })?;
    Ok(format!(
        "chi2 = {:.2}, dof {}, p = {:.3}",
        test.statistic, test.dof, test.p_value
    ))
}

fn timing() -> Check {
    let t = mirror_timing(1.0, 1.0, 5.0).map_err(|e| e.to_string())?;
    ensure(t.max_range == 11.0 && t.completion_time == 5.5, || {
        format!("{t:?}")
    })?;
    let w = |kind, d| window(kind, 1.0, 1.0, d).map_err(|e| e.to_string());
    ensure(
        w(WindowKind::ReflectionRegion, 5.0)? == Interval::open(4.0, 5.0),
        || "region".into(),
    )?;
    ensure(
        w(WindowKind::ReflectionTime, 5.0)? == Interval::closed(4.5, 5.5),
        || "right gun".into(),
    )?;
    ensure(
        w(WindowKind::LeftGunShot, 3.0)? == Interval::closed(2.5, 3.5),
        || "left gun".into(),
    )?;
    ensure(
        w(WindowKind::DetectorInsertion, 3.0)? == Interval::open(0.0, 2.5),
        || "insertion".into(),
    )?;
    ensure(w(WindowKind::DetectorInsertion, 0.5)?.is_empty(), || {
        "inside source".into()
    })?;
    Ok("(11, 5.5); windows exact".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("conservation", conservation),
        ("midpoint collapse", midpoint_collapse),
        ("discontinuity kinematics", discontinuity_kinematics),
        ("field continuity", continuity),
        ("end state", end_state),
        ("normalization", normalization),
        ("monte carlo", monte_carlo),
        ("scatter statistics", scatter_statistics),
        ("timing", timing),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
