//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Two criteria cannot be met as stated; for those the test checks that the
//! failure is the one the small-time analysis predicts.

use std::f64::consts::{E, PI};
use std::process::Command;

use levy_entropy::entropy::{gamma_entropy_closed_form, marginal_entropy};
use levy_entropy::experiments::{
    builtin_specs, entropy_monotonicity, entropy_slope, fractional_moments, gamma_asymptotics, halving_grid,
    hierarchy_table, inequality_suite, lss_convergence, monotone_grid, renyi_expansion, ExperimentReport, Status,
    Tolerances,
};
use levy_entropy::process_model::nominal_bg_index;
use levy_entropy::ProcessSpec;

const WIENER_TOL: f64 = 1e-4;
const GAMMA_DENSITY_TOL: f64 = 1e-3;
const GAMMA_GAP_TOL: f64 = 0.01;
const SLOPE_TOL_STABLE: f64 = 0.02;
const SLOPE_TOL_KERNEL: f64 = 0.05;
const RENYI_TOL: f64 = 1e-3;
const INEQUALITY_SLACK: f64 = 2e-4;
const MONOTONE_SLACK: f64 = 2e-4;
const DIVERGENCE_RATIO: f64 = -10.0;
const MOMENT_STDERR: f64 = 3.0;
const LSS_EXACT: f64 = 1e-8;
const BETA_TOL: f64 = 0.05;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(id: u32, pass: bool, detail: impl Into<String>) -> Line {
    let l = Line { id, pass, detail: detail.into() };
    println!("criterion {:>2}: {} {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    l
}

fn tolerances(pairs: &[(&str, f64)]) -> Tolerances {
    let mut t = Tolerances::default();
    for (k, v) in pairs {
        t.set_from_str(&format!("{k}={v}")).unwrap();
    }
    t
}

fn value(r: &ExperimentReport, name: &str) -> f64 {
    r.metric(name).unwrap_or_else(|| panic!("{} has no metric {name}", r.experiment_id)).value
}

fn wiener() -> ProcessSpec {
    ProcessSpec::wiener(1.0, 0.0).unwrap()
}
fn gamma11() -> ProcessSpec {
    ProcessSpec::gamma(1.0, 1.0).unwrap()
}
fn layered() -> ProcessSpec {
    ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0).unwrap()
}
fn tempered() -> ProcessSpec {
    ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0).unwrap()
}

fn gaussian_exactness() -> Line {
    let worst = halving_grid(1, 10)
        .into_iter()
        .map(|t| {
            let h = marginal_entropy(&wiener(), t).unwrap();
            assert_eq!(h.method.name(), "fft_grid");
            (h.value - 0.5 * (2.0 * PI * E * t).ln()).abs()
        })
        .fold(0.0, f64::max);
    line(1, worst <= WIENER_TOL, format!("max |h - closed form| = {worst:.3e} over t = 2^-1..2^-10"))
}

/// Returns the line and the measured gap at t = 0.01.
fn gamma_closed_form() -> (Line, f64, ExperimentReport) {
    let tol = tolerances(&[("gamma_density", GAMMA_DENSITY_TOL), ("gamma_gap", GAMMA_GAP_TOL)]);
    let r = gamma_asymptotics(&gamma11(), &[1.2, 2.0, 4.0], &[0.1, 0.05, 0.01], &tol).unwrap();
    let density = value(&r, "density_path_max_error");
    let gap = value(&r, "asymptotic_gap[t=0.01]");
    let rise = value(&r, "max_gap_increase");
    let l = line(
        2,
        r.status == Status::Pass,
        format!("density path err {density:.2e} (<= {GAMMA_DENSITY_TOL}); gap at t=0.01 {gap:.5} (< {GAMMA_GAP_TOL}); gap decreasing: {}", rise < 0.0),
    );
    (l, gap, r)
}

fn slopes() -> (Line, Vec<(ProcessSpec, f64, f64)>) {
    let grid = halving_grid(1, 10);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut detail = Vec::new();
    let specs = [
        ProcessSpec::sas(0.5, 1.0).unwrap(),
        ProcessSpec::sas(1.0, 1.0).unwrap(),
        ProcessSpec::sas(1.5, 1.0).unwrap(),
        ProcessSpec::sas(2.0, 1.0).unwrap(),
        layered(),
        tempered(),
    ];
    for spec in specs {
        let tol = match spec {
            ProcessSpec::SaS { .. } => SLOPE_TOL_STABLE,
            _ => SLOPE_TOL_KERNEL,
        };
        let r = entropy_slope(&spec, &grid, &tolerances(&[("slope", tol)])).unwrap();
        let slope = value(&r, "slope");
        let target = 1.0 / nominal_bg_index(&spec);
        let rel = (slope / target - 1.0).abs();
        pass &= rel <= tol;
        detail.push(format!("{} {slope:.4} vs {target:.4} ({:+.1}%)", spec.id(), 100.0 * (slope / target - 1.0)));
        rows.push((spec, slope, rel));
    }
    (line(3, pass, detail.join("; ")), rows)
}

fn renyi() -> Line {
    let ms: Vec<u32> = (4..=12).map(|k| 1 << k).collect();
    let tol = tolerances(&[("renyi_gap", RENYI_TOL), ("renyi_floor", 0.0)]);
    let mut pass = true;
    let mut detail = Vec::new();
    for spec in [wiener(), gamma11(), ProcessSpec::sas(1.0, 1.0).unwrap()] {
        let r = renyi_expansion(&spec, &[1.0], &ms, &tol).unwrap();
        pass &= r.status == Status::Pass;
        detail.push(format!(
            "{} |gap| {:.2e} at m=4096, max rise {:.1e}",
            spec.id(),
            value(&r, "abs_gap[t=1,m=4096]"),
            value(&r, "max_abs_gap_increase[t=1]")
        ));
    }
    line(4, pass, detail.join("; "))
}

fn inequalities() -> Line {
    let grid = [1, 2, 4, 8];
    let tol = tolerances(&[("inequality_slack", INEQUALITY_SLACK)]);
    let mut pass = true;
    let mut detail = Vec::new();
    for spec in [wiener(), ProcessSpec::sas(1.0, 1.0).unwrap(), ProcessSpec::laplace(1.0).unwrap()] {
        let r = inequality_suite(&spec, &grid, &grid, &tol).unwrap();
        pass &= r.status == Status::Pass;
        let worst = r.metrics.iter().map(|m| m.value).fold(f64::MAX, f64::min);
        detail.push(format!("{} min slack {worst:.2e}", spec.id()));
    }
    line(5, pass, detail.join("; "))
}

fn monotonicity() -> Line {
    let tol = tolerances(&[("monotone_slack", MONOTONE_SLACK)]);
    let grid = monotone_grid();
    let mut failing = Vec::new();
    let mut worst = f64::MAX;
    for spec in builtin_specs() {
        let r = entropy_monotonicity(&spec, &grid, &tol).unwrap();
        worst = worst.min(value(&r, "min_increment"));
        if r.status != Status::Pass {
            failing.push(spec.id());
        }
    }
    line(
        6,
        failing.is_empty(),
        format!("{} built-ins, smallest increment {worst:.3e}, failing {failing:?}", builtin_specs().len()),
    )
}

fn divergence() -> Line {
    let t: f64 = 0.01;
    let h = marginal_entropy(&gamma11(), t).unwrap().value;
    let ratio = h / (1.0 / t).ln();
    let oracle = gamma_entropy_closed_form(1.0, 1.0, t) / (1.0 / t).ln();
    line(7, ratio < DIVERGENCE_RATIO && (ratio - oracle).abs() < 1e-6, format!("h/log(1/t) = {ratio:.3} at t = 0.01"))
}

fn moments() -> Line {
    let tol = tolerances(&[("moment_stderr", MOMENT_STDERR)]);
    let r = fractional_moments(&ProcessSpec::sas(1.5, 1.0).unwrap(), 0.5, &[1.0, 0.1, 0.01], 7, &tol).unwrap();
    let pass = value(&r, "max_pairwise_z") <= MOMENT_STDERR && value(&r, "max_integral_z") <= MOMENT_STDERR;
    line(
        8,
        pass,
        format!("max pairwise z {:.2}, max integral z {:.2}", value(&r, "max_pairwise_z"), value(&r, "max_integral_z")),
    )
}

fn local_limit() -> Line {
    let times = [0.1, 0.01, 0.001];
    let tol = tolerances(&[("lss_exact", LSS_EXACT)]);
    let mut pass = true;
    let mut detail = Vec::new();
    for spec in [layered(), tempered()] {
        let r = lss_convergence(&spec, nominal_bg_index(&spec), &times, &tol).unwrap();
        let d: Vec<f64> = times.iter().map(|t| value(&r, &format!("sup_distance[t={t}]"))).collect();
        pass &= d[0] > d[1] && d[1] > d[2];
        detail.push(format!("{} {:.2e} > {:.2e} > {:.2e}", spec.id(), d[0], d[1], d[2]));
    }
    let mut sas_worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let r = lss_convergence(&ProcessSpec::sas(alpha, 1.0).unwrap(), alpha, &times, &tol).unwrap();
        for t in times {
            sas_worst = sas_worst.max(value(&r, &format!("sup_distance[t={t}]")));
        }
    }
    pass &= sas_worst <= LSS_EXACT;
    detail.push(format!("SaS max {sas_worst:.1e}"));
    line(9, pass, detail.join("; "))
}

fn hierarchy() -> Line {
    let specs = [gamma11(), ProcessSpec::sas(0.5, 1.0).unwrap(), ProcessSpec::sas(1.0, 1.0).unwrap(), wiener()];
    let (report, table) = hierarchy_table(&specs, 0.01, &tolerances(&[("beta_hat", BETA_TOL)])).unwrap();
    let ids: Vec<String> = specs.iter().map(ProcessSpec::id).collect();
    let order: Vec<String> = table.rows.iter().map(|r| r.spec_id.clone()).collect();
    let entropies: Vec<f64> = table.rows.iter().map(|r| r.entropy).collect();
    let ordered = order == ids && entropies.windows(2).all(|w| w[0] < w[1]);
    let betas: Vec<f64> = table.rows.iter().map(|r| r.beta_hat).collect();
    let betas_ok = betas.iter().zip([0.0, 0.5, 1.0, 2.0]).all(|(b, e)| (b - e).abs() <= BETA_TOL);
    line(
        10,
        ordered && betas_ok && report.status == Status::Pass,
        format!("h(L_0.01) = {entropies:.3?}, beta_hat = {betas:.3?}"),
    )
}

fn determinism() -> Line {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_levy-entropy"))
            .args([
                "verify",
                "moments",
                "--spec",
                r#"{"family":"SaS","params":{"alpha":1.5,"gamma":1}}"#,
                "--seed",
                "11",
                "--no-timestamp",
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let (a, b) = (run(), run());
    line(11, !a.is_empty() && a == b, format!("two verify runs, {} bytes each, identical: {}", a.len(), a == b))
}

#[test]
fn acceptance() {
    let mut lines = vec![gaussian_exactness()];
    let (l2, gap, gamma_report) = gamma_closed_form();
    lines.push(l2);
    let (l3, slope_rows) = slopes();
    lines.push(l3);
    lines.extend([
        renyi(),
        inequalities(),
        monotonicity(),
        divergence(),
        moments(),
        local_limit(),
        hierarchy(),
        determinism(),
    ]);

    // Criterion 2: closed form minus the expansion is (1 + π²/6)τt + O((τt)²),
    // about 0.026 at t = 0.01, so the 0.01 bound cannot hold. Everything
    // else in the criterion must.
    let leading = (1.0 + PI * PI / 6.0) * 0.01;
    assert!(!lines[1].pass);
    assert!((gap / leading - 1.0).abs() < 0.02, "gap {gap} vs leading term {leading}");
    let failing: Vec<&str> = gamma_report.failing_metrics().map(|m| m.name.as_str()).collect();
    assert_eq!(failing, ["asymptotic_gap[t=0.01]"]);

    // Criterion 3: stable slopes hold on 2^-1..2^-10. The kernel families are
    // still crossing over from their large-jump regime there, so their
    // slopes sit between the two regimes; on 2^-11..2^-20 they are within 5%.
    assert!(!lines[2].pass);
    for (spec, slope, rel) in &slope_rows {
        match spec {
            ProcessSpec::SaS { .. } => assert!(*rel <= SLOPE_TOL_STABLE, "{spec}: {slope}"),
            ProcessSpec::LayeredStable { alpha0, alpha_inf, .. } => {
                assert!(*rel > SLOPE_TOL_KERNEL);
                assert!(*slope > 1.0 / alpha_inf && *slope < 1.0 / alpha0, "{spec}: {slope}");
            }
            ProcessSpec::TemperedStable { alpha, .. } => {
                // finite variance: slope 1/2 at large t
                assert!(*rel > SLOPE_TOL_KERNEL);
                assert!(*slope > 0.5 && *slope < 1.0 / alpha, "{spec}: {slope}");
            }
            _ => unreachable!(),
        }
    }
    let deep = halving_grid(11, 10);
    for spec in [layered(), tempered()] {
        let r = entropy_slope(&spec, &deep, &tolerances(&[("slope", SLOPE_TOL_KERNEL)])).unwrap();
        let slope = value(&r, "slope");
        let target = 1.0 / nominal_bg_index(&spec);
        println!("    deep grid 2^-11..2^-20: {} slope {slope:.4} vs {target:.4}", spec.id());
        assert!((slope / target - 1.0).abs() <= SLOPE_TOL_KERNEL, "{spec}: {slope}");
    }

    let unexpected: Vec<u32> = lines.iter().filter(|l| !l.pass && l.id != 2 && l.id != 3).map(|l| l.id).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
