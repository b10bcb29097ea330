//! Experiment runners: convergence from rough guesses, cluster stability,
//! per-iteration cost against deflation, and the Gauss-Newton stall case.

use std::time::Instant;

use snewton_core::linalg::{least_squares, singular_values, CMatrix, CVector};
use snewton_core::lvz::{deflate_once, deflate_structured, gauss_newton, GnTrace};
use snewton_core::twostep::{error_exponent, two_step, StepConfig, Tolerance};
use snewton_core::{refine, RefineTrace, Result, C64};

use crate::catalog::{robustness_pair, stability, Catalog, CatalogEntry};
use crate::report::{pairs, ExperimentReport, ReportRow, Timing};
use crate::variant::{perturbed_start, random_variant};

/// Iterations shown in the convergence tables.
pub const TABLE_ITERS: usize = 3;

/// `xi_j + (-1)^j 10^-digits`: every coordinate keeps `digits` correct
/// decimals.
pub fn initial_guess(zero: &[C64], digits: u32) -> Vec<C64> {
    let h = 10f64.powi(-(digits as i32));
    zero.iter()
        .enumerate()
        .map(|(j, z)| z + C64::new(if j % 2 == 0 { h } else { -h }, 0.0))
        .collect()
}

/// Fixed `tau`, no residual stop: runs exactly `iters` steps unless the
/// iterate stops moving.
pub fn table_config(tau: f64, iters: usize, seed: u64) -> StepConfig {
    StepConfig {
        tol: Tolerance::Fixed(tau),
        seed,
        v_override: None,
        stop_residual: f64::MIN_POSITIVE,
        max_iters: iters,
    }
}

pub fn run_convergence(
    entry: &CatalogEntry,
    digits: u32,
    iters: usize,
    tau: f64,
    seed: u64,
) -> Result<RefineTrace> {
    let x0 = initial_guess(&entry.zero, digits);
    refine(
        &entry.system,
        &x0,
        &table_config(tau, iters, seed),
        Some(&entry.zero),
    )
}

fn convergence_row(system: &str, config: String, trace: &RefineTrace) -> ReportRow {
    ReportRow {
        system: system.to_string(),
        config,
        kappa: trace.steps.first().map(|s| s.kappa),
        exponents: trace.exponents().unwrap_or_default(),
        errors: trace.errors.clone().unwrap_or_default(),
        limit: Some(pairs(trace.final_point())),
        converged: Some(trace.converged()),
        ..Default::default()
    }
}

/// Two-digit guesses on every available benchmark system.
pub fn run_table1(cat: &Catalog, iters: usize, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("table1");
    for e in cat.benchmarks() {
        let trace = run_convergence(e, 2, iters, e.tau, seed)?;
        let mut row = convergence_row(&e.name, format!("tau={:e} digits=2", e.tau), &trace);
        row.target = Some(e.zero.iter().map(|z| [z.re, z.im]).collect());
        row.limit = None;
        report.rows.push(row);
    }
    report.unavailable = cat.unavailable.clone();
    Ok(report)
}

/// The cluster system `[x^2, y^2, z^2 + 10^-2 z]` from `(h, h, h)` with
/// `tau = 1e-2`.
pub fn precision_trace(h: f64, iters: usize, seed: u64) -> Result<RefineTrace> {
    let e = stability(2);
    let x0 = vec![C64::new(h, 0.0); 3];
    refine(
        &e.system,
        &x0,
        &table_config(1e-2, iters, seed),
        Some(&e.zero),
    )
}

/// Convergence to the origin for starts `(h, h, h)`, `h = 1e-5, 1e-4, 1e-3`.
pub fn run_precision(iters: usize, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("precision");
    for h in [1e-5, 1e-4, 1e-3] {
        let trace = precision_trace(h, iters, seed)?;
        let mut row = convergence_row("stability-2", format!("tau=1e-2 x=({h:e})^3"), &trace);
        row.limit = None;
        report.rows.push(row);
    }
    Ok(report)
}

/// Start `(1e-3, 1e-3, 1e-3)` on `[x^2, y^2, z^2 + 10^-k z]`. With
/// `kappa* = 3` the two zeros are seen as one and the target is their
/// midpoint `(0, 0, -10^-k / 2)`; with `kappa* = 2` it is the origin.
pub fn cluster_trace(k: i32, tau: f64, iters: usize, seed: u64) -> Result<(RefineTrace, Vec<C64>)> {
    let e = stability(k);
    let x0 = vec![C64::new(1e-3, 0.0); 3];
    let cfg = table_config(tau, iters, seed);
    let first = two_step(&e.system, &x0, &cfg)?;
    let target = if first.kappa == 3 {
        vec![
            C64::default(),
            C64::default(),
            C64::new(-0.5 * 10f64.powi(-k), 0.0),
        ]
    } else {
        e.zero.clone()
    };
    let trace = refine(&e.system, &x0, &cfg, Some(&target))?;
    Ok((trace, target))
}

pub fn run_stability(k_values: &[i32], tau_values: &[f64], seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("stability");
    for &k in k_values {
        for &tau in tau_values {
            let (trace, target) = cluster_trace(k, tau, TABLE_ITERS, seed)?;
            let mut row = convergence_row(
                &format!("stability-{k}"),
                format!("eta=(0,0,-1e-{k}) tau={tau:e} x=(1e-3)^3"),
                &trace,
            );
            row.target = Some(target.iter().map(|z| [z.re, z.im]).collect());
            row.limit = None;
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// Tolerance splitting the spectrum of `j` between its `n - k` largest
/// and `k` smallest singular values (geometric mean of the two).
pub fn kernel_tolerance(j: &CMatrix, k: usize) -> f64 {
    let s = singular_values(j);
    let n = s.len();
    match k {
        0 => s[n - 1] / 2.0,
        k if k >= n => 10.0 * s[0],
        k => (s[n - k - 1] * s[n - k]).sqrt(),
    }
}

/// Mean seconds for one two-step iteration and one deflation plus
/// Gauss-Newton step on a random `(n, k)` variant, after a discarded
/// warm-up run.
pub fn time_iteration(n: usize, k: usize, iters: usize, seed: u64) -> Result<Timing> {
    let v = random_variant(n, k, seed);
    let x0 = perturbed_start(&v.zero, 1e-3, seed ^ 0x5eed);
    let tau = kernel_tolerance(&v.system.jacobian(x0.as_slice())?, k);
    let cfg = table_config(tau, 1, seed);
    let lvz_once = || -> Result<GnTrace> {
        let (d, y0) = deflate_once(&v.system, x0.as_slice(), tau, seed)?;
        gauss_newton(&d.g, y0.as_slice(), 1, f64::MIN_POSITIVE)
    };

    two_step(&v.system, x0.as_slice(), &cfg)?;
    lvz_once()?;
    let (mut t_two, mut t_lvz) = (0.0, 0.0);
    for _ in 0..iters.max(1) {
        let t = Instant::now();
        two_step(&v.system, x0.as_slice(), &cfg)?;
        t_two += t.elapsed().as_secs_f64();
        let t = Instant::now();
        lvz_once()?;
        t_lvz += t.elapsed().as_secs_f64();
    }
    let m = iters.max(1) as f64;
    Ok(Timing {
        two_step: t_two / m,
        lvz: t_lvz / m,
    })
}

pub fn run_efficiency(
    sizes: &[(usize, usize)],
    iters: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("efficiency");
    for &(n, k) in sizes {
        let timing = time_iteration(n, k, iters, seed)?;
        report.rows.push(ReportRow {
            system: format!("variant n={n}"),
            config: format!("n={n} kappa={k} iters={iters}"),
            kappa: Some(k),
            timing: Some(timing),
            ..Default::default()
        });
    }
    Ok(report)
}

/// Gauss-Newton on the deflated robustness pair
/// `g = [x - y^2, x^2 - y^2, l - 2y, 2xl - 2y]`, the multiplier started at
/// its least-squares value.
pub fn robustness_lvz(x0: &[C64], max_iter: usize) -> Result<GnTrace> {
    let f = robustness_pair().system;
    let one = C64::new(1.0, 0.0);
    let (e1, e2) = (
        CMatrix::from_column_slice(2, 1, &[one, C64::default()]),
        CMatrix::from_column_slice(2, 1, &[C64::default(), one]),
    );
    let g = deflate_structured(&f, &e1, &e2, &CVector::from_element(1, one))?;
    // multiplier rows of g are affine in l: A l + c
    let j = f.jacobian(x0)?;
    let a = &j * &e1;
    let c: CVector = (&j * &e2).column(0).into_owned();
    let l = least_squares(&a, &(-c))?;
    let mut y0 = x0.to_vec();
    y0.push(l[0]);
    gauss_newton(&g, &y0, max_iter, 1e-13)
}

pub fn robustness_two_step(x0: &[C64], max_iters: usize, seed: u64) -> Result<RefineTrace> {
    let e = robustness_pair();
    refine(
        &e.system,
        x0,
        &table_config(e.tau, max_iters, seed),
        Some(&e.zero),
    )
}

pub fn run_robustness_from(x0: &[C64], seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("robustness");
    let trace = robustness_two_step(x0, 6, seed)?;
    report.rows.push(convergence_row(
        "robustness-pair",
        "two-step tau=0.1".into(),
        &trace,
    ));

    let gn = robustness_lvz(x0, 200)?;
    let origin = CVector::zeros(3);
    let errors: Vec<f64> = gn.iterates.iter().map(|y| (y - &origin).norm()).collect();
    report.rows.push(ReportRow {
        system: "robustness-pair".into(),
        config: "deflated + gauss-newton".into(),
        exponents: errors.iter().map(|&e| error_exponent(e)).collect(),
        errors,
        limit: Some(pairs(gn.final_point())),
        stationary: Some(gn.stationary),
        converged: Some(gn.converged),
        ..Default::default()
    });
    Ok(report)
}

pub fn run_robustness(seed: u64) -> Result<ExperimentReport> {
    run_robustness_from(&[C64::new(0.3, 0.0), C64::new(0.3, 0.0)], seed)
}
