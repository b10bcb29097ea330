use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Value};
use snewton_bench::catalog::{catalog, CatalogEntry};
use snewton_bench::experiments::{
    initial_guess, run_efficiency, run_precision, run_robustness, run_stability, run_table1,
};
use snewton_bench::ExperimentReport;
use snewton_core::dual::{deflation_one_necessary, deflation_one_test, DEFAULT_RANK_TOL};
use snewton_core::linalg::CVector;
use snewton_core::parse::{parse_complex, SystemFile};
use snewton_core::twostep::{auto_tolerance, error_exponent, StepConfig, Tolerance};
use snewton_core::{multiplicity_structure, parse_system, refine as run_refine, PolySystem, C64};

use crate::args::{AnalyzeArgs, BenchArgs, CheckArgs, Experiment, Format, RefineArgs, SystemArgs};
use crate::Failure;

pub const SCHEMA: u32 = 1;

/// Text to print and the exit code to return.
pub struct Output {
    pub text: String,
    pub code: u8,
}

fn ok(text: String) -> Output {
    Output { text, code: 0 }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

struct Loaded {
    name: String,
    system: PolySystem,
    entry: Option<CatalogEntry>,
}

fn load(a: &SystemArgs) -> Result<Loaded, Failure> {
    if let Some(name) = &a.source.catalog {
        let cat = catalog();
        if let Some(e) = cat.get(name) {
            return Ok(Loaded {
                name: e.name.clone(),
                system: e.system.clone(),
                entry: Some(e),
            });
        }
        if let Some(u) = cat
            .unavailable
            .iter()
            .find(|u| u.name.eq_ignore_ascii_case(name))
        {
            return Err(usage(format!(
                "catalog entry {name} is unavailable: {}",
                u.reason
            )));
        }
        return Err(usage(format!(
            "unknown catalog entry {name:?}; available: {}, stability-K",
            cat.names().join(", ")
        )));
    }
    let path = a.source.file.as_ref().expect("clap requires one source");
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let system = if text.trim_start().starts_with('{') {
        SystemFile::from_json(&text)?.to_system()?
    } else {
        if a.vars.is_empty() {
            return Err(usage("a plain-text system file needs --vars"));
        }
        parse_system(&text, &a.vars)?
    };
    Ok(Loaded {
        name: path.display().to_string(),
        system,
        entry: None,
    })
}

fn parse_point(text: &str, n: usize, what: &str) -> Result<Vec<C64>, Failure> {
    let p = text
        .split(',')
        .map(|s| parse_complex(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if p.len() != n {
        return Err(usage(format!(
            "{what} has {} coordinates but the system has {n} variables",
            p.len()
        )));
    }
    Ok(p)
}

/// `--x0`, else the catalog zero (or its 2-digit guess when `guess`).
fn point(a: &SystemArgs, l: &Loaded, guess: bool) -> Result<Vec<C64>, Failure> {
    let n = l.system.num_vars();
    match (&a.x0, &l.entry) {
        (Some(s), _) => parse_point(s, n, "--x0"),
        (None, Some(e)) if guess => Ok(initial_guess(&e.zero, 2)),
        (None, Some(e)) => Ok(e.zero.clone()),
        (None, None) => Err(usage("--x0 is required for a system file")),
    }
}

fn tolerance(a: &SystemArgs, l: &Loaded) -> Result<Tolerance, Failure> {
    match a.tol.as_deref() {
        None => Ok(l
            .entry
            .as_ref()
            .map_or(Tolerance::Auto, |e| Tolerance::Fixed(e.tau))),
        Some("auto") => Ok(Tolerance::Auto),
        Some(s) => match s.parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(Tolerance::Fixed(t)),
            _ => Err(usage(format!(
                "--tol must be a positive number or auto, got {s:?}"
            ))),
        },
    }
}

fn tol_json(t: Tolerance) -> Value {
    match t {
        Tolerance::Fixed(t) => json!(t),
        Tolerance::Auto => json!("auto"),
    }
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn format_point(v: &[C64]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|z| format!("{:.15}{:+.3e}i", z.re, z.im))
        .collect();
    format!("({})", parts.join(", "))
}

fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

pub fn refine(a: &RefineArgs) -> Result<Output, Failure> {
    let l = load(&a.sys)?;
    let n = l.system.num_vars();
    let x0 = point(&a.sys, &l, true)?;
    let tol = tolerance(&a.sys, &l)?;
    let reference = match (&a.reference, &l.entry) {
        (Some(s), _) => Some(parse_point(s, n, "--reference")?),
        (None, Some(e)) => Some(e.zero.clone()),
        (None, None) => None,
    };
    let v_override = match &a.v {
        Some(s) => Some(CVector::from_vec(parse_point(s, n, "--v")?)),
        None => None,
    };
    let cfg = StepConfig {
        tol,
        seed: a.sys.seed,
        v_override,
        stop_residual: a.stop,
        max_iters: a.iters,
    };
    let trace = run_refine(&l.system, &x0, &cfg, reference.as_deref())?;
    let code = if trace.converged() { 0 } else { 2 };

    let text = match a.sys.format {
        Format::Json => render(&json!({
            "schema": SCHEMA,
            "command": "refine",
            "system": l.name,
            "tol": tol_json(tol),
            "seed": a.sys.seed,
            "trace": trace.to_json(a.timing),
        })),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "system: {}", l.name);
            let mut head = vec!["iter", "residual", "kappa", "step"];
            if trace.errors.is_some() {
                head.extend(["error", "exponent"]);
            }
            if a.timing {
                head.push("seconds");
            }
            let _ = writeln!(out, "{}", head.join("\t"));
            for k in 0..trace.points.len() {
                let mut row = vec![k.to_string(), format!("{:.6e}", trace.residuals[k])];
                match k.checked_sub(1).map(|i| &trace.steps[i]) {
                    Some(s) => {
                        row.push(s.kappa.to_string());
                        row.push(
                            if s.regular {
                                "newton"
                            } else if s.first_skipped {
                                "kernel-only"
                            } else {
                                "two-step"
                            }
                            .to_string(),
                        );
                    }
                    None => row.extend(["-".to_string(), "start".to_string()]),
                }
                if let Some(e) = &trace.errors {
                    row.push(format!("{:.6e}", e[k]));
                    row.push(
                        error_exponent(e[k]).map_or("exact".to_string(), |x| format!("{x:03}")),
                    );
                }
                if a.timing {
                    row.push(
                        k.checked_sub(1)
                            .map_or("-".to_string(), |i| format!("{:.6}", trace.elapsed[i])),
                    );
                }
                let _ = writeln!(out, "{}", row.join("\t"));
            }
            let final_point: Vec<C64> = trace.final_point().iter().copied().collect();
            let _ = writeln!(out, "final point: {}", format_point(&final_point));
            let _ = writeln!(
                out,
                "stop: {}",
                serde_json::to_value(trace.stop).unwrap().as_str().unwrap()
            );
            out
        }
    };
    Ok(Output { text, code })
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Output, Failure> {
    let l = load(&a.sys)?;
    let x = point(&a.sys, &l, false)?;
    let rank_tol = a
        .rank_tol
        .or(l.entry.as_ref().map(|e| e.rank_tol))
        .unwrap_or(DEFAULT_RANK_TOL);
    let r = multiplicity_structure(&l.system, &x, rank_tol, a.max_order)?;
    let regular = r.breadth == 0;
    let text = match a.sys.format {
        Format::Json => render(&json!({
            "schema": SCHEMA,
            "command": "analyze",
            "system": l.name,
            "point": pairs(&x),
            "rank_tol": rank_tol,
            "regular": regular,
            "report": r,
        })),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "system: {}", l.name);
            let _ = writeln!(out, "point: {}", format_point(&x));
            if regular {
                let _ = writeln!(out, "regular zero (breadth 0)");
            }
            let _ = writeln!(out, "breadth: {}", r.breadth);
            let _ = writeln!(out, "depth: {}", r.depth);
            let _ = writeln!(out, "multiplicity: {}", r.multiplicity);
            let _ = writeln!(out, "dims by order: {:?}", r.dims);
            if !r.stabilized {
                let _ = writeln!(out, "warning: not stabilized by order {}", a.max_order);
            }
            if r.rank_ambiguous {
                let _ = writeln!(
                    out,
                    "warning: a singular value lies within 10x of the rank threshold"
                );
            }
            out
        }
    };
    Ok(ok(text))
}

/// Tolerance for the deflation-one test; `auto` on a zero Jacobian falls
/// back to 0.1, any positive value giving corank n there.
fn check_tau(a: &SystemArgs, l: &Loaded, x: &[C64]) -> Result<f64, Failure> {
    match tolerance(a, l)? {
        Tolerance::Fixed(t) => Ok(t),
        Tolerance::Auto if a.tol.is_none() => Ok(0.1),
        Tolerance::Auto => match auto_tolerance(&l.system.jacobian(x)?) {
            Ok(t) => Ok(t),
            Err(snewton_core::Error::ZeroMatrix) => Ok(0.1),
            Err(e) => Err(e.into()),
        },
    }
}

pub fn check(a: &CheckArgs) -> Result<Output, Failure> {
    let l = load(&a.sys)?;
    let x = point(&a.sys, &l, false)?;
    let tau = check_tau(&a.sys, &l, &x)?;
    let rank_tol = a
        .rank_tol
        .or(l.entry.as_ref().map(|e| e.rank_tol))
        .unwrap_or(DEFAULT_RANK_TOL);
    let v = deflation_one_test(&l.system, &x, tau, a.trials, a.sys.seed)?;
    let necessary = if v.regular {
        None
    } else {
        Some(deflation_one_necessary(&l.system, &x, rank_tol)?)
    };
    let text = match a.sys.format {
        Format::Json => render(&json!({
            "schema": SCHEMA,
            "command": "check",
            "system": l.name,
            "point": pairs(&x),
            "tau": tau,
            "kappa": v.kappa,
            "regular": v.regular,
            "necessary": necessary,
            "sufficient": v.deflation_one,
            "deflation_one": v.deflation_one,
            "sigma_min": v.sigma_min,
            "thresholds": v.thresholds,
        })),
        Format::Table => {
            let pf = |b: bool| if b { "pass" } else { "FAIL" };
            let mut out = format!("system: {}\nkappa: {}\n", l.name, v.kappa);
            match necessary {
                None => out.push_str("regular\n"),
                Some(nec) => {
                    let verdict = if v.deflation_one {
                        "deflation-one"
                    } else {
                        "not deflation-one"
                    };
                    let _ = writeln!(
                        out,
                        "necessary: {}, sufficient: {}: {verdict}",
                        pf(nec),
                        pf(v.deflation_one)
                    );
                }
            }
            out
        }
    };
    Ok(ok(text))
}

fn parse_sizes(sizes: &[String]) -> Result<Vec<(usize, usize)>, Failure> {
    sizes
        .iter()
        .map(|s| {
            let (n, k) = s
                .split_once(':')
                .ok_or_else(|| usage(format!("size {s:?} is not n:k")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("size {s:?} is not n:k")))
            };
            let (n, k) = (parse(n)?, parse(k)?);
            if !(1 <= k && k <= n) {
                return Err(usage(format!("size {s:?} needs 1 <= k <= n")));
            }
            Ok((n, k))
        })
        .collect()
}

pub fn bench(a: &BenchArgs) -> Result<Output, Failure> {
    let mut timing = a.timing;
    let report: ExperimentReport = match a.experiment {
        Experiment::Table1 => run_table1(&catalog(), a.iters, a.seed)?,
        Experiment::Stability => {
            let mut r = run_precision(a.iters, a.seed)?;
            let grid = run_stability(&a.k_values, &a.tols, a.seed)?;
            r.experiment = "stability".to_string();
            r.rows.extend(grid.rows);
            r
        }
        Experiment::Efficiency => {
            // the measurement is the output
            timing = true;
            run_efficiency(&parse_sizes(&a.sizes)?, a.iters, a.seed)?
        }
        Experiment::Robustness => run_robustness(a.seed)?,
    };
    let text = match a.format {
        Format::Json => render(&json!({
            "schema": SCHEMA,
            "command": "bench",
            "report": report.to_json(timing),
        })),
        Format::Table => report.to_table(timing),
    };
    Ok(ok(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse_and_validate() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(
            parse_sizes(&s(&["10:2", "50:48"])).unwrap(),
            vec![(10, 2), (50, 48)]
        );
        assert!(parse_sizes(&s(&["10"])).is_err());
        assert!(parse_sizes(&s(&["2:3"])).is_err());
        assert!(parse_sizes(&s(&["a:1"])).is_err());
    }
}
