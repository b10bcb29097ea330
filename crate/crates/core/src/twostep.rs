//! Two-step Newton refinement for deflation-one singular zeros.
//!
//! Each step splits the Jacobian `Df(x) = U Sigma V*` at a tolerance `tau`
//! into a regular part `(U1, Sigma1, V1)` and a near-kernel part
//! `(U2, Sigma2, V2)` of dimension `kappa`, then
//!
//! 1. moves along the regular directions: `x' = x - V1 Sigma1^-1 U1* f(x)`;
//! 2. corrects inside the kernel: `B' delta = -U2* Df(x') v` with
//!    `B' = U2* (D^2 f(x') v) V2` and `x'' = x' + V2 delta`.
//!
//! `U2`, `V2` and the unit direction `v` in `im V2` all come from `Df(x)`.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{check_len, Error, Result};
use crate::linalg::{
    orthonormality_defect, singular_values, solve, split_svd, CMatrix, CVector, SvdSplit,
};
use crate::poly::{PolySystem, C64};
use crate::random::{self, Rng};

/// How the Jacobian rank tolerance is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    Fixed(f64),
    /// Picked from the largest singular-value gap, see [`auto_tolerance`].
    Auto,
}

#[derive(Clone, Debug)]
pub struct StepConfig {
    pub tol: Tolerance,
    pub seed: u64,
    /// Fixed direction for the kernel step; normalized before use.
    pub v_override: Option<CVector>,
    pub stop_residual: f64,
    pub max_iters: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            tol: Tolerance::Auto,
            seed: 0,
            v_override: None,
            stop_residual: 1e-13,
            max_iters: 20,
        }
    }
}

impl StepConfig {
    pub fn with_tol(tau: f64) -> Self {
        StepConfig {
            tol: Tolerance::Fixed(tau),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if let Tolerance::Fixed(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidTolerance(t));
            }
        }
        if !(self.stop_residual > 0.0) {
            return Err(Error::InvalidTolerance(self.stop_residual));
        }
        Ok(())
    }
}

/// Intermediates of one two-step iteration.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub x: CVector,
    pub split: SvdSplit,
    pub kappa: usize,
    /// `kappa == 0`: an ordinary Newton step was taken instead.
    pub regular: bool,
    /// `kappa == n`: the regular-direction step was skipped and `x' = x`.
    pub first_skipped: bool,
    pub x_prime: CVector,
    pub v: Option<CVector>,
    pub b_prime: Option<CMatrix>,
    pub delta: Option<CVector>,
    pub x_double_prime: CVector,
    pub residual: f64,
    pub residual_prime: f64,
    pub residual_double_prime: f64,
}

/// `Df(x) + (D^2 f(x) v) V2 V2*`.
pub fn operator_a(sys: &PolySystem, x: &[C64], v: &CVector, v2: &CMatrix) -> Result<CMatrix> {
    let n = sys.num_vars();
    check_len("kernel basis rows", n, v2.nrows())?;
    check_len("direction", n, v.len())?;
    let defect = orthonormality_defect(v2);
    if defect > 1e-8 {
        return Err(Error::NotOrthonormal(defect));
    }
    let norm = v.norm();
    let outside = (v - v2 * (v2.adjoint() * v)).norm();
    if (norm - 1.0).abs() > 1e-8 || outside > 1e-8 {
        return Err(Error::BadDirection(norm));
    }
    let j = sys.jacobian(x)?;
    let h = sys.dir_hessian(x, v.as_slice())?;
    Ok(j + h * v2 * v2.adjoint())
}

/// `U2* (D^2 f(x) v) V2`; linear in `v`.
pub fn operator_b(
    sys: &PolySystem,
    x: &[C64],
    v: &CVector,
    u2: &CMatrix,
    v2: &CMatrix,
) -> Result<CMatrix> {
    check_len("left kernel basis rows", sys.len(), u2.nrows())?;
    check_len("kernel basis rows", sys.num_vars(), v2.nrows())?;
    let h = sys.dir_hessian(x, v.as_slice())?;
    Ok(u2.adjoint() * h * v2)
}

/// `x - V1 Sigma1^-1 U1* f(x)`.
pub fn first_refinement(sys: &PolySystem, x: &[C64], split: &SvdSplit) -> Result<CVector> {
    if let Some(&s) = split.sigma1.iter().find(|&&s| !(s > split.tau)) {
        return Err(Error::InconsistentSplit {
            sigma: s,
            tol: split.tau,
        });
    }
    let fx = sys.eval(x)?;
    let mut w = split.u1.adjoint() * fx;
    for (wi, s) in w.iter_mut().zip(&split.sigma1) {
        *wi /= *s;
    }
    Ok(CVector::from_column_slice(x) - &split.v1 * w)
}

/// Result of the kernel correction.
#[derive(Clone, Debug)]
pub struct SecondStep {
    pub b_prime: CMatrix,
    pub delta: CVector,
    pub x: CVector,
}

/// Solves `B' delta = -U2* Df(x') v` and returns `x' + V2 delta`.
pub fn second_refinement(
    sys: &PolySystem,
    x_prime: &[C64],
    v: &CVector,
    u2: &CMatrix,
    v2: &CMatrix,
) -> Result<SecondStep> {
    let b_prime = operator_b(sys, x_prime, v, u2, v2)?;
    let rhs = -(u2.adjoint() * sys.jacobian(x_prime)? * v);
    let delta = solve(&b_prime, &rhs)?;
    let x = CVector::from_column_slice(x_prime) + v2 * &delta;
    Ok(SecondStep { b_prime, delta, x })
}

/// Rank tolerance from the widest singular-value gap.
///
/// Among `sigma_i >= 1e-10 sigma_1`, the index with the largest ratio
/// `sigma_i / sigma_{i+1}` is taken; if that ratio exceeds `1e3` the result
/// is `sqrt(sigma_i sigma_{i+1})`, otherwise `sigma_n / 2` so that no
/// singular value is cut.
pub fn auto_tolerance(m: &CMatrix) -> Result<f64> {
    let s = singular_values(m);
    let s1 = s.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let floor = 1e-16 * s1;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..s.len().saturating_sub(1) {
        if s[i] < 1e-10 * s1 {
            break;
        }
        let next = s[i + 1].max(floor);
        let ratio = s[i] / next;
        if best.is_none_or(|(r, _)| ratio > r) {
            best = Some((ratio, (s[i] * next).sqrt()));
        }
    }
    match best {
        Some((ratio, tau)) if ratio > 1e3 => Ok(tau),
        _ => Ok((s[s.len() - 1] / 2.0).max(floor)),
    }
}

fn resolve_tolerance(tol: Tolerance, jac: &CMatrix) -> Result<f64> {
    match tol {
        Tolerance::Fixed(t) => Ok(t),
        Tolerance::Auto => match auto_tolerance(jac) {
            // an exactly vanishing Jacobian is all kernel at any tolerance
            Err(Error::ZeroMatrix) => Ok(1.0),
            other => other,
        },
    }
}

fn sample_direction(cfg: &StepConfig, v2: &CMatrix, rng: &mut Rng) -> CVector {
    match &cfg.v_override {
        Some(v) => v / C64::new(v.norm(), 0.0),
        None => v2 * random::unit_vector(v2.ncols(), rng),
    }
}

/// One iteration of the two-step method from `x`.
pub fn two_step(sys: &PolySystem, x: &[C64], cfg: &StepConfig) -> Result<StepResult> {
    two_step_with(sys, x, cfg, &mut random::rng(cfg.seed))
}

fn two_step_with(
    sys: &PolySystem,
    x: &[C64],
    cfg: &StepConfig,
    rng: &mut Rng,
) -> Result<StepResult> {
    cfg.validate()?;
    if !sys.is_square() {
        return Err(Error::NotSquare {
            rows: sys.len(),
            cols: sys.num_vars(),
        });
    }
    check_len("starting point", sys.num_vars(), x.len())?;
    if let Some(v) = &cfg.v_override {
        check_len("direction override", sys.num_vars(), v.len())?;
        if v.norm() == 0.0 {
            return Err(Error::BadDirection(0.0));
        }
    }
    let n = sys.num_vars();
    let jac = sys.jacobian(x)?;
    let tau = resolve_tolerance(cfg.tol, &jac)?;
    let split = split_svd(&jac, tau)?;
    let kappa = split.kappa;
    let residual = sys.residual(x)?;
    let x_vec = CVector::from_column_slice(x);

    if kappa == 0 {
        let fx = sys.eval(x)?;
        let step = solve(&jac, &fx)?;
        let xn = &x_vec - step;
        let r = sys.residual(xn.as_slice())?;
        return Ok(StepResult {
            x: x_vec.clone(),
            split,
            kappa,
            regular: true,
            first_skipped: false,
            x_prime: x_vec,
            v: None,
            b_prime: None,
            delta: None,
            x_double_prime: xn,
            residual,
            residual_prime: residual,
            residual_double_prime: r,
        });
    }

    let first_skipped = kappa == n;
    let x_prime = if first_skipped {
        x_vec.clone()
    } else {
        first_refinement(sys, x, &split)?
    };
    let residual_prime = sys.residual(x_prime.as_slice())?;

    let mut v = sample_direction(cfg, &split.v2, rng);
    let second = match second_refinement(sys, x_prime.as_slice(), &v, &split.u2, &split.v2) {
        Err(Error::Singular { .. }) if cfg.v_override.is_none() => {
            v = sample_direction(cfg, &split.v2, rng);
            second_refinement(sys, x_prime.as_slice(), &v, &split.u2, &split.v2)?
        }
        other => other?,
    };
    let residual_double_prime = sys.residual(second.x.as_slice())?;
    Ok(StepResult {
        x: x_vec,
        split,
        kappa,
        regular: false,
        first_skipped,
        x_prime,
        v: Some(v),
        b_prime: Some(second.b_prime),
        delta: Some(second.delta),
        x_double_prime: second.x,
        residual,
        residual_prime,
        residual_double_prime,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    Stagnated,
}

/// History of an iterated refinement.
#[derive(Clone, Debug)]
pub struct RefineTrace {
    pub steps: Vec<StepResult>,
    /// `points[0]` is the start, `points[k]` the result of step `k`.
    pub points: Vec<CVector>,
    pub residuals: Vec<f64>,
    /// Distances to the reference zero, when one was supplied.
    pub errors: Option<Vec<f64>>,
    /// Wall-clock seconds per step.
    pub elapsed: Vec<f64>,
    pub stop: StopReason,
}

/// `ceil(log10 e)`, the decimal exponent reported in convergence tables;
/// `None` for an exact hit.
pub fn error_exponent(e: f64) -> Option<i32> {
    (e > 0.0).then(|| e.log10().ceil() as i32)
}

fn complex_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl RefineTrace {
    pub fn final_point(&self) -> &CVector {
        self.points.last().expect("trace has a start point")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("trace has a start point")
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn exponents(&self) -> Option<Vec<Option<i32>>> {
        self.errors
            .as_ref()
            .map(|e| e.iter().map(|&x| error_exponent(x)).collect())
    }

    /// JSON view; timings are included only on request so that repeated
    /// runs with the same seed produce identical output.
    pub fn to_json(&self, include_timing: bool) -> Value {
        let exps = self.exponents();
        let iterations: Vec<Value> = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut row = json!({
                    "iter": k,
                    "point": complex_pairs(p),
                    "residual": self.residuals[k],
                });
                if k > 0 {
                    let s = &self.steps[k - 1];
                    row["kappa"] = json!(s.kappa);
                    row["regular"] = json!(s.regular);
                    row["first_skipped"] = json!(s.first_skipped);
                    if include_timing {
                        row["seconds"] = json!(self.elapsed[k - 1]);
                    }
                }
                if let (Some(e), Some(x)) = (&self.errors, &exps) {
                    row["error"] = json!(e[k]);
                    row["exponent"] = json!(x[k]);
                }
                row
            })
            .collect();
        json!({
            "iterations": iterations,
            "final_point": complex_pairs(self.final_point()),
            "final_residual": self.final_residual(),
            "stop": self.stop,
        })
    }
}

/// Iterates [`two_step`] until `||f(x)|| <= stop_residual`, `max_iters`
/// steps, or a step shorter than `1e-15 (1 + ||x||)`. A fresh direction is
/// drawn each iteration from one generator seeded with `cfg.seed`.
pub fn refine(
    sys: &PolySystem,
    x0: &[C64],
    cfg: &StepConfig,
    reference: Option<&[C64]>,
) -> Result<RefineTrace> {
    cfg.validate()?;
    check_len("starting point", sys.num_vars(), x0.len())?;
    if let Some(r) = reference {
        check_len("reference zero", sys.num_vars(), r.len())?;
    }
    let reference = reference.map(CVector::from_column_slice);
    let err = |p: &CVector| reference.as_ref().map(|r| (p - r).norm());

    let mut rng = random::rng(cfg.seed);
    let mut x = CVector::from_column_slice(x0);
    let mut trace = RefineTrace {
        steps: Vec::new(),
        points: vec![x.clone()],
        residuals: vec![sys.residual(x0)?],
        errors: err(&x).map(|e| vec![e]),
        elapsed: Vec::new(),
        stop: StopReason::MaxIters,
    };
    if trace.residuals[0] <= cfg.stop_residual {
        trace.stop = StopReason::Converged;
        return Ok(trace);
    }
    for _ in 0..cfg.max_iters {
        let t0 = Instant::now();
        let step = two_step_with(sys, x.as_slice(), cfg, &mut rng)?;
        trace.elapsed.push(t0.elapsed().as_secs_f64());
        let next = step.x_double_prime.clone();
        let moved = (&next - &x).norm();
        let r = step.residual_double_prime;
        trace.residuals.push(r);
        if let (Some(errs), Some(e)) = (trace.errors.as_mut(), err(&next)) {
            errs.push(e);
        }
        trace.points.push(next.clone());
        trace.steps.push(step);
        let scale = 1.0 + x.norm();
        x = next;
        if r <= cfg.stop_residual {
            trace.stop = StopReason::Converged;
            break;
        }
        if moved < 1e-15 * scale {
            trace.stop = StopReason::Stagnated;
            break;
        }
    }
    Ok(trace)
}
