//! Deflation by multiplier augmentation and Gauss-Newton refinement.
//!
//! For `f: C^N -> C^m` with `rank Df(x) = N - kappa`, one deflation step
//! appends `N - kappa + 1` multipliers `lambda` and forms
//!
//! ```text
//! g(X, lambda) = [ f(X);  Df(X) B lambda;  b^T lambda - 1 ]
//! ```
//!
//! with random `B` (`N x (N - kappa + 1)`) and `b`. The singular zero of
//! `f` lifts to a zero of `g` whose Jacobian has smaller column-rank
//! deficiency; repeating the step eventually gives full column rank.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::{least_squares, singular_values, vcat, CMatrix, CVector};
use crate::poly::{Poly, PolySystem, C64};
use crate::random;

/// Step length below which Gauss-Newton is considered stalled.
pub const STALL_STEP: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct DeflatedSystem {
    pub g: PolySystem,
    pub b_mat: CMatrix,
    pub b_vec: CVector,
    /// Variable count of the system that was deflated.
    pub parent_vars: usize,
    pub parent_polys: usize,
    pub kappa: usize,
}

impl DeflatedSystem {
    pub fn multipliers(&self) -> usize {
        self.b_vec.len()
    }
}

/// `sum_j d f_i / dX_j * w_j` for polynomial weights `w`, all in the
/// enlarged variable set.
fn contract_jacobian(sys: &PolySystem, total_vars: usize, weights: &[Poly]) -> Vec<Poly> {
    sys.derivatives()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(weights)
                .fold(Poly::zero(total_vars), |acc, (d, w)| {
                    &acc + &(&d.extend_vars(total_vars) * w)
                })
        })
        .collect()
}

/// Numerical corank of `Df(x)`: columns minus the count of `sigma > tau`.
pub fn jacobian_corank(sys: &PolySystem, x: &[C64], tau: f64) -> Result<usize> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidTolerance(tau));
    }
    let s = singular_values(&sys.jacobian(x)?);
    Ok(sys.num_vars() - s.iter().filter(|&&v| v > tau).count())
}

/// One deflation step with seeded complex Gaussian `B`, `b`; returns the
/// deflated system and `(x, lambda)` with `lambda` the least-squares
/// solution of `[Df(x) B; b^T] lambda = [0; 1]`.
pub fn deflate_once(
    sys: &PolySystem,
    x: &[C64],
    tau: f64,
    seed: u64,
) -> Result<(DeflatedSystem, CVector)> {
    check_len("deflation point", sys.num_vars(), x.len())?;
    let n = sys.num_vars();
    let kappa = jacobian_corank(sys, x, tau)?;
    if kappa == 0 {
        return Err(Error::NothingToDeflate);
    }
    let r = n - kappa + 1;
    let mut rng = random::rng(seed);
    let b_mat = random::gaussian_matrix(n, r, &mut rng);
    let b_vec = random::gaussian_vector(r, &mut rng);

    let total = n + r;
    // (B lambda)_j as polynomials in the multiplier variables
    let weights: Vec<Poly> = (0..n)
        .map(|j| {
            (0..r).fold(Poly::zero(total), |acc, l| {
                &acc + &Poly::var(total, n + l).scale(b_mat[(j, l)])
            })
        })
        .collect();
    let mut polys: Vec<Poly> = sys.polys().iter().map(|p| p.extend_vars(total)).collect();
    polys.extend(contract_jacobian(sys, total, &weights));
    let last = (0..r).fold(Poly::constant(total, C64::new(-1.0, 0.0)), |acc, l| {
        &acc + &Poly::var(total, n + l).scale(b_vec[l])
    });
    polys.push(last);
    let g = PolySystem::new(total, polys)?;

    let jb = sys.jacobian(x)? * &b_mat;
    let lhs = vcat(&jb, &CMatrix::from_row_slice(1, r, b_vec.as_slice()));
    let mut rhs = CVector::zeros(lhs.nrows());
    rhs[lhs.nrows() - 1] = C64::new(1.0, 0.0);
    let lambda = least_squares(&lhs, &rhs)?;

    let mut y = CVector::zeros(total);
    y.rows_mut(0, n).copy_from_slice(x);
    y.rows_mut(n, r).copy_from(&lambda);
    Ok((
        DeflatedSystem {
            g,
            b_mat,
            b_vec,
            parent_vars: n,
            parent_polys: sys.len(),
            kappa,
        },
        y,
    ))
}

/// The deflated system with a prescribed kernel component:
/// `g(X, lambda1) = [f(X); Df(X) (V1 lambda1 + V2 lambda2)]`, with
/// `lambda1` the new variables and `lambda2` held fixed.
pub fn deflate_structured(
    sys: &PolySystem,
    v1: &CMatrix,
    v2: &CMatrix,
    lambda2: &CVector,
) -> Result<PolySystem> {
    let n = sys.num_vars();
    check_len("regular basis rows", n, v1.nrows())?;
    check_len("kernel basis rows", n, v2.nrows())?;
    check_len("fixed multipliers", v2.ncols(), lambda2.len())?;
    let r = v1.ncols();
    let total = n + r;
    let fixed = v2 * lambda2;
    let weights: Vec<Poly> = (0..n)
        .map(|j| {
            (0..r).fold(Poly::constant(total, fixed[j]), |acc, l| {
                &acc + &Poly::var(total, n + l).scale(v1[(j, l)])
            })
        })
        .collect();
    let mut polys: Vec<Poly> = sys.polys().iter().map(|p| p.extend_vars(total)).collect();
    polys.extend(contract_jacobian(sys, total, &weights));
    PolySystem::new(total, polys)
}

/// `sigma_min(J) > tau (1 + sigma_max(J))` with `J` tall.
pub fn full_column_rank(j: &CMatrix, tau: f64) -> bool {
    if j.nrows() < j.ncols() {
        return false;
    }
    let s = singular_values(j);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => lo > tau * (1.0 + hi),
        _ => true,
    }
}

/// Result of repeated deflation.
#[derive(Clone, Debug)]
pub struct Deflation {
    pub system: PolySystem,
    pub point: CVector,
    pub steps: usize,
}

/// Deflates until the Jacobian at the lifted point has full column rank.
pub fn deflate_to_regular(
    sys: &PolySystem,
    x: &[C64],
    tau: f64,
    max_steps: usize,
    seed: u64,
) -> Result<Deflation> {
    let mut g = sys.clone();
    let mut y = CVector::from_column_slice(x);
    for steps in 0..=max_steps {
        if full_column_rank(&g.jacobian(y.as_slice())?, tau) {
            return Ok(Deflation {
                system: g,
                point: y,
                steps,
            });
        }
        if steps == max_steps {
            break;
        }
        let (d, lifted) = deflate_once(&g, y.as_slice(), tau, seed.wrapping_add(steps as u64))?;
        g = d.g;
        y = lifted;
    }
    Err(Error::DeflationLimit(max_steps))
}

#[derive(Clone, Debug, Serialize)]
pub struct GnTrace {
    #[serde(skip)]
    pub iterates: Vec<CVector>,
    pub residuals: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub converged: bool,
    pub stationary: bool,
}

impl GnTrace {
    pub fn final_point(&self) -> &CVector {
        self.iterates.last().expect("trace has a start point")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("trace has a start point")
    }
}

/// `y <- y - lstsq(Dg(y), g(y))` until `||g|| <= stop`, a step shorter than
/// [`STALL_STEP`], or `max_iter` steps.
pub fn gauss_newton(g: &PolySystem, y0: &[C64], max_iter: usize, stop: f64) -> Result<GnTrace> {
    let mut y = CVector::from_column_slice(y0);
    let mut r = g.residual(y.as_slice())?;
    let mut trace = GnTrace {
        iterates: vec![y.clone()],
        residuals: vec![r],
        step_norms: Vec::new(),
        converged: r <= stop,
        stationary: false,
    };
    for _ in 0..max_iter {
        if trace.converged {
            break;
        }
        let step = least_squares(&g.jacobian(y.as_slice())?, &g.eval(y.as_slice())?)?;
        let s = step.norm();
        y -= step;
        r = g.residual(y.as_slice())?;
        trace.iterates.push(y.clone());
        trace.residuals.push(r);
        trace.step_norms.push(s);
        if r <= stop {
            trace.converged = true;
        } else if s < STALL_STEP {
            trace.stationary = true;
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sys(text: &str, vars: &[&str]) -> PolySystem {
        let v: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        parse_system(text, &v).unwrap()
    }

    #[test]
    fn regular_point_has_nothing_to_deflate() {
        let f = sys("x - 1\ny", &["x", "y"]);
        assert!(matches!(
            deflate_once(&f, &[c(1.0), c(0.0)], 1e-8, 0),
            Err(Error::NothingToDeflate)
        ));
        let d = deflate_to_regular(&f, &[c(1.0), c(0.0)], 1e-8, 3, 0).unwrap();
        assert_eq!(d.steps, 0);
    }

    #[test]
    fn deflated_shape_and_lifted_zero() {
        let f = sys("x^2\ny", &["x", "y"]);
        let (d, y) = deflate_once(&f, &[c(0.0), c(0.0)], 1e-8, 5).unwrap();
        // kappa = 1, two multipliers: 2n + 1 polynomials in n + 2 variables
        assert_eq!((d.g.len(), d.g.num_vars()), (5, 4));
        assert_eq!(d.multipliers(), 2);
        assert!(d.g.residual(y.as_slice()).unwrap() < 1e-12);
    }

    #[test]
    fn consistent_linear_system_solved_in_one_step() {
        let g = sys("x + y - 3\nx - y - 1\n2*x - 4", &["x", "y"]);
        let t = gauss_newton(&g, &[c(0.0), c(0.0)], 10, 1e-12).unwrap();
        assert!(t.converged);
        assert_eq!(t.step_norms.len(), 1);
        let p = t.final_point();
        assert!((p[0] - c(2.0)).norm() < 1e-14 && (p[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn deflation_limit_is_reported() {
        let f = sys("x^2\ny^2", &["x", "y"]);
        assert!(matches!(
            deflate_to_regular(&f, &[c(0.0), c(0.0)], 1e-8, 0, 0),
            Err(Error::DeflationLimit(0))
        ));
    }
}
