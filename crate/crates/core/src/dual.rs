//! Local dual space of a polynomial system at a point.
//!
//! `D^(k)` is the space of order-`<= k` differential functionals at `xi`
//! that annihilate the ideal of `f`. It is built order by order:
//! `C^(k)` collects the order-`<= k` functionals whose shifts `Phi_i`
//! all land in `D^(k-1)`, and `D^(k)` is the subspace of `C^(k)` that
//! vanishes on every `f_i`.
//!
//! Functionals are coefficient vectors over the graded monomial basis
//! `Monomial::all_up_to(n, k)`; every subspace is stored as a matrix with
//! orthonormal columns. Ranks use `rank_tol * (1 + sigma_max)`.

use serde::Serialize;

use crate::error::Result;
use crate::functional::{taylor_coefficients, Functional};
use crate::linalg::{kernel_basis, singular_values, split_svd, CMatrix, CVector};
use crate::poly::{Monomial, PolySystem, C64};
use crate::random;
use crate::twostep::operator_b;

/// Default relative rank tolerance for dual-space kernels.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// A basis of `D^(k)`.
#[derive(Clone, Debug)]
pub struct DualBasis {
    pub order: u32,
    /// Columns are coefficient vectors over `monomials`.
    pub coeffs: CMatrix,
    pub monomials: Vec<Monomial>,
    /// `dim C^(k)`.
    pub closed_dim: usize,
    pub rank_tol: f64,
    /// Some singular value fell within a factor 10 of the threshold.
    pub rank_ambiguous: bool,
}

impl DualBasis {
    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Basis functionals with coefficients below `1e-12` dropped.
    pub fn functionals(&self) -> Vec<Functional> {
        let n = self.monomials.first().map_or(0, Monomial::num_vars);
        (0..self.dim())
            .map(|j| {
                let col = self.coeffs.column(j);
                // normalize phase so the largest entry is real positive
                let pivot = col.iter().copied().fold(C64::default(), |a, b| {
                    if b.norm() > a.norm() {
                        b
                    } else {
                        a
                    }
                });
                let phase = if pivot.norm() > 0.0 {
                    pivot.conj() / pivot.norm()
                } else {
                    C64::new(1.0, 0.0)
                };
                Functional::from_terms(
                    n,
                    self.monomials
                        .iter()
                        .zip(col.iter())
                        .map(|(m, &c)| (m.exponents().to_vec(), c * phase)),
                )
                .expect("basis monomials share the variable count")
                .pruned(1e-12)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualSpaceReport {
    pub breadth: usize,
    pub depth: usize,
    pub multiplicity: usize,
    /// `dim D^(k)` for `k = 0, 1, ...`.
    pub dims: Vec<usize>,
    /// `dim C^(k)`; entry 0 is 1.
    pub closed_dims: Vec<usize>,
    pub stabilized: bool,
    pub rank_ambiguous: bool,
    #[serde(skip)]
    pub bases: Vec<DualBasis>,
}

fn threshold(m: &CMatrix, rank_tol: f64) -> (f64, bool) {
    let s = singular_values(m);
    let t = rank_tol * (1.0 + s.first().copied().unwrap_or(0.0));
    let ambiguous = s.iter().any(|&x| x >= t / 10.0 && x <= t * 10.0);
    (t, ambiguous)
}

fn kernel(m: &CMatrix, cols: usize, rank_tol: f64) -> Result<(CMatrix, bool)> {
    if m.nrows() == 0 {
        return Ok((CMatrix::identity(cols, cols), false));
    }
    let (t, ambiguous) = threshold(m, rank_tol);
    Ok((kernel_basis(m, t)?, ambiguous))
}

/// Matrix of `[d^alpha f_i(xi)]`, one row per polynomial.
fn taylor_matrix(sys: &PolySystem, xi: &[C64], monomials: &[Monomial]) -> CMatrix {
    let mut t = CMatrix::zeros(sys.len(), monomials.len());
    for (i, p) in sys.polys().iter().enumerate() {
        for (j, c) in taylor_coefficients(p, xi, monomials)
            .into_iter()
            .enumerate()
        {
            t[(i, j)] = c;
        }
    }
    t
}

/// `D^(0)`: the constant functional, if it annihilates `f`.
pub fn order_zero(sys: &PolySystem, xi: &[C64], rank_tol: f64) -> Result<DualBasis> {
    crate::error::check_len("dual space base point", sys.num_vars(), xi.len())?;
    let monomials = Monomial::all_up_to(sys.num_vars(), 0);
    let e = taylor_matrix(sys, xi, &monomials);
    let (d, ambiguous) = kernel(&e, 1, rank_tol)?;
    Ok(DualBasis {
        order: 0,
        coeffs: d,
        monomials,
        closed_dim: 1,
        rank_tol,
        rank_ambiguous: ambiguous,
    })
}

/// Builds `D^(k)` from a basis of `D^(k-1)`.
pub fn next_order(
    sys: &PolySystem,
    xi: &[C64],
    prev: &DualBasis,
    rank_tol: f64,
) -> Result<DualBasis> {
    crate::error::check_len("dual space base point", sys.num_vars(), xi.len())?;
    let n = sys.num_vars();
    let k = prev.order + 1;
    let monomials = Monomial::all_up_to(n, k);
    let big = monomials.len();
    let small = prev.monomials.len();
    let index: std::collections::HashMap<&Monomial, usize> =
        monomials.iter().enumerate().map(|(j, m)| (m, j)).collect();

    // Phi_i maps coefficient c over order <= k to (S_i c)[beta] = c[beta + e_i];
    // the constraint is (I - P P*) S_i c = 0.
    let p = &prev.coeffs;
    let proj = CMatrix::identity(small, small) - p * p.adjoint();
    let mut constraints = CMatrix::zeros(n * small, big);
    for i in 0..n {
        let mut shift = CMatrix::zeros(small, big);
        for (r, beta) in prev.monomials.iter().enumerate() {
            shift[(r, index[&beta.raise(i)])] = C64::new(1.0, 0.0);
        }
        constraints
            .rows_mut(i * small, small)
            .copy_from(&(&proj * shift));
    }
    let (closed, amb_c) = kernel(&constraints, big, rank_tol)?;

    let t = taylor_matrix(sys, xi, &monomials);
    let e = t * &closed;
    let (y, amb_e) = kernel(&e, closed.ncols(), rank_tol)?;
    Ok(DualBasis {
        order: k,
        coeffs: &closed * y,
        monomials,
        closed_dim: closed.ncols(),
        rank_tol,
        rank_ambiguous: prev.rank_ambiguous || amb_c || amb_e,
    })
}

/// Computes `D^(0), D^(1), ...` until two consecutive dimensions agree or
/// `max_order` is reached. Breadth is `dim D^(1) - 1`, depth the first
/// order after which the dimension stays put, multiplicity the final
/// dimension.
pub fn multiplicity_structure(
    sys: &PolySystem,
    xi: &[C64],
    rank_tol: f64,
    max_order: u32,
) -> Result<DualSpaceReport> {
    let mut bases = vec![order_zero(sys, xi, rank_tol)?];
    let mut stabilized = false;
    while bases.last().expect("nonempty").order < max_order.max(1) {
        let next = next_order(sys, xi, bases.last().expect("nonempty"), rank_tol)?;
        let same = next.dim() == bases.last().expect("nonempty").dim();
        bases.push(next);
        if same {
            stabilized = true;
            break;
        }
    }
    let dims: Vec<usize> = bases.iter().map(DualBasis::dim).collect();
    let depth = if stabilized {
        dims.len() - 2
    } else {
        dims.len() - 1
    };
    Ok(DualSpaceReport {
        breadth: dims.get(1).copied().unwrap_or(0).saturating_sub(dims[0]),
        depth,
        multiplicity: dims[depth],
        closed_dims: bases.iter().map(|b| b.closed_dim).collect(),
        rank_ambiguous: bases.iter().any(|b| b.rank_ambiguous),
        dims,
        stabilized,
        bases,
    })
}

/// `dim C^(2) - dim D^(2)`, the rank of the order-two evaluation matrix.
pub fn order_two_gap(sys: &PolySystem, xi: &[C64], rank_tol: f64) -> Result<(usize, bool)> {
    let d0 = order_zero(sys, xi, rank_tol)?;
    let d1 = next_order(sys, xi, &d0, rank_tol)?;
    let d2 = next_order(sys, xi, &d1, rank_tol)?;
    Ok((d2.closed_dim - d2.dim(), d2.rank_ambiguous))
}

/// Necessary condition for a deflation-one zero:
/// `dim C^(2) - dim D^(2) == n`.
pub fn deflation_one_necessary(sys: &PolySystem, xi: &[C64], rank_tol: f64) -> Result<bool> {
    Ok(order_two_gap(sys, xi, rank_tol)?.0 == sys.num_vars())
}

#[derive(Clone, Debug, Serialize)]
pub struct DeflationVerdict {
    pub kappa: usize,
    pub regular: bool,
    pub deflation_one: bool,
    /// `sigma_min(B)` for each sampled direction.
    pub sigma_min: Vec<f64>,
    /// The threshold each sample was compared against.
    pub thresholds: Vec<f64>,
}

/// Randomized sufficient test: samples unit directions `v = V2 lambda`
/// and reports whether `B = U2* (D^2 f(x) v) V2` has
/// `sigma_min(B) > tau * ||D^2 f(x) v||` for at least one of them.
pub fn deflation_one_test(
    sys: &PolySystem,
    x: &[C64],
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<DeflationVerdict> {
    let split = split_svd(&sys.jacobian(x)?, tau)?;
    let kappa = split.kappa;
    let mut verdict = DeflationVerdict {
        kappa,
        regular: kappa == 0,
        deflation_one: false,
        sigma_min: Vec::new(),
        thresholds: Vec::new(),
    };
    if kappa == 0 {
        return Ok(verdict);
    }
    let mut rng = random::rng(seed);
    for _ in 0..trials.max(1) {
        let v: CVector = &split.v2 * random::unit_vector(kappa, &mut rng);
        let b = operator_b(sys, x, &v, &split.u2, &split.v2)?;
        let h = sys.dir_hessian(x, v.as_slice())?;
        let s = singular_values(&b).last().copied().unwrap_or(0.0);
        let t = tau * singular_values(&h).first().copied().unwrap_or(0.0);
        verdict.sigma_min.push(s);
        verdict.thresholds.push(t);
        if s > t {
            verdict.deflation_one = true;
        }
    }
    Ok(verdict)
}

/// `true` iff [`deflation_one_test`] accepts; regular points give `false`.
pub fn is_deflation_one(
    sys: &PolySystem,
    x: &[C64],
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    Ok(deflation_one_test(sys, x, tau, trials, seed)?.deflation_one)
}
