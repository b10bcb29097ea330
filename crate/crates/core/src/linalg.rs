//! Dense complex linear algebra: nalgebra storage, faer SVD.
//!
//! Singular values are always returned in descending order, and right
//! singular bases are padded to a full `n x n` unitary even for wide inputs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative threshold below which `solve` treats a matrix as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Sorted SVD `M = U diag(sigma) V*` with `U: m x p`, `V: n x n`,
/// `p = min(m, n)`; `sigma` has length `p`.
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn nan_svd(rows: usize, cols: usize) -> Svd {
    let p = rows.min(cols);
    Svd {
        u: CMatrix::from_element(rows, p, C64::new(f64::NAN, f64::NAN)),
        sigma: vec![f64::NAN; p],
        v: CMatrix::from_element(cols, cols, C64::new(f64::NAN, f64::NAN)),
    }
}

/// Full SVD via faer; non-finite input yields an all-NaN decomposition.
pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: CMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: CMatrix::identity(cols, cols),
        };
    }
    let Ok(dec) = to_faer(m).svd() else {
        return nan_svd(rows, cols);
    };
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let p = rows.min(cols);
    let s: Vec<f64> = (0..p).map(|k| fs[k].re).collect();
    // faer already sorts, but the contract is ours to keep
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    order.extend(p..cols);
    let sigma = order.iter().take(p).map(|&k| s[k]).collect();
    let u = CMatrix::from_fn(rows, p, |r, c| fu[(r, order[c])]);
    let v = CMatrix::from_fn(cols, cols, |r, c| fv[(r, order[c])]);
    Svd { u, sigma, v }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = match to_faer(m).singular_values() {
        Ok(s) => s,
        Err(_) => vec![f64::NAN; m.nrows().min(m.ncols())],
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Tolerance-split SVD of a square matrix: `sigma_i > tau` for the first
/// `n - kappa` values, `<= tau` for the remaining `kappa`.
#[derive(Clone, Debug)]
pub struct SvdSplit {
    pub u1: CMatrix,
    pub u2: CMatrix,
    pub v1: CMatrix,
    pub v2: CMatrix,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub kappa: usize,
    pub tau: f64,
}

impl SvdSplit {
    pub fn n(&self) -> usize {
        self.u1.nrows()
    }

    pub fn u(&self) -> CMatrix {
        hcat(&self.u1, &self.u2)
    }

    pub fn v(&self) -> CMatrix {
        hcat(&self.v1, &self.v2)
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.sigma1.iter().chain(&self.sigma2).copied().collect()
    }
}

pub fn hcat(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

pub fn vcat(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols());
    let mut m = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    m
}

fn check_tolerance(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tau))
    }
}

pub fn split_svd(m: &CMatrix, tau: f64) -> Result<SvdSplit> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_tolerance(tau)?;
    let n = m.nrows();
    let Svd { u, sigma, v } = svd(m);
    let r = sigma.iter().take_while(|&&s| s > tau).count();
    Ok(SvdSplit {
        u1: u.columns(0, r).into_owned(),
        u2: u.columns(r, n - r).into_owned(),
        v1: v.columns(0, r).into_owned(),
        v2: v.columns(r, n - r).into_owned(),
        sigma1: sigma[..r].to_vec(),
        sigma2: sigma[r..].to_vec(),
        kappa: n - r,
        tau,
    })
}

/// Solves the square system `M y = rhs`, refusing matrices whose smallest
/// singular value is below `SINGULAR_RTOL * sigma_max`.
pub fn solve(m: &CMatrix, rhs: &CVector) -> Result<CVector> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    crate::error::check_len("right-hand side", m.nrows(), rhs.len())?;
    if m.is_empty() {
        return Ok(CVector::zeros(0));
    }
    let Svd { u, sigma, v } = svd(m);
    let (smax, smin) = (sigma[0], sigma[sigma.len() - 1]);
    if !(smin >= SINGULAR_RTOL * smax) || smax == 0.0 {
        return Err(Error::Singular {
            sigma_min: smin,
            sigma_max: smax,
        });
    }
    let mut w = u.adjoint() * rhs;
    for (wi, s) in w.iter_mut().zip(&sigma) {
        *wi /= *s;
    }
    Ok(v * w)
}

/// Minimum-norm least-squares solution of `M y ~ rhs`. Singular values
/// below `max(m, n) * eps * sigma_max` are treated as zero.
pub fn least_squares(m: &CMatrix, rhs: &CVector) -> Result<CVector> {
    crate::error::check_len("right-hand side", m.nrows(), rhs.len())?;
    let cols = m.ncols();
    if m.is_empty() {
        return Ok(CVector::zeros(cols));
    }
    let Svd { u, sigma, v } = svd(m);
    let cutoff = m.nrows().max(cols) as f64 * f64::EPSILON * sigma[0];
    let mut y = CVector::zeros(cols);
    for (k, &s) in sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            break;
        }
        let coef = u.column(k).dotc(rhs) / s;
        y.axpy(coef, &v.column(k), C64::new(1.0, 0.0));
    }
    Ok(y)
}

/// Orthonormal basis of the right singular subspace for `sigma <= tau`,
/// including the directions beyond the row count of a wide matrix.
pub fn kernel_basis(m: &CMatrix, tau: f64) -> Result<CMatrix> {
    check_tolerance(tau)?;
    let cols = m.ncols();
    let Svd { sigma, v, .. } = svd(m);
    let r = sigma.iter().take_while(|&&s| s > tau).count();
    Ok(v.columns(r, cols - r).into_owned())
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    s.last().copied().unwrap_or(0.0)
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `sigma_max / sigma_min`; infinite for singular matrices.
pub fn cond(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 && m.nrows() >= m.ncols() => a / b,
        _ => f64::INFINITY,
    }
}

/// `||Q* Q - I||_F`, zero for exactly orthonormal columns.
pub fn orthonormality_defect(q: &CMatrix) -> f64 {
    (q.adjoint() * q - CMatrix::identity(q.ncols(), q.ncols())).norm()
}
