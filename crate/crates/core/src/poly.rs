//! Sparse multivariate polynomials with complex coefficients.
//!
//! Terms live in a [`BTreeMap`] keyed by [`Monomial`], whose ordering is
//! graded lexicographic. Every evaluation walks the terms in that order, so
//! floating-point results are reproducible across runs and platforms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

pub type C64 = Complex64;

/// Exponent multi-index of a monomial `X_1^a_1 ... X_n^a_n`.
///
/// Ordered by total degree first; within a degree, a larger exponent on an
/// earlier variable comes first (`x^2 < x*y < y^2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / x_i`, or `None` when the exponent of `x_i` is zero.
    pub fn lower(&self, i: usize) -> Option<Monomial> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(Monomial(e))
    }

    pub fn raise(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e[i] += 1;
        Monomial(e)
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `alpha! = alpha_1! ... alpha_n!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// All monomials in `num_vars` variables of degree at most `max_degree`,
    /// in ascending order.
    pub fn all_up_to(num_vars: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut cur = vec![0u32; num_vars];
            of_degree(&mut cur, 0, d, &mut out);
        }
        out
    }
}

// Emits exponent vectors of exact degree `rest` with the earliest variable
// taking the largest share first, which matches `Monomial`'s ordering.
fn of_degree(cur: &mut Vec<u32>, pos: usize, rest: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if rest == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    for a in (0..=rest).rev() {
        cur[pos] = a;
        of_degree(cur, pos + 1, rest - a, out);
    }
    cur[pos] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Precomputed powers `x_j^e` for every variable up to the largest exponent
/// that occurs in a system.
pub(crate) struct Powers {
    table: Vec<Vec<C64>>,
}

impl Powers {
    pub(crate) fn new(x: &[C64], max_exp: &[u32]) -> Self {
        let table = x
            .iter()
            .zip(max_exp)
            .map(|(&xi, &m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                let mut p = C64::new(1.0, 0.0);
                row.push(p);
                for _ in 0..m {
                    p *= xi;
                    row.push(p);
                }
                row
            })
            .collect();
        Powers { table }
    }

    /// Value of the monomial with exponents `e`, after lowering the
    /// exponents listed in `lowered` by one each.
    #[inline]
    fn value(&self, e: &[u32], lowered: &[usize]) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (j, &ej) in e.iter().enumerate() {
            if ej == 0 {
                continue;
            }
            let drop = lowered.iter().filter(|&&l| l == j).count() as u32;
            let k = ej - drop;
            if k > 0 {
                acc *= self.table[j][k as usize];
            }
        }
        acc
    }
}

/// A sparse polynomial in `num_vars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    num_vars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(num_vars: usize) -> Self {
        Poly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: C64) -> Self {
        let mut p = Poly::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c);
        p
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut p = Poly::zero(num_vars);
        p.add_term(Monomial::var(num_vars, i), C64::new(1.0, 0.0));
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, collecting
    /// repeated monomials and dropping zero coefficients.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut p = Poly::zero(num_vars);
        for (e, c) in terms {
            check_len("monomial exponents", num_vars, e.len())?;
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C64)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.num_vars];
        for mono in self.terms.keys() {
            for (a, &e) in m.iter_mut().zip(&mono.0) {
                *a = (*a).max(e);
            }
        }
        m
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::default() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == C64::default() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: C64) -> Poly {
        let mut p = Poly::zero(self.num_vars);
        for (m, &a) in &self.terms {
            p.add_term(m.clone(), a * c);
        }
        p
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.num_vars, C64::new(1.0, 0.0));
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.num_vars);
        for (m, &c) in &self.terms {
            if let Some(lowered) = m.lower(i) {
                p.add_term(lowered, c * f64::from(m.0[i]));
            }
        }
        p
    }

    /// Re-embeds the polynomial into `num_vars >= self.num_vars()` variables;
    /// the new variables are appended and do not occur.
    pub fn extend_vars(&self, num_vars: usize) -> Poly {
        assert!(num_vars >= self.num_vars);
        let mut p = Poly::zero(num_vars);
        for (m, &c) in &self.terms {
            let mut e = m.0.clone();
            e.resize(num_vars, 0);
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Evaluates at `x` by direct monomial accumulation in key order.
    pub fn eval(&self, x: &[C64]) -> Result<C64> {
        check_len("polynomial evaluation point", self.num_vars, x.len())?;
        let powers = Powers::new(x, &self.max_exponents());
        Ok(self.eval_with(&powers))
    }

    fn eval_with(&self, powers: &Powers) -> C64 {
        self.terms
            .iter()
            .map(|(m, &c)| c * powers.value(&m.0, &[]))
            .sum()
    }

    /// Substitutes `images[j]` for variable `j`. All images must share a
    /// variable count, which becomes the variable count of the result.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        check_len("substitution images", self.num_vars, images.len())?;
        let target = images.first().map_or(0, Poly::num_vars);
        for im in images {
            check_len("substitution image variables", target, im.num_vars)?;
        }
        // powers[j][e] = images[j]^e, grown on demand
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|im| vec![Poly::constant(target, C64::new(1.0, 0.0)), im.clone()])
            .collect();
        let mut out = Poly::zero(target);
        for (m, &c) in &self.terms {
            let mut term = Poly::constant(target, c);
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e as usize {
                    let next = &powers[j][powers[j].len() - 1] * &images[j];
                    powers[j].push(next);
                }
                term = &term * &powers[j][e as usize];
            }
            out = &out + &term;
        }
        Ok(out)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut p = self.clone();
        for (m, &c) in &rhs.terms {
            p.add_term(m.clone(), c);
        }
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut p = self.clone();
        for (m, &c) in &rhs.terms {
            p.add_term(m.clone(), -c);
        }
        p
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut acc: BTreeMap<Monomial, C64> = BTreeMap::new();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        acc.retain(|_, c| *c != C64::default());
        Poly {
            num_vars: self.num_vars,
            terms: acc,
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.num_vars).map(|i| format!("x{i}")).collect();
        f.write_str(&crate::parse::format_poly(self, &names))
    }
}

/// An ordered list of polynomials over a common set of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    num_vars: usize,
    polys: Vec<Poly>,
}

impl PolySystem {
    pub fn new(num_vars: usize, polys: Vec<Poly>) -> Result<Self> {
        for p in &polys {
            check_len("system member variables", num_vars, p.num_vars)?;
        }
        Ok(PolySystem { num_vars, polys })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.num_vars
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn degree(&self) -> u32 {
        self.polys.iter().map(Poly::degree).max().unwrap_or(0)
    }

    fn powers(&self, x: &[C64]) -> Result<Powers> {
        check_len("system evaluation point", self.num_vars, x.len())?;
        let mut m = vec![0; self.num_vars];
        for p in &self.polys {
            for (a, e) in m.iter_mut().zip(p.max_exponents()) {
                *a = (*a).max(e);
            }
        }
        Ok(Powers::new(x, &m))
    }

    /// `f(x)`.
    pub fn eval(&self, x: &[C64]) -> Result<DVector<C64>> {
        let pw = self.powers(x)?;
        Ok(DVector::from_iterator(
            self.polys.len(),
            self.polys.iter().map(|p| p.eval_with(&pw)),
        ))
    }

    /// `||f(x)||_2`
    pub fn residual(&self, x: &[C64]) -> Result<f64> {
        Ok(self.eval(x)?.norm())
    }

    /// `Df(x)`, entry `(i, j) = d f_i / d X_j`, from exact term-wise
    /// differentiation.
    pub fn jacobian(&self, x: &[C64]) -> Result<DMatrix<C64>> {
        let pw = self.powers(x)?;
        let mut jac = DMatrix::zeros(self.polys.len(), self.num_vars);
        for (i, p) in self.polys.iter().enumerate() {
            for (m, &c) in &p.terms {
                for (j, &ej) in m.0.iter().enumerate() {
                    if ej == 0 {
                        continue;
                    }
                    jac[(i, j)] += c * f64::from(ej) * pw.value(&m.0, &[j]);
                }
            }
        }
        Ok(jac)
    }

    /// `D^2 f(x) . v`, entry `(i, j) = sum_k d^2 f_i / dX_j dX_k (x) v_k`.
    ///
    /// Each term is differentiated in `X_j`, contracted with `v`, then
    /// differentiated again; the third-order tensor is never formed.
    pub fn dir_hessian(&self, x: &[C64], v: &[C64]) -> Result<DMatrix<C64>> {
        check_len("hessian direction", self.num_vars, v.len())?;
        let pw = self.powers(x)?;
        let mut h = DMatrix::zeros(self.polys.len(), self.num_vars);
        for (i, p) in self.polys.iter().enumerate() {
            for (m, &c) in &p.terms {
                if m.degree() < 2 {
                    continue;
                }
                for (j, &ej) in m.0.iter().enumerate() {
                    if ej == 0 {
                        continue;
                    }
                    let cj = c * f64::from(ej);
                    let mut acc = C64::default();
                    for (k, &ek) in m.0.iter().enumerate() {
                        let ek = if k == j { ek - 1 } else { ek };
                        if ek == 0 || v[k] == C64::default() {
                            continue;
                        }
                        acc += v[k] * f64::from(ek) * pw.value(&m.0, &[j, k]);
                    }
                    h[(i, j)] += cj * acc;
                }
            }
        }
        Ok(h)
    }

    /// The system `X -> f(A (X - b))`, expanded into canonical sparse form.
    pub fn compose_affine(&self, a: &DMatrix<C64>, b: &[C64]) -> Result<PolySystem> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = self.num_vars;
        check_len("affine map rows", n, a.nrows())?;
        check_len("affine shift", n, b.len())?;
        let ab = a * DVector::from_column_slice(b);
        let images: Vec<Poly> = (0..n)
            .map(|j| {
                let mut p = Poly::constant(n, -ab[j]);
                for l in 0..n {
                    p.add_term(Monomial::var(n, l), a[(j, l)]);
                }
                p
            })
            .collect();
        let polys = self
            .polys
            .iter()
            .map(|p| p.substitute(&images))
            .collect::<Result<Vec<_>>>()?;
        PolySystem::new(n, polys)
    }

    /// Symbolic Jacobian, `derivatives()[i][j] = d f_i / d X_j`.
    pub fn derivatives(&self) -> Vec<Vec<Poly>> {
        self.polys
            .iter()
            .map(|p| (0..self.num_vars).map(|j| p.derivative(j)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn running_example() -> PolySystem {
        let v = ["x", "y", "z"].map(String::from);
        crate::parse::parse_system(
            "x^2 - x + y + z - 2\ny^2 + x - y + z - 2\nz^2 + x + y - z - 2",
            &v,
        )
        .unwrap()
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let all = Monomial::all_up_to(2, 2);
        let e: Vec<Vec<u32>> = all.iter().map(|m| m.0.clone()).collect();
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        assert_eq!(Monomial::all_up_to(3, 5).len(), 56);
    }

    #[test]
    fn zero_coefficients_are_never_stored() {
        let p = Poly::from_terms(2, [(vec![1, 0], c(1.0)), (vec![1, 0], c(-1.0))]).unwrap();
        assert!(p.is_zero());
        let q = Poly::from_terms(1, [(vec![2], c(0.0))]).unwrap();
        assert!(q.is_zero());
        assert!(Poly::from_terms(2, [(vec![1], c(1.0))]).is_err());
    }

    #[test]
    fn running_example_vanishes_at_ones() {
        let f = running_example();
        let r = f.eval(&[c(1.0); 3]).unwrap();
        assert!(r.iter().all(|z| z.norm() == 0.0));
        assert_eq!(f.polys()[0].len(), 5);
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = Poly::zero(3);
        assert_eq!(p.eval(&[c(2.0), c(-1.0), c(0.5)]).unwrap(), C64::default());
    }

    #[test]
    fn jacobian_of_running_example_at_zero_is_all_ones() {
        let f = running_example();
        let j = f.jacobian(&[c(1.0); 3]).unwrap();
        assert!(j.iter().all(|z| (*z - c(1.0)).norm() == 0.0));
    }

    #[test]
    fn jacobian_of_linear_system_is_identity() {
        let s = PolySystem::new(2, vec![Poly::var(2, 0), Poly::var(2, 1)]).unwrap();
        let j = s.jacobian(&[C64::new(0.3, 2.0), c(-7.0)]).unwrap();
        assert_eq!(j, DMatrix::identity(2, 2));
    }

    #[test]
    fn dir_hessian_hand_contraction() {
        // f = [x^2, x*y]: Hessians [[2,0],[0,0]] and [[0,1],[1,0]]
        let f = PolySystem::new(
            2,
            vec![
                Poly::from_terms(2, [(vec![2, 0], c(1.0))]).unwrap(),
                Poly::from_terms(2, [(vec![1, 1], c(1.0))]).unwrap(),
            ],
        )
        .unwrap();
        let h = f.dir_hessian(&[c(0.0), c(0.0)], &[c(1.0), c(0.0)]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(1.0)]);
        assert_eq!(h, expected);
        // cross-check with central differences of the jacobian along v
        let step = 1e-6;
        let jp = f.jacobian(&[c(step), c(0.0)]).unwrap();
        let jm = f.jacobian(&[c(-step), c(0.0)]).unwrap();
        let fd = (jp - jm) / c(2.0 * step);
        assert!((fd - expected).norm() < 1e-8);
    }

    #[test]
    fn dir_hessian_of_linear_system_is_zero() {
        let s = PolySystem::new(
            2,
            vec![
                &Poly::var(2, 0) + &Poly::var(2, 1),
                Poly::var(2, 1).scale(c(3.0)),
            ],
        )
        .unwrap();
        let h = s.dir_hessian(&[c(1.0), c(2.0)], &[c(0.6), c(0.8)]).unwrap();
        assert_eq!(h, DMatrix::zeros(2, 2));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = running_example();
        assert!(matches!(
            f.eval(&[c(1.0); 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(f.jacobian(&[c(1.0); 4]).is_err());
        assert!(f.dir_hessian(&[c(1.0); 3], &[c(1.0); 2]).is_err());
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let f = running_example();
        let g = f
            .compose_affine(&DMatrix::identity(3, 3), &[C64::default(); 3])
            .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn compose_rejects_non_square() {
        let f = running_example();
        let a = DMatrix::<C64>::zeros(3, 2);
        assert!(matches!(
            f.compose_affine(&a, &[C64::default(); 3]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let p = &Poly::var(2, 0) + &Poly::constant(2, C64::new(0.5, -1.0));
        let p3 = &(&p * &p) * &p;
        assert_eq!(p.pow(3), p3);
        assert_eq!(p.pow(0), Poly::constant(2, c(1.0)));
    }
}
