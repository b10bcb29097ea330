//! Differential functionals `sum_a c_a d^a` at a point, with the
//! factorial-normalized partials `d^a g = (1/a!) * d^{|a|} g / dX^a`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::poly::{Monomial, Poly, C64};

/// A finite combination of normalized differentials, keyed by multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    num_vars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Functional {
    pub fn zero(num_vars: usize) -> Self {
        Functional {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    /// The single differential `d^alpha`.
    pub fn monomial(alpha: Vec<u32>) -> Self {
        let mut f = Functional::zero(alpha.len());
        f.terms.insert(Monomial::new(alpha), C64::new(1.0, 0.0));
        f
    }

    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut f = Functional::zero(num_vars);
        for (a, c) in terms {
            check_len("functional multi-index", num_vars, a.len())?;
            f.add(Monomial::new(a), c);
        }
        Ok(f)
    }

    fn add(&mut self, m: Monomial, c: C64) {
        let e = self.terms.entry(m.clone()).or_default();
        *e += c;
        if *e == C64::default() {
            self.terms.remove(&m);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &Monomial) -> C64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    /// Largest `|alpha|` with a nonzero coefficient.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Functional {
        Functional {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }
}

/// Serializable view: `[[alpha...], [re, im]]` pairs.
#[derive(Serialize)]
struct FunctionalTerm<'a> {
    alpha: &'a [u32],
    coeff: C64,
}

impl Serialize for Functional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.terms.iter().map(|(m, &c)| FunctionalTerm {
            alpha: m.exponents(),
            coeff: c,
        }))
    }
}

/// Shift operator `Phi_i(d^alpha) = d^{alpha - e_i}`; terms with
/// `alpha_i = 0` vanish. `i` is zero-based.
pub fn phi(f: &Functional, i: usize) -> Result<Functional> {
    if i >= f.num_vars {
        return Err(Error::IndexOutOfRange {
            index: i,
            num_vars: f.num_vars,
        });
    }
    let mut out = Functional::zero(f.num_vars);
    for (m, &c) in &f.terms {
        if let Some(lowered) = m.lower(i) {
            out.add(lowered, c);
        }
    }
    Ok(out)
}

/// `Lambda(p)` with every differential evaluated at `xi`.
pub fn apply_functional(f: &Functional, p: &Poly, xi: &[C64]) -> Result<C64> {
    check_len(
        "functional and polynomial variables",
        f.num_vars,
        p.num_vars(),
    )?;
    check_len("functional base point", f.num_vars, xi.len())?;
    let mut acc = C64::default();
    for (alpha, &c) in &f.terms {
        acc += c * taylor_coefficient(p, xi, alpha);
    }
    Ok(acc)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for j in 0..k {
        r = r * f64::from(n - j) / f64::from(j + 1);
    }
    r
}

/// `d^alpha p (xi)`: the coefficient of `h^alpha` in `p(xi + h)`.
pub fn taylor_coefficient(p: &Poly, xi: &[C64], alpha: &Monomial) -> C64 {
    let mut acc = C64::default();
    for (beta, &c) in p.terms() {
        if !alpha.divides(beta) {
            continue;
        }
        let mut t = c;
        for ((&b, &a), &x) in beta.exponents().iter().zip(alpha.exponents()).zip(xi) {
            if b > a {
                t *= binomial(b, a) * x.powu(b - a);
            }
        }
        acc += t;
    }
    acc
}

/// `d^alpha p (xi)` for every `alpha` in `basis`, in the same order.
pub fn taylor_coefficients(p: &Poly, xi: &[C64], basis: &[Monomial]) -> Vec<C64> {
    let index: std::collections::HashMap<&Monomial, usize> =
        basis.iter().enumerate().map(|(k, m)| (m, k)).collect();
    let max_order = basis.iter().map(Monomial::degree).max().unwrap_or(0);
    let mut out = vec![C64::default(); basis.len()];
    for (beta, &c) in p.terms() {
        // enumerate sub-multi-indices alpha <= beta with |alpha| <= max_order
        let e = beta.exponents();
        let mut alpha = vec![0u32; e.len()];
        loop {
            let a = Monomial::new(alpha.clone());
            if a.degree() <= max_order {
                if let Some(&k) = index.get(&a) {
                    let mut t = c;
                    for ((&b, &aj), &x) in e.iter().zip(&alpha).zip(xi) {
                        if b > aj {
                            t *= binomial(b, aj) * x.powu(b - aj);
                        }
                    }
                    out[k] += t;
                }
            }
            // odometer increment over the box [0, beta]
            let mut j = 0;
            while j < alpha.len() {
                if alpha[j] < e[j] {
                    alpha[j] += 1;
                    break;
                }
                alpha[j] = 0;
                j += 1;
            }
            if j == alpha.len() {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn normalization_gives_unit_coefficients() {
        let v = names(&["x", "y"]);
        let x2 = parse_poly("x^2", &v).unwrap();
        let xy = parse_poly("x*y", &v).unwrap();
        let o = [C64::default(); 2];
        let d20 = Functional::monomial(vec![2, 0]);
        let d11 = Functional::monomial(vec![1, 1]);
        assert_eq!(apply_functional(&d20, &x2, &o).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(apply_functional(&d11, &xy, &o).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(apply_functional(&d11, &x2, &o).unwrap(), C64::default());
    }

    #[test]
    fn order_zero_reproduces_evaluation() {
        let v = names(&["x", "y"]);
        let p = parse_poly("x^3*y - 2*x + (1+1i)", &v).unwrap();
        let xi = [C64::new(0.7, -0.2), C64::new(1.3, 0.4)];
        let one = Functional::monomial(vec![0, 0]);
        let a = apply_functional(&one, &p, &xi).unwrap();
        assert!((a - p.eval(&xi).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn phi_shifts_down() {
        let f = Functional::monomial(vec![2, 0]);
        assert_eq!(phi(&f, 0).unwrap(), Functional::monomial(vec![1, 0]));
        let g = Functional::monomial(vec![1, 0]);
        assert!(phi(&g, 1).unwrap().is_zero());
        assert!(matches!(phi(&g, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn dimension_checks() {
        let v = names(&["x", "y"]);
        let p = parse_poly("x", &v).unwrap();
        let f = Functional::monomial(vec![1, 0, 0]);
        assert!(apply_functional(&f, &p, &[C64::default(); 2]).is_err());
    }

    #[test]
    fn batch_coefficients_match_single() {
        let v = names(&["x", "y", "z"]);
        let p = parse_poly("x^3 + y*z - y^3*z/6 + 2*x*y^2", &v).unwrap();
        let xi = [C64::new(0.5, 0.1), C64::new(-1.0, 0.0), C64::new(0.2, 0.3)];
        let basis = Monomial::all_up_to(3, 3);
        let all = taylor_coefficients(&p, &xi, &basis);
        for (m, c) in basis.iter().zip(&all) {
            assert!((taylor_coefficient(&p, &xi, m) - c).norm() < 1e-14);
        }
    }
}
