//! Random affine variants `f(A(X - b))` of `[x1^2, .., xk^2, x(k+1), .., xn]`.

use snewton_core::linalg::{cond, CMatrix, CVector};
use snewton_core::random::{self, gaussian_matrix, gaussian_vector};
use snewton_core::{Poly, PolySystem, C64};

/// Condition-number bound for the mixing matrix `A`.
pub const MAX_COND: f64 = 1e3;

/// `[x1^2, .., xk^2, x(k+1), .., xn]`: zero at the origin with breadth `k`
/// and multiplicity `2^k`.
pub fn template(n: usize, k: usize) -> PolySystem {
    assert!(1 <= k && k <= n, "need 1 <= k <= n, got n={n} k={k}");
    let polys = (0..n)
        .map(|i| {
            let x = Poly::var(n, i);
            if i < k {
                x.pow(2)
            } else {
                x
            }
        })
        .collect();
    PolySystem::new(n, polys).expect("square")
}

#[derive(Clone, Debug)]
pub struct Variant {
    pub system: PolySystem,
    pub a: CMatrix,
    pub zero: CVector,
}

/// Draws complex Gaussian `A` (redrawn until `cond(A) <= MAX_COND`) and `b`.
pub fn random_variant(n: usize, k: usize, seed: u64) -> Variant {
    let mut rng = random::rng(seed);
    let a = loop {
        let a = gaussian_matrix(n, n, &mut rng);
        if cond(&a) <= MAX_COND {
            break a;
        }
    };
    let zero = gaussian_vector(n, &mut rng);
    with_transform(n, k, a, zero)
}

pub fn with_transform(n: usize, k: usize, a: CMatrix, zero: CVector) -> Variant {
    let system = template(n, k)
        .compose_affine(&a, zero.as_slice())
        .expect("A is n x n and b has length n");
    Variant { system, a, zero }
}

/// `b + eps * u` with `u` a seeded random unit vector.
pub fn perturbed_start(zero: &CVector, eps: f64, seed: u64) -> CVector {
    let u = random::unit_vector(zero.len(), &mut random::rng(seed));
    zero + u * C64::new(eps, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transform_gives_template() {
        let v = with_transform(4, 2, CMatrix::identity(4, 4), CVector::zeros(4));
        assert_eq!(v.system, template(4, 2));
    }

    #[test]
    fn variant_vanishes_at_b() {
        let v = random_variant(6, 3, 11);
        assert!(v.system.residual(v.zero.as_slice()).unwrap() <= 1e-12);
        assert!(cond(&v.a) <= MAX_COND);
    }
}
