//! Seeded complex Gaussian sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, CVector};
use crate::poly::C64;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circular complex normal with `E|z|^2 = 1`.
pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    // filled row by row so the draw order does not depend on storage layout
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &data)
}

/// Uniform on the unit sphere of `C^n`.
pub fn unit_vector(n: usize, rng: &mut Rng) -> CVector {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / C64::new(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let a = gaussian_matrix(3, 2, &mut rng(7));
        let b = gaussian_matrix(3, 2, &mut rng(7));
        assert_eq!(a, b);
        assert_ne!(a, gaussian_matrix(3, 2, &mut rng(8)));
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut r = rng(1);
        for n in 1..6 {
            assert!((unit_vector(n, &mut r).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn second_moment_is_one() {
        let mut r = rng(3);
        let n = 20000;
        let m: f64 = (0..n)
            .map(|_| complex_gaussian(&mut r).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((m - 1.0).abs() < 0.05);
    }
}
