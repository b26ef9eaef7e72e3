#![allow(dead_code)]

use qtrack::mat::{c, CMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = random_matrix(n, n, rng);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = random_matrix(n, n, rng);
    &a * a.adjoint()
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    qtrack::mat::max_abs(&(a - b))
}
