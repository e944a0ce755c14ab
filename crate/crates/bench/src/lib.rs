//! Benchmark fixtures.

use std::sync::Arc;

use descent_core::complex::build_presentation_complex;
use descent_core::linalg::{FpMatrix, FpSubspace, PrimeModulus};
use descent_core::{GroupPresentation, TwoComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn modulus(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).expect("prime")
}

/// Uniform random `rows x cols` matrix over F_p.
pub fn random_matrix(p: u64, rows: usize, cols: usize, seed: u64) -> FpMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Vec<u32>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..p as u32)).collect())
        .collect();
    FpMatrix::from_rows(modulus(p), cols, &data).expect("rectangular")
}

pub fn random_subspace(p: u64, dim: usize, ambient: usize, seed: u64) -> FpSubspace {
    let m = random_matrix(p, dim, ambient, seed);
    FpSubspace::from_generators(modulus(p), ambient, m.rows()).expect("rectangular")
}

pub fn genus_two() -> GroupPresentation {
    GroupPresentation::parse("a b c d", &["abABcdCD"]).expect("valid")
}

/// Presentation complex of the free group on `n <= 26` generators.
pub fn free_complex(n: usize) -> Arc<TwoComplex> {
    let gens: Vec<String> = ('a'..='z').take(n).map(String::from).collect();
    let pres = GroupPresentation::parse(&gens.join(" "), &[]).expect("valid");
    Arc::new(build_presentation_complex(&pres))
}
