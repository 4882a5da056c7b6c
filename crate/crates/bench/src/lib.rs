//! Seeded inputs shared by the benchmarks.

use cartier_lab_core::drw::{random_element, DRWComplex, DRWElement};
use cartier_lab_core::linalg::IntMatrix;
use cartier_lab_core::witt::{PrimeField, WittVector};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn witt_pair(p: u64, n: usize, seed: u64) -> (WittVector<PrimeField>, WittVector<PrimeField>) {
    let mut r = rng(seed);
    let mut v = || WittVector::new(p, PrimeField { p }, (0..n).map(|_| r.gen_range(0..p)).collect()).expect("valid length");
    (v(), v())
}

pub fn int_matrix(rows: usize, cols: usize, bound: i64, seed: u64) -> IntMatrix {
    let mut r = rng(seed);
    IntMatrix::from_rows(cols, (0..rows).map(|_| (0..cols).map(|_| BigInt::from(r.gen_range(-bound..=bound))).collect()).collect())
}

pub fn drw_pair(p: u64, m: u32, bound: u64, seed: u64) -> (DRWElement, DRWElement) {
    let c = DRWComplex::new(p, m, bound).expect("valid parameters");
    let mut r = rng(seed);
    (random_element(&mut r, &c, 0, 4), random_element(&mut r, &c, 1, 4))
}
