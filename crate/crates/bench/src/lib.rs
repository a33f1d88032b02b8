//! Seeded inputs shared by the benchmarks.

use entsearch::formula::{planted, random_cnf};
use entsearch::{DensityOp, Formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

/// 3-CNF near the satisfiability threshold.
pub fn hard_cnf(n: usize) -> Formula {
    let clauses = ((n as f64) * 4.26).ceil() as usize;
    random_cnf(n, clauses, 3, &mut rng(n as u64))
}

/// Single-solution instance with the solution at a seeded position.
pub fn planted_instance(n: usize) -> (Formula, u64) {
    let s = rng(n as u64).random_range(0..1u64 << n);
    (planted(n, s), s)
}

/// Bell state mixed with white noise at weight `p`.
pub fn noisy_bell(p: f64) -> DensityOp {
    DensityOp::bell().depolarize(p).expect("p in [0, 1]")
}
