//! Seeded random rationals for searches and property suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::AlgVector;
use crate::ring::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| <= num` and `1 <= q <= den`.
pub fn rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    let p = rng.gen_range(-num..=num);
    let q = rng.gen_range(1..=den.max(1));
    Rational::new(p.into(), q.into())
}

pub fn rationals<R: Rng>(rng: &mut R, len: usize, num: i64, den: i64) -> Vec<Rational> {
    (0..len).map(|_| rational(rng, num, den)).collect()
}

pub fn vector<R: Rng>(rng: &mut R, len: usize, num: i64, den: i64) -> AlgVector {
    AlgVector::new(rationals(rng, len, num, den))
}
