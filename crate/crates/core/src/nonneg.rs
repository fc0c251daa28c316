//! Sign certificates for polynomials.
//!
//! A small hierarchy of sufficient conditions for `P >= 0`, backed by a
//! seeded falsifier. The procedure is incomplete on purpose: `Unknown` is a
//! legitimate answer.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::poly::Polynomial;
use crate::ring::{f64_to_rational, format_rational_list, int, Rational};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Nonnegative,
    Indefinite,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonnegVerdict {
    pub sign: Sign,
    /// Point with `P < 0`, present exactly when the sign is indefinite.
    pub witness: Option<Vec<Rational>>,
    /// Short name of the certificate or search that decided the verdict.
    pub method: &'static str,
}

impl NonnegVerdict {
    fn certified(sign: Sign, method: &'static str) -> Self {
        Self {
            sign,
            witness: None,
            method,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        matches!(self.sign, Sign::Positive | Sign::Nonnegative)
    }

    pub fn witness_string(&self) -> Option<String> {
        self.witness.as_deref().map(format_rational_list)
    }
}

const DEFAULT_SEED: u64 = 0x5eed;

pub fn polynomial_nonneg(p: &Polynomial) -> NonnegVerdict {
    polynomial_nonneg_seeded(p, DEFAULT_SEED)
}

pub fn polynomial_nonneg_seeded(p: &Polynomial, seed: u64) -> NonnegVerdict {
    let n = p.support_len();
    if let Some(c) = p.as_constant() {
        return constant_verdict(&c, n);
    }
    if let Some(w) = linear_witness(p) {
        return indefinite(w, "linear-witness");
    }
    if let Some(w) = falsify(p, seed) {
        return indefinite(w, "falsifier");
    }
    match certify(p) {
        Some((sign, method)) => NonnegVerdict::certified(sign, method),
        None => NonnegVerdict::certified(Sign::Unknown, "none"),
    }
}

fn indefinite(w: Vec<Rational>, method: &'static str) -> NonnegVerdict {
    NonnegVerdict {
        sign: Sign::Indefinite,
        witness: Some(w),
        method,
    }
}

fn constant_verdict(c: &Rational, n: usize) -> NonnegVerdict {
    if c.is_positive() {
        NonnegVerdict::certified(Sign::Positive, "constant")
    } else if c.is_zero() {
        NonnegVerdict::certified(Sign::Nonnegative, "constant")
    } else {
        indefinite(vec![Rational::zero(); n], "constant")
    }
}

/// Certificate search without the falsifier.
fn certify(p: &Polynomial) -> Option<(Sign, &'static str)> {
    if let Some(c) = p.as_constant() {
        return if c.is_positive() {
            Some((Sign::Positive, "constant"))
        } else if c.is_zero() {
            Some((Sign::Nonnegative, "constant"))
        } else {
            None
        };
    }
    if let Some(s) = even_powers(p) {
        return Some((s, "even-powers"));
    }
    quadratic(p).map(|s| (s, "discriminant"))
}

/// Every non-constant term is an even monomial with positive coefficient.
fn even_powers(p: &Polynomial) -> Option<Sign> {
    let mut constant = Rational::zero();
    for (e, c) in p.terms() {
        if e.iter().all(|&k| k == 0) {
            constant = c.clone();
        } else if !(c.is_positive() && e.iter().all(|k| k % 2 == 0)) {
            return None;
        }
    }
    if constant.is_negative() {
        None
    } else if constant.is_positive() {
        Some(Sign::Positive)
    } else {
        Some(Sign::Nonnegative)
    }
}

/// `P = a x^2 + b x + c` in some variable with `a > 0` certified and
/// `4ac - b^2 >= 0` certified recursively.
fn quadratic(p: &Polynomial) -> Option<Sign> {
    for i in 0..p.support_len() {
        if p.degree_in(i) != 2 {
            continue;
        }
        let a = p.coeff_of_power(i, 2);
        let b = p.coeff_of_power(i, 1);
        let c = p.coeff_of_power(i, 0);
        if certify(&a).map(|(s, _)| s) != Some(Sign::Positive) {
            continue;
        }
        let disc = a.mul(&c).scale(&int(4)).sub(&b.mul(&b));
        match certify(&disc) {
            Some((Sign::Positive, _)) => return Some(Sign::Positive),
            Some((Sign::Nonnegative, _)) => return Some(Sign::Nonnegative),
            _ => {}
        }
    }
    None
}

/// A variable of degree one with a constant coefficient `b` makes `P`
/// unbounded below: with the others at zero, `x = -c0/b - sign(b)` gives
/// `P = -|b|`.
fn linear_witness(p: &Polynomial) -> Option<Vec<Rational>> {
    let n = p.support_len();
    for i in 0..n {
        if p.degree_in(i) != 1 {
            continue;
        }
        let Some(b) = p.coeff_of_power(i, 1).as_constant() else {
            continue;
        };
        let c0 = p.constant_term();
        let mut x = vec![Rational::zero(); n];
        x[i] = -c0 / &b - b.signum();
        debug_assert!(p.eval_rational(&x).is_negative());
        return Some(x);
    }
    None
}

/// Seeded random sampling at several scales, then coordinate descent from
/// the best few points. Any hit is confirmed exactly before being
/// returned.
fn falsify(p: &Polynomial, seed: u64) -> Option<Vec<Rational>> {
    let n = p.support_len();
    if n == 0 {
        return None;
    }
    let f = p.to_float();
    let confirm = |x: &[f64]| -> Option<Vec<Rational>> {
        for bits in [4u32, 12, 30] {
            let q: Vec<Rational> = x.iter().map(|&v| f64_to_rational(v, bits)).collect();
            if p.eval_rational(&q).is_negative() {
                return Some(q);
            }
        }
        None
    };
    let grid = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    if n <= 4 {
        let total = grid.len().pow(n as u32);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut k = idx;
            for v in x.iter_mut() {
                *v = grid[k % grid.len()];
                k /= grid.len();
            }
            if f.eval(&x) < 0.0 {
                if let Some(q) = confirm(&x) {
                    return Some(q);
                }
            }
        }
    }
    let mut rng = sampling::rng(seed);
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::new();
    for scale in [0.01, 0.1, 1.0, 10.0, 100.0] {
        for _ in 0..64 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
            let v = f.eval(&x);
            if v < 0.0 {
                if let Some(q) = confirm(&x) {
                    return Some(q);
                }
            }
            pool.push((v, x));
        }
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (mut best, mut x) in pool.into_iter().take(6) {
        let mut h = 1.0;
        let mut sweeps = 0;
        while h > 1e-6 && sweeps < 2000 {
            sweeps += 1;
            let mut improved = false;
            for i in 0..n {
                for d in [h, -h] {
                    x[i] += d;
                    let v = f.eval(&x);
                    if v < best {
                        best = v;
                        improved = true;
                    } else {
                        x[i] -= d;
                    }
                }
            }
            if best < 0.0 {
                if let Some(q) = confirm(&x) {
                    return Some(q);
                }
            }
            if !improved {
                h /= 2.0;
            }
        }
    }
    None
}
