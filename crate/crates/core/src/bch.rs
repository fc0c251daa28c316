//! Dynkin's explicit form of the Baker–Campbell–Hausdorff series.
//!
//! `H(X, Y) = sum_w c_w [w_1, [w_2, ..., [w_{N-1}, w_N]...]]` over words `w`
//! in the letters `X`, `Y`. The coefficients are collected once per step
//! from
//!
//! ```text
//! sum_k (-1)^{k-1}/k  sum  1 / (N * prod r_i! s_i!)   [X^{r_1} Y^{s_1} ... X^{r_k} Y^{s_k}]
//! ```
//!
//! with `r_i + s_i > 0`, truncated at total degree `N <= step`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::algebra::StratifiedAlgebra;
use crate::ring::{factorial, int, Rational, Ring};

/// `false` is the letter `X`, `true` is `Y`.
pub type Word = Vec<bool>;

#[derive(Clone, Debug)]
pub struct DynkinTable {
    step: usize,
    coeffs: BTreeMap<Word, Rational>,
}

impl DynkinTable {
    pub fn new(step: usize) -> Self {
        let mut coeffs: BTreeMap<Word, Rational> = BTreeMap::new();
        let mut blocks: Vec<(u32, u32)> = Vec::new();
        collect(step as u32, &mut blocks, &mut coeffs);
        coeffs.retain(|w, c| !c.is_zero() && !vanishes(w));
        Self { step, coeffs }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn coefficients(&self) -> &BTreeMap<Word, Rational> {
        &self.coeffs
    }

    /// `H(x, y)` in coordinates over any ring.
    pub fn evaluate<R: Ring>(&self, a: &StratifiedAlgebra, x: &[R], y: &[R]) -> Vec<R> {
        // Right-nested brackets memoized by suffix.
        let mut nested: BTreeMap<Word, Vec<R>> = BTreeMap::new();
        let mut out = vec![R::rzero(); a.dim()];
        for (w, c) in &self.coeffs {
            let v = nested_bracket(a, w, x, y, &mut nested);
            for (o, t) in out.iter_mut().zip(&v) {
                if !t.is_rzero() {
                    *o = o.radd(&t.scale(c));
                }
            }
        }
        out
    }
}

fn vanishes(w: &Word) -> bool {
    w.len() >= 2 && w[w.len() - 1] == w[w.len() - 2]
}

fn nested_bracket<R: Ring>(
    a: &StratifiedAlgebra,
    w: &[bool],
    x: &[R],
    y: &[R],
    memo: &mut BTreeMap<Word, Vec<R>>,
) -> Vec<R> {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let letter = |b: bool| if b { y.to_vec() } else { x.to_vec() };
    let v = if w.len() == 1 {
        letter(w[0])
    } else {
        let inner = nested_bracket(a, &w[1..], x, y, memo);
        if inner.iter().all(|t| t.is_rzero()) {
            inner
        } else {
            a.bracket_coords(&letter(w[0]), &inner)
        }
    };
    memo.insert(w.to_vec(), v.clone());
    v
}

fn collect(max: u32, blocks: &mut Vec<(u32, u32)>, out: &mut BTreeMap<Word, Rational>) {
    let used: u32 = blocks.iter().map(|(r, s)| r + s).sum();
    if !blocks.is_empty() {
        let k = blocks.len() as i64;
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        let mut denom = Rational::from_integer(used.into());
        for &(r, s) in blocks.iter() {
            denom *= factorial(r) * factorial(s);
        }
        let c = sign / (int(k) * denom);
        let mut word = Word::new();
        for &(r, s) in blocks.iter() {
            word.extend(std::iter::repeat_n(false, r as usize));
            word.extend(std::iter::repeat_n(true, s as usize));
        }
        *out.entry(word).or_insert_with(Rational::zero) += c;
    }
    for total in 1..=max.saturating_sub(used) {
        for r in 0..=total {
            blocks.push((r, total - r));
            collect(max, blocks, out);
            blocks.pop();
        }
    }
}

/// Brute-force reference: the coefficient table for step `s` as a plain
/// formal power series check, `log(e^X e^Y)` in the free associative
/// algebra on two letters, truncated at degree `s`.
///
/// Used only in tests to pin the Dynkin coefficients independently of the
/// bracket expansion.
#[cfg(test)]
pub(crate) fn log_exp_exp(s: usize) -> BTreeMap<Word, Rational> {
    type Series = BTreeMap<Word, Rational>;
    fn mul(a: &Series, b: &Series, s: usize) -> Series {
        let mut out = Series::new();
        for (wa, ca) in a {
            for (wb, cb) in b {
                if wa.len() + wb.len() > s {
                    continue;
                }
                let mut w = wa.clone();
                w.extend(wb);
                *out.entry(w).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
    let exp_letter = |b: bool| {
        let mut e = Series::new();
        for k in 0..=s {
            e.insert(vec![b; k], <Rational as num_traits::One>::one() / factorial(k as u32));
        }
        e
    };
    let prod = mul(&exp_letter(false), &exp_letter(true), s);
    let mut z = prod.clone();
    z.remove(&Vec::new());
    let mut log = Series::new();
    let mut power = z.clone();
    for k in 1..=s {
        let c = if k % 2 == 1 { int(1) } else { int(-1) } / int(k as i64);
        for (w, v) in &power {
            *log.entry(w.clone()).or_insert_with(Rational::zero) += v * &c;
        }
        power = mul(&power, &z, s);
    }
    log.retain(|_, c| !c.is_zero());
    log
}
