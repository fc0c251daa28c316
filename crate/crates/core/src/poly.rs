//! Exact sparse multivariate polynomials over the rationals.
//!
//! Variables are numbered from zero and printed as `x1, x2, ...`. A
//! polynomial carries a declared variable count, but arithmetic between
//! polynomials with different counts simply adopts the larger one, so
//! constants built without a context mix freely with everything else.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::ring::{parse_rational, rational_to_f64, Rational, Ring};

/// Exponent vector with trailing zeros trimmed.
pub type Monomial = Vec<u32>;

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    let len = a.len().max(b.len());
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        out.push(a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0));
    }
    out
}

#[derive(Clone, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Vec::new(), c);
        p
    }

    /// The coordinate function `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Self::monomial(nvars.max(i + 1), e, Rational::from_integer(1.into()))
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, coeff: Rational) -> Self {
        let mut p = Self::zero(nvars.max(exps.len()));
        p.add_term(exps, coeff);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.nvars = p.nvars.max(e.len());
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let key = trim(exps);
        let remove = match self.terms.get_mut(&key) {
            Some(c) => {
                *c += coeff;
                c.is_zero()
            }
            None => {
                self.terms.insert(key.clone(), coeff);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Same polynomial with at least `n` declared variables.
    pub fn with_nvars(mut self, n: usize) -> Self {
        self.nvars = self.nvars.max(n);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&trim(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.nvars = out.nvars.max(other.nvars);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.nvars = out.nvars.max(other.nvars);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars.max(other.nvars));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(mono_mul(ea, eb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Rational::from_integer(1.into()));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to variable `i` (zero based).
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.get(i).copied().unwrap_or(0);
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(k.into()));
        }
        out
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms
            .keys()
            .map(|e| e.get(i).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Largest variable index actually used, plus one.
    pub fn support_len(&self) -> usize {
        self.terms.keys().map(|e| e.len()).max().unwrap_or(0)
    }

    pub fn involves(&self, i: usize) -> bool {
        self.degree_in(i) > 0
    }

    /// Coefficient of `x_i^k` viewed as a polynomial in the other variables.
    pub fn coeff_of_power(&self, i: usize, k: u32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e.get(i).copied().unwrap_or(0) == k {
                let mut e2 = e.clone();
                if i < e2.len() {
                    e2[i] = 0;
                }
                out.add_term(e2, c.clone());
            }
        }
        out
    }

    /// Splits into the coefficients of successive powers of `x_i`.
    pub fn collect_powers(&self, i: usize) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e.get(i).copied().unwrap_or(0);
            let mut e2 = e.clone();
            if i < e2.len() {
                e2[i] = 0;
            }
            out.entry(k)
                .or_insert_with(|| Polynomial::zero(self.nvars))
                .add_term(e2, c.clone());
        }
        out
    }

    /// Removes the unused variable `i`, shifting later indices down.
    pub fn drop_var(&self, i: usize) -> Self {
        debug_assert!(!self.involves(i));
        let mut out = Self::zero(self.nvars.saturating_sub(1));
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            if i < e2.len() {
                e2.remove(i);
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Largest weighted degree of a term (`None` for the zero polynomial).
    pub fn weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(a, w)| a * w).sum())
            .max()
    }

    /// `Some(d)` when every term has weighted degree `d`.
    pub fn weighted_homogeneous_degree(&self, weights: &[u32]) -> Option<u32> {
        let mut degs = self
            .terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(a, w)| a * w).sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Evaluation at points of an arbitrary ring.
    pub fn eval<R: Ring>(&self, args: &[R]) -> R {
        let nv = self.support_len();
        assert!(args.len() >= nv, "too few arguments for polynomial evaluation");
        let mut powers: Vec<Vec<R>> = Vec::with_capacity(nv);
        for (i, arg) in args.iter().enumerate().take(nv) {
            let d = self.degree_in(i) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(R::rone());
            for k in 1..=d {
                let next = row[k - 1].rmul(arg);
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = R::rzero();
        for (e, c) in &self.terms {
            let mut t = R::from_rational(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.rmul(&powers[i][k as usize]);
                }
            }
            acc = acc.radd(&t);
        }
        acc
    }

    /// Composition `P(args_1, ..., args_n)`.
    pub fn substitute(&self, args: &[Polynomial]) -> Result<Polynomial> {
        if args.len() != self.nvars.max(self.support_len()) {
            return Err(Error::DimensionMismatch {
                expected: self.nvars.max(self.support_len()),
                found: args.len(),
            });
        }
        let n = args.iter().map(|a| a.nvars).max().unwrap_or(0);
        Ok(self.eval(args).with_nvars(n))
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        self.eval(x)
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (rational_to_f64(c), e.clone()))
                .collect(),
        }
    }

    /// Remainder of `self` modulo `divisor`, where `divisor` has the form
    /// `c * x_i + R` with `c` a nonzero constant and `R` free of `x_i`.
    /// The remainder is free of `x_i`; it vanishes iff `divisor` divides `self`.
    pub fn remainder_mod_linear(&self, divisor: &Polynomial, i: usize) -> Option<Polynomial> {
        if divisor.degree_in(i) != 1 {
            return None;
        }
        let lead = divisor.coeff_of_power(i, 1).as_constant()?;
        if lead.is_zero() {
            return None;
        }
        let rest = divisor.coeff_of_power(i, 0);
        let n = self.nvars.max(divisor.nvars).max(i + 1);
        let root = rest.scale(&(-Rational::from_integer(1.into()) / lead));
        let args: Vec<Polynomial> = (0..n)
            .map(|j| if j == i { root.clone() } else { Polynomial::var(n, j) })
            .collect();
        Some(self.clone().with_nvars(n).eval(&args).with_nvars(n))
    }

    /// Terms in a stable display order: descending total degree, then
    /// descending exponents.
    fn display_order(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }

    /// Parses the sparse text form, e.g. `1/2*x1^2*x3 - x2 + 4`.
    pub fn parse(text: &str, nvars: usize) -> Result<Polynomial> {
        parse_polynomial(text, nvars)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let one = Rational::from_integer(1.into());
        for (idx, (e, c)) in self.display_order().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if mag != one || e.iter().all(|&k| k == 0) {
                factors.push(mag.to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, k)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

fn parse_polynomial(text: &str, nvars: usize) -> Result<Polynomial> {
    let mut out = Polynomial::zero(nvars);
    let s: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut sign = Rational::from_integer(1.into());
    let mut any = false;
    let mut pending = false;
    let skip_ws = |i: &mut usize| {
        while *i < s.len() && s[*i].is_whitespace() {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i >= s.len() {
            if pending {
                return Err(Error::Parse(format!("dangling sign in `{text}`")));
            }
            break;
        }
        match s[i] {
            '+' => {
                pending = true;
                i += 1;
                continue;
            }
            '-' => {
                pending = true;
                sign = -sign;
                i += 1;
                continue;
            }
            _ => {}
        }
        let mut coeff = sign.clone();
        let mut exps: Vec<u32> = Vec::new();
        let mut factors = 0;
        loop {
            skip_ws(&mut i);
            if i >= s.len() || s[i] == '+' || s[i] == '-' {
                break;
            }
            if s[i] == '*' {
                i += 1;
                continue;
            }
            if s[i] == 'x' {
                i += 1;
                let start = i;
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
                let idx: usize = s[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad variable in `{text}`")))?;
                if idx == 0 {
                    return Err(Error::Parse("variables are numbered from x1".into()));
                }
                let mut pow = 1u32;
                skip_ws(&mut i);
                if i < s.len() && s[i] == '^' {
                    i += 1;
                    skip_ws(&mut i);
                    let st = i;
                    while i < s.len() && s[i].is_ascii_digit() {
                        i += 1;
                    }
                    pow = s[st..i]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{text}`")))?;
                }
                if exps.len() < idx {
                    exps.resize(idx, 0);
                }
                exps[idx - 1] += pow;
            } else if s[i].is_ascii_digit() || s[i] == '.' {
                let st = i;
                while i < s.len() && (s[i].is_ascii_digit() || s[i] == '.' || s[i] == '/') {
                    i += 1;
                }
                let lit: String = s[st..i].iter().collect();
                coeff *= parse_rational(&lit)?;
            } else {
                return Err(Error::Parse(format!("unexpected `{}` in `{text}`", s[i])));
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(Error::Parse(format!("dangling sign in `{text}`")));
        }
        if exps.len() > nvars {
            return Err(Error::Parse(format!(
                "variable x{} out of range (dimension {nvars})",
                exps.len()
            )));
        }
        out.add_term(exps, coeff);
        any = true;
        pending = false;
        sign = Rational::from_integer(1.into());
    }
    if !any {
        return Err(Error::Parse("empty polynomial".into()));
    }
    Ok(out)
}

impl Ring for Polynomial {
    fn rzero() -> Self {
        Polynomial::zero(0)
    }
    fn rone() -> Self {
        Polynomial::constant(0, Rational::from_integer(1.into()))
    }
    fn from_rational(q: &Rational) -> Self {
        Polynomial::constant(0, q.clone())
    }
    fn is_rzero(&self) -> bool {
        self.terms.is_empty()
    }
    fn radd(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn rsub(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn rmul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn scale(&self, q: &Rational) -> Self {
        Polynomial::scale(self, q)
    }
}

/// Double precision copy of a polynomial for quadrature.
#[derive(Clone, Debug, Default)]
pub struct FloatPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl FloatPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= x[i].powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, ratio};
    use proptest::prelude::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(4, i)
    }

    #[test]
    fn arithmetic_cancels_to_canonical_zero() {
        let p = x(0).mul(&x(1)).add(&x(2));
        let q = p.sub(&p);
        assert!(q.is_zero());
        assert_eq!(q, Polynomial::zero(7));
    }

    #[test]
    fn substitution_hand_expansion() {
        // x1*x2 with (y1 + 1, y2) -> y1*y2 + y2
        let p = x(0).mul(&x(1)).with_nvars(2);
        let p = Polynomial::from_terms(2, p.terms().map(|(e, c)| (e.clone(), c.clone())));
        let y1 = Polynomial::var(2, 0);
        let y2 = Polynomial::var(2, 1);
        let one = Polynomial::constant(2, int(1));
        let r = p.substitute(&[y1.add(&one), y2.clone()]).unwrap();
        assert_eq!(r, y1.mul(&y2).add(&y2));
    }

    #[test]
    fn substitution_count_mismatch() {
        let p = Polynomial::var(3, 0);
        assert!(p.substitute(&[Polynomial::var(3, 0)]).is_err());
    }

    #[test]
    fn identity_substitution() {
        let p = Polynomial::parse("1/2*x2^3 + 2*x4 - x1*x3", 4).unwrap();
        let ids: Vec<_> = (0..4).map(x).collect();
        assert_eq!(p.substitute(&ids).unwrap(), p);
    }

    #[test]
    fn text_format_round_trip() {
        let p = Polynomial::parse("1/2*x2^3 + 2*x4 - x1 x3 + 5", 4).unwrap();
        assert_eq!(p.to_string(), "1/2*x2^3 - x1*x3 + 2*x4 + 5");
        assert_eq!(Polynomial::parse(&p.to_string(), 4).unwrap(), p);
        assert!(Polynomial::parse("x5", 4).is_err());
        assert!(Polynomial::parse("x1 +", 4).is_err());
    }

    #[test]
    fn derivative_and_collect() {
        let p = Polynomial::parse("3*x1^2*x2 + x2", 2).unwrap();
        assert_eq!(p.derivative(0), Polynomial::parse("6*x1*x2", 2).unwrap());
        let parts = p.collect_powers(0);
        assert_eq!(parts[&2], Polynomial::parse("3*x2", 2).unwrap());
        assert_eq!(parts[&0], Polynomial::parse("x2", 2).unwrap());
    }

    #[test]
    fn linear_remainder_detects_divisibility() {
        let p = Polynomial::parse("x4 + x1^2", 4).unwrap();
        let f = p.mul(&Polynomial::parse("x2 + 3", 4).unwrap());
        assert!(f.remainder_mod_linear(&p, 3).unwrap().is_zero());
        let g = f.add(&x(0));
        assert_eq!(g.remainder_mod_linear(&p, 3).unwrap(), x(0));
    }

    #[test]
    fn weighted_homogeneity() {
        let p = Polynomial::parse("1/2*x2^3 + 2*x4", 4).unwrap();
        assert_eq!(p.weighted_homogeneous_degree(&[1, 1, 2, 3]), Some(3));
        let q = Polynomial::parse("2*x4 + x2", 4).unwrap();
        assert_eq!(q.weighted_homogeneous_degree(&[1, 1, 2, 3]), None);
        assert_eq!(q.weighted_degree(&[1, 1, 2, 3]), Some(3));
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..=5, 1i64..=4), 0..6)
            .prop_map(|ts| Polynomial::from_terms(3, ts.into_iter().map(|(e, p, q)| (e, ratio(p, q)))))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly(), i in 0usize..3) {
            let lhs = a.mul(&b).derivative(i);
            let rhs = a.derivative(i).mul(&b).add(&a.mul(&b.derivative(i)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn text_round_trip(a in arb_poly()) {
            prop_assert_eq!(Polynomial::parse(&a.to_string(), 3).unwrap(), a);
        }
    }
}
