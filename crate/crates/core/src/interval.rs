//! Outward-rounded interval bounds for polynomials over boxes.

use crate::poly::FloatPoly;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// `[c - h, c + h]`.
    pub fn centered(c: f64, h: f64) -> Self {
        Self::new((c - h).next_down(), (c + h).next_up())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new((self.lo + o.lo).next_down(), (self.hi + o.hi).next_up())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo.next_down(), hi.next_up())
    }

    pub fn scale(&self, c: f64) -> Interval {
        let (a, b) = (self.lo * c, self.hi * c);
        Interval::new(a.min(b).next_down(), a.max(b).next_up())
    }

    /// Tight even powers: `[-1, 1]^2 = [0, 1]`.
    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        let rel = 4.0 * k as f64 * f64::EPSILON;
        let down = |x: f64| (x - x.abs() * rel).next_down();
        let up = |x: f64| (x + x.abs() * rel).next_up();
        let f = |x: f64| x.powi(k as i32);
        if k % 2 == 1 {
            Interval::new(down(f(self.lo)), up(f(self.hi)))
        } else if self.lo <= 0.0 && self.hi >= 0.0 {
            Interval::new(0.0, up(f(self.lo).max(f(self.hi))))
        } else {
            let (a, b) = (f(self.lo), f(self.hi));
            Interval::new(down(a.min(b)).max(0.0), up(a.max(b)))
        }
    }
}

/// Range enclosure of `p` over the box `xs` (naive term-wise bound; not
/// tight, but never too small).
pub fn eval(p: &FloatPoly, xs: &[Interval]) -> Interval {
    let mut acc = Interval::point(0.0);
    for (c, e) in p.terms() {
        let mut t = Interval::point(1.0);
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                t = t.mul(&xs[i].powi(k));
            }
        }
        // coefficients were rounded once on conversion
        let ci = Interval::new(c - c.abs() * f64::EPSILON, c + c.abs() * f64::EPSILON);
        acc = acc.add(&t.mul(&ci));
    }
    acc
}
