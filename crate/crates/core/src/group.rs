//! The simply connected group of a stratified algebra.
//!
//! The free functions in this module work in exponential coordinates of the
//! first kind, where a point is the algebra element `X` with `g = exp(X)`
//! and the product is `H(X, Y)`. [`Group`] adds a coordinate chart on top:
//! either the same first-kind coordinates, or second-kind coordinates
//! `g = exp(x_n X_n) ... exp(x_1 X_1)`. Vector fields, sets and measures are
//! expressed in the chart of their group.

use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{AlgVector, StratifiedAlgebra};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::ring::{Rational, Ring};

/// A point in coordinates over the ring `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint<R = Rational> {
    pub coords: Vec<R>,
}

impl<R: Ring> GroupPoint<R> {
    pub fn new(coords: Vec<R>) -> Self {
        Self { coords }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            coords: vec![R::rzero(); dim],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.is_rzero())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl GroupPoint<Rational> {
    pub fn exp(v: &AlgVector) -> Self {
        Self {
            coords: v.coeffs.clone(),
        }
    }
}

fn check<R: Ring>(a: &StratifiedAlgebra, g: &GroupPoint<R>) -> Result<()> {
    a.check_len(g.coords.len())
}

/// `x * y` in first-kind exponential coordinates (truncated Dynkin series).
pub fn bch_product<R: Ring>(a: &StratifiedAlgebra, x: &GroupPoint<R>, y: &GroupPoint<R>) -> Result<GroupPoint<R>> {
    check(a, x)?;
    check(a, y)?;
    Ok(GroupPoint::new(bch_coords(a, &x.coords, &y.coords)))
}

pub(crate) fn bch_coords<R: Ring>(a: &StratifiedAlgebra, x: &[R], y: &[R]) -> Vec<R> {
    if x.iter().all(|c| c.is_rzero()) {
        return y.to_vec();
    }
    if y.iter().all(|c| c.is_rzero()) {
        return x.to_vec();
    }
    a.dynkin().evaluate(a, x, y)
}

pub fn group_inverse<R: Ring>(g: &GroupPoint<R>) -> GroupPoint<R> {
    GroupPoint::new(g.coords.iter().map(Ring::rneg).collect())
}

/// `k g k^{-1}`.
pub fn conjugate<R: Ring>(a: &StratifiedAlgebra, k: &GroupPoint<R>, g: &GroupPoint<R>) -> Result<GroupPoint<R>> {
    let kg = bch_product(a, k, g)?;
    bch_product(a, &kg, &group_inverse(k))
}

pub fn dilate_group(a: &StratifiedAlgebra, lambda: &Rational, g: &GroupPoint) -> Result<GroupPoint> {
    if lambda < &Rational::zero() {
        return Err(Error::NegativeScale);
    }
    check(a, g)?;
    Ok(GroupPoint::new(a.dilate_coords(lambda, &g.coords)))
}

/// `g exp(t x)`.
pub fn flow(a: &StratifiedAlgebra, g: &GroupPoint, x: &AlgVector, t: &Rational) -> Result<GroupPoint> {
    a.check_len(x.len())?;
    bch_product(a, g, &GroupPoint::exp(&x.scale(t)))
}

/// Coordinate chart on the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// `g = exp(sum x_i X_i)`.
    First,
    /// `g = exp(x_n X_n) exp(x_{n-1} X_{n-1}) ... exp(x_1 X_1)`.
    Second,
}

impl Chart {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "first" | "1" => Ok(Chart::First),
            "second" | "2" => Ok(Chart::Second),
            _ => Err(Error::Parse(format!("unknown chart `{s}` (expected first|second)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chart::First => "first",
            Chart::Second => "second",
        }
    }
}

/// A Carnot group: validated algebra plus the coordinate chart used for
/// geometry.
#[derive(Clone, Debug)]
pub struct Group {
    algebra: Arc<StratifiedAlgebra>,
    chart: Chart,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && *self.algebra == *other.algebra
    }
}

impl Group {
    /// Validates the algebra; fails with the report otherwise.
    pub fn new(algebra: StratifiedAlgebra, chart: Chart) -> Result<Self> {
        let report = algebra.validate();
        if !report.passed() {
            return Err(Error::Validation(Box::new(report)));
        }
        Ok(Self {
            algebra: Arc::new(algebra),
            chart,
        })
    }

    pub(crate) fn trusted(algebra: StratifiedAlgebra, chart: Chart) -> Self {
        Self {
            algebra: Arc::new(algebra),
            chart,
        }
    }

    pub fn algebra(&self) -> &StratifiedAlgebra {
        &self.algebra
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn with_chart(&self, chart: Chart) -> Group {
        Group {
            algebra: self.algebra.clone(),
            chart,
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn weights(&self) -> &[u32] {
        self.algebra.weights()
    }

    /// Chart coordinates to first-kind coordinates.
    pub fn to_first<R: Ring>(&self, x: &[R]) -> Vec<R> {
        match self.chart {
            Chart::First => x.to_vec(),
            Chart::Second => {
                let a = self.algebra();
                let n = a.dim();
                let mut acc = vec![R::rzero(); n];
                for i in (0..n).rev() {
                    if x[i].is_rzero() {
                        continue;
                    }
                    let mut e = vec![R::rzero(); n];
                    e[i] = x[i].clone();
                    acc = bch_coords(a, &acc, &e);
                }
                acc
            }
        }
    }

    /// First-kind coordinates to chart coordinates.
    pub fn from_first<R: Ring>(&self, z: &[R]) -> Vec<R> {
        match self.chart {
            Chart::First => z.to_vec(),
            Chart::Second => {
                // to_first(x)_i = x_i + f_i(lower layers), so a fixed point
                // iteration settles one layer per pass.
                let mut x = z.to_vec();
                for _ in 0..self.algebra.step() {
                    let fx = self.to_first(&x);
                    x = z
                        .iter()
                        .zip(fx.iter().zip(&x))
                        .map(|(zi, (fi, xi))| zi.rsub(&fi.rsub(xi)))
                        .collect();
                }
                x
            }
        }
    }

    /// Group product in chart coordinates.
    pub fn mul<R: Ring>(&self, x: &[R], y: &[R]) -> Vec<R> {
        match self.chart {
            Chart::First => bch_coords(self.algebra(), x, y),
            Chart::Second => {
                let z = bch_coords(self.algebra(), &self.to_first(x), &self.to_first(y));
                self.from_first(&z)
            }
        }
    }

    pub fn inverse<R: Ring>(&self, x: &[R]) -> Vec<R> {
        let z: Vec<R> = self.to_first(x).iter().map(Ring::rneg).collect();
        self.from_first(&z)
    }

    /// Chart coordinates of `exp(v)` for an algebra element over `R`.
    pub fn exp_coords<R: Ring>(&self, v: &[R]) -> Vec<R> {
        self.from_first(v)
    }

    /// Intrinsic dilation; diagonal in both charts.
    pub fn dilate<R: Ring>(&self, lambda: &R, x: &[R]) -> Vec<R> {
        self.algebra.dilate_coords(lambda, x)
    }

    /// The chart product `g * y` as polynomials in the coordinates of `y`
    /// (numbered `0..n`), with `g` fixed.
    pub fn left_translation(&self, g: &[Rational]) -> Vec<Polynomial> {
        let n = self.dim();
        let gp: Vec<Polynomial> = g.iter().map(|c| Polynomial::constant(n, c.clone())).collect();
        let y: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
        self.mul(&gp, &y).into_iter().map(|p| p.with_nvars(n)).collect()
    }
}
