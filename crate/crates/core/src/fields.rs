//! Left-invariant vector fields as first-order operators with polynomial
//! coefficients, and polynomial sublevel sets.

use std::fmt;

use crate::algebra::AlgVector;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::poly::Polynomial;
use crate::ring::Rational;

/// `sum_i a_i(x) d_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    pub components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Self {
        Self { components }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            components: vec![Polynomial::zero(n); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::new(self.components.iter().map(|a| a.scale(q)).collect())
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        Self::new(self.components.iter().map(|a| a.mul(p)).collect())
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, a) in self.components.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let s = a.to_string();
            if s == "1" {
                parts.push(format!("d{}", i + 1));
            } else if a.num_terms() == 1 {
                parts.push(format!("{s}*d{}", i + 1));
            } else {
                parts.push(format!("({s})*d{}", i + 1));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + ").replace("+ -", "- "))
    }
}

/// Field of `v` at `x`: the `t`-linear part of `x * exp(t v)` in the
/// group's chart.
pub fn realize_left_invariant(g: &Group, v: &AlgVector) -> Result<PolyVectorField> {
    let n = g.dim();
    g.algebra().check_len(v.len())?;
    let t = Polynomial::var(n + 1, n);
    let x: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n + 1, i)).collect();
    let tv: Vec<Polynomial> = v.coeffs.iter().map(|c| t.scale(c)).collect();
    let e = g.exp_coords(&tv);
    let prod = g.mul(&x, &e);
    let comps = prod
        .iter()
        .map(|p| p.coeff_of_power(n, 1).drop_var(n).with_nvars(n))
        .collect();
    Ok(PolyVectorField::new(comps))
}

/// Realization of `sum_i v_i X_i` with polynomial coefficients `v_i`
/// (e.g. depending on a symbolic dilation parameter).
pub fn realize_symbolic(g: &Group, v: &[Polynomial]) -> Result<PolyVectorField> {
    let n = g.dim();
    g.algebra().check_len(v.len())?;
    let mut acc = PolyVectorField::zero(n);
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let f = realize_left_invariant(g, &g.algebra().basis(i))?;
        acc = acc.add(&f.mul_poly(c));
    }
    Ok(acc)
}

/// `sum_i a_i dP/dx_i`.
pub fn apply_field(v: &PolyVectorField, p: &Polynomial) -> Polynomial {
    let mut acc = Polynomial::zero(p.nvars().max(v.dim()));
    for (i, a) in v.components.iter().enumerate() {
        if a.is_zero() || !p.involves(i) {
            continue;
        }
        acc = acc.add(&a.mul(&p.derivative(i)));
    }
    acc
}

/// Commutator `VW - WV` of first-order operators.
pub fn field_bracket(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let comps = (0..v.dim())
        .map(|k| apply_field(v, &w.components[k]).sub(&apply_field(w, &v.components[k])))
        .collect();
    Ok(PolyVectorField::new(comps))
}

/// Divergence with respect to Lebesgue measure in the chart.
pub fn divergence(v: &PolyVectorField) -> Polynomial {
    v.components
        .iter()
        .enumerate()
        .fold(Polynomial::zero(v.dim()), |acc, (i, a)| acc.add(&a.derivative(i)))
}

pub fn euclidean_gradient(p: &Polynomial) -> Vec<Polynomial> {
    (0..p.nvars()).map(|i| p.derivative(i)).collect()
}

/// `E = {x : P(x) <= 0}` in the chart of `group`.
#[derive(Clone, Debug, PartialEq)]
pub struct SublevelSet {
    pub group: Group,
    pub poly: Polynomial,
}

impl SublevelSet {
    pub fn new(group: Group, poly: Polynomial) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if poly.support_len() > group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                found: poly.support_len(),
            });
        }
        let n = group.dim();
        Ok(Self {
            group,
            poly: poly.with_nvars(n),
        })
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.poly.eval_rational(x) <= Rational::from_integer(0.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::ring::{int, ratio};

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    fn field(s: &[&str]) -> PolyVectorField {
        PolyVectorField::new(s.iter().map(|c| p(c, s.len())).collect())
    }

    #[test]
    fn engel_fields_match_display() {
        let g = presets::engel();
        let a = g.algebra();
        let got: Vec<_> = (0..4)
            .map(|i| realize_left_invariant(&g, &a.basis(i)).unwrap())
            .collect();
        assert_eq!(got[0], field(&["1", "0", "0", "0"]));
        assert_eq!(got[1], field(&["0", "1", "-x1", "1/2*x1^2"]));
        assert_eq!(got[2], field(&["0", "0", "1", "-x1"]));
        assert_eq!(got[3], field(&["0", "0", "0", "1"]));
    }

    #[test]
    fn heisenberg_fields_match_fixture() {
        let g = presets::heisenberg1();
        let a = g.algebra();
        assert_eq!(
            realize_left_invariant(&g, &a.basis(0)).unwrap(),
            field(&["1", "0", "2*x2"])
        );
        assert_eq!(
            realize_left_invariant(&g, &a.basis(1)).unwrap(),
            field(&["0", "1", "-2*x1"])
        );
    }

    #[test]
    fn abelian_fields_are_coordinate() {
        let g = presets::abelian(3);
        for j in 0..3 {
            let f = realize_left_invariant(&g, &g.algebra().basis(j)).unwrap();
            for (i, c) in f.components.iter().enumerate() {
                assert_eq!(c.as_constant().unwrap(), if i == j { int(1) } else { int(0) });
            }
        }
    }

    #[test]
    fn cone_derivatives() {
        let g = presets::engel();
        let a = g.algebra();
        let alpha = ratio(1, 2);
        let pa = p("1/2*x2^3 + 2*x4", 4);
        let x1 = realize_left_invariant(&g, &a.basis(0)).unwrap();
        let x2 = realize_left_invariant(&g, &a.basis(1)).unwrap();
        assert!(apply_field(&x1, &pa).is_zero());
        assert_eq!(
            apply_field(&x2, &pa),
            p("x1^2", 4).add(&p("x2^2", 4).scale(&(int(3) * &alpha)))
        );
        let z = a.adjoint_exp(&a.basis(0), &a.basis(1)).unwrap();
        let zf = realize_left_invariant(&g, &z).unwrap();
        assert_eq!(apply_field(&zf, &pa), p("3/2*x2^2 + x1^2 + 2*x1 + 1", 4));
    }

    #[test]
    fn heisenberg_fixture_derivatives() {
        let g = presets::heisenberg1();
        let f = p("x3 + 2*x1*x2", 3);
        let x1 = realize_left_invariant(&g, &g.algebra().basis(0)).unwrap();
        let x2 = realize_left_invariant(&g, &g.algebra().basis(1)).unwrap();
        assert_eq!(apply_field(&x1, &f), p("4*x2", 3));
        assert!(apply_field(&x2, &f).is_zero());
    }

    #[test]
    fn brackets_of_fields() {
        let g = presets::engel();
        let a = g.algebra();
        let x1 = realize_left_invariant(&g, &a.basis(0)).unwrap();
        let x2 = realize_left_invariant(&g, &a.basis(1)).unwrap();
        let m3 = realize_left_invariant(&g, &a.basis(2).neg()).unwrap();
        assert_eq!(field_bracket(&x1, &x2).unwrap(), m3);
        assert!(field_bracket(&x2, &x2).unwrap().is_zero());

        let h = presets::heisenberg1();
        let y1 = realize_left_invariant(&h, &h.algebra().basis(0)).unwrap();
        let y2 = realize_left_invariant(&h, &h.algebra().basis(1)).unwrap();
        assert_eq!(field_bracket(&y1, &y2).unwrap(), field(&["0", "0", "-4"]));
    }

    #[test]
    fn divergence_free() {
        let g = presets::engel();
        let x2 = realize_left_invariant(&g, &g.algebra().basis(1)).unwrap();
        assert!(divergence(&x2).is_zero());
        assert!(divergence(&field(&["3", "-1", "2", "0"])).is_zero());
    }

    #[test]
    fn gradients() {
        let pa = p("1/2*x2^3 + 2*x4", 4);
        let grad = euclidean_gradient(&pa);
        assert_eq!(grad, vec![p("0", 4), p("3/2*x2^2", 4), p("0", 4), p("2", 4)]);
        assert!(euclidean_gradient(&Polynomial::constant(3, int(7)))
            .iter()
            .all(Polynomial::is_zero));
        let pab = p("2*x4 - x3 + x2", 4);
        let consts: Vec<_> = euclidean_gradient(&pab)
            .iter()
            .map(|q| q.as_constant().unwrap())
            .collect();
        assert_eq!(consts, vec![int(0), int(1), int(-1), int(2)]);
    }

    #[test]
    fn field_display() {
        let g = presets::engel();
        let x2 = realize_left_invariant(&g, &g.algebra().basis(1)).unwrap();
        assert_eq!(x2.to_string(), "d2 - x1*d3 + 1/2*x1^2*d4");
    }
}
