//! Named sublevel sets used by the command line and the test suites.

use crate::error::{Error, Result};
use crate::fields::SublevelSet;
use crate::group::Group;
use crate::poly::Polynomial;
use crate::ring::{format_rational, parse_rational, parse_rational_list, Rational};

pub const SET_NAMES: &[&str] = &[
    "halfspace:c,nu1,..,num",
    "cone:alpha",
    "pab:a,b",
    "rloca",
    "poly:<text>",
];

/// `alpha x2^3 + 2 x4`.
pub fn cone(alpha: &Rational) -> Polynomial {
    Polynomial::parse(&format!("{} * x2^3 + 2*x4", format_rational(alpha)), 4).expect("cone polynomial")
}

/// `2a x4 - b x3 + x2`.
pub fn pab(a: &Rational, b: &Rational) -> Polynomial {
    let two_a = a * Rational::from_integer(2.into());
    Polynomial::var(4, 3)
        .scale(&two_a)
        .sub(&Polynomial::var(4, 2).scale(b))
        .add(&Polynomial::var(4, 1))
}

/// `x3 + 2 x1 x2`.
pub fn rloca() -> Polynomial {
    Polynomial::parse("x3 + 2*x1*x2", 3).expect("rloca polynomial")
}

/// `sum_i nu_i x_{h_i} - c` over the horizontal coordinates `h`.
pub fn halfspace(g: &Group, c: &Rational, nu: &[Rational]) -> Result<Polynomial> {
    let horiz = g.algebra().layer_indices(1);
    if nu.len() != horiz.len() {
        return Err(Error::DimensionMismatch {
            expected: horiz.len(),
            found: nu.len(),
        });
    }
    if nu.iter().all(num_traits::Zero::is_zero) {
        return Err(Error::Invalid("halfspace normal must be nonzero".into()));
    }
    let n = g.dim();
    let mut p = Polynomial::constant(n, -c.clone());
    for (v, &i) in nu.iter().zip(&horiz) {
        p = p.add(&Polynomial::var(n, i).scale(v));
    }
    Ok(p)
}

/// Parses a set description against `g`.
pub fn parse_set(g: &Group, spec: &str) -> Result<SublevelSet> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let poly = match name {
        "halfspace" => {
            let v = parse_rational_list(arg)?;
            let (c, nu) = v
                .split_first()
                .ok_or_else(|| Error::Parse("halfspace needs c,nu1,..,num".into()))?;
            halfspace(g, c, nu)?
        }
        "cone" => cone(&parse_rational(if arg.is_empty() { "1/2" } else { arg })?),
        "pab" => {
            let v = parse_rational_list(arg)?;
            let [a, b] = v.as_slice() else {
                return Err(Error::Parse("pab needs a,b".into()));
            };
            pab(a, b)
        }
        "rloca" => rloca(),
        "poly" => Polynomial::parse(arg, g.dim())?,
        _ => {
            return Err(Error::Parse(format!(
                "unknown set `{spec}` (expected one of {})",
                SET_NAMES.join(", ")
            )))
        }
    };
    SublevelSet::new(g.clone(), poly)
}
