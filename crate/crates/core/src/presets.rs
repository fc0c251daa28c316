//! Built-in groups.

use crate::algebra::StratifiedAlgebra;
use crate::error::{Error, Result};
use crate::group::{Chart, Group};
use crate::ring::int;

/// Commutative `R^n`.
pub fn abelian(n: usize) -> Group {
    let a = StratifiedAlgebra::new(&format!("abelian:{n}"), vec![1; n], Vec::new()).expect("abelian preset");
    Group::trusted(a, Chart::First)
}

/// First Heisenberg group with `[X1, X2] = -4 X3`; in first-kind
/// coordinates `X1 = d1 + 2 x2 d3` and `X2 = d2 - 2 x1 d3`.
pub fn heisenberg1() -> Group {
    let a = StratifiedAlgebra::new("heisenberg1", vec![1, 1, 2], vec![(0, 1, 2, int(-4))]).expect("heisenberg preset");
    Group::trusted(a, Chart::First)
}

/// Engel group: `[X1, X2] = -X3`, `[X1, X3] = -X4`, in second-kind
/// coordinates where `X1 = d1`, `X2 = d2 - x1 d3 + x1^2/2 d4`,
/// `X3 = d3 - x1 d4`, `X4 = d4`.
pub fn engel() -> Group {
    let a = StratifiedAlgebra::new("engel", vec![1, 1, 2, 3], vec![(0, 1, 2, int(-1)), (0, 2, 3, int(-1))])
        .expect("engel preset");
    Group::trusted(a, Chart::Second)
}

pub const PRESET_NAMES: &[&str] = &["abelian:<n>", "heisenberg1", "engel"];

pub fn by_name(name: &str) -> Result<Group> {
    match name {
        "engel" => Ok(engel()),
        "heisenberg1" | "heisenberg" => Ok(heisenberg1()),
        _ => {
            if let Some(n) = name.strip_prefix("abelian:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad abelian dimension in `{name}`")))?;
                if n == 0 {
                    return Err(Error::Invalid("abelian dimension must be positive".into()));
                }
                Ok(abelian(n))
            } else {
                Err(Error::Parse(format!(
                    "unknown group `{name}` (presets: {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        }
    }
}

/// Presets used by the property suites.
pub fn all() -> Vec<Group> {
    vec![abelian(3), heisenberg1(), engel()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for g in all() {
            assert!(g.algebra().validate().passed(), "{}", g.algebra().name());
        }
        assert_eq!(heisenberg1().algebra().homogeneous_dim(), 4);
    }

    #[test]
    fn lookup() {
        assert_eq!(by_name("abelian:5").unwrap().dim(), 5);
        assert!(by_name("abelian:0").is_err());
        assert!(by_name("nope").is_err());
    }
}
