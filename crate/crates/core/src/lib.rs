//! Exact and numerical computation in Carnot groups.

pub mod algebra;
pub mod bch;
pub mod blowup;
pub mod cli;
pub mod error;
pub mod fields;
pub mod group;
pub mod interval;
pub mod measure;
pub mod nonneg;
pub mod poly;
pub mod presets;
pub mod quadrature;
pub mod ring;
pub mod sampling;
pub mod sets;
pub mod span;
pub mod subspace;

pub use algebra::{AlgVector, StratifiedAlgebra, ValidationReport};
pub use error::{Error, Result};
pub use fields::{PolyVectorField, SublevelSet};
pub use group::{Chart, Group, GroupPoint};
pub use poly::Polynomial;
pub use ring::{Rational, Ring};
pub use subspace::Subspace;
