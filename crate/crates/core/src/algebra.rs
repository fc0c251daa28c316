//! Stratified nilpotent Lie algebras given by exact structure constants in
//! an adapted basis.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bch::DynkinTable;
use crate::error::{Error, Result};
use crate::ring::{factorial, format_rational, Rational, Ring};
use crate::subspace::Subspace;

/// One structure constant `c^k_{ij}` with `i < j` (zero based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstant {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: Rational,
}

/// A finite dimensional Lie algebra with a layer grading.
///
/// Only constants with `i < j` are stored; `[X_j, X_i] = -[X_i, X_j]` is
/// synthesized. Inputs that cannot be stored antisymmetrically (a nonzero
/// `[X_i, X_i]`, or conflicting values for `(i, j)` and `(j, i)`) are kept
/// as defects and reported by [`StratifiedAlgebra::validate`].
#[derive(Debug)]
pub struct StratifiedAlgebra {
    name: String,
    weights: Vec<u32>,
    constants: Vec<StructureConstant>,
    antisymmetry_defects: Vec<(usize, usize, usize)>,
    dynkin: OnceLock<DynkinTable>,
}

impl Clone for StratifiedAlgebra {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            weights: self.weights.clone(),
            constants: self.constants.clone(),
            antisymmetry_defects: self.antisymmetry_defects.clone(),
            dynkin: OnceLock::new(),
        }
    }
}

impl PartialEq for StratifiedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.constants == other.constants
            && self.antisymmetry_defects == other.antisymmetry_defects
    }
}

impl StratifiedAlgebra {
    /// Builds an algebra from layer weights (one per basis vector) and
    /// bracket entries `(i, j, k, c)` meaning `[X_i, X_j]` has `c` on `X_k`.
    pub fn new<I>(name: &str, weights: Vec<u32>, brackets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, Rational)>,
    {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Invalid("algebra must have positive dimension".into()));
        }
        let mut table: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        let mut defects = Vec::new();
        let mut seen: BTreeMap<(usize, usize, usize), (bool, Rational)> = BTreeMap::new();
        for (i, j, k, c) in brackets {
            if i >= n || j >= n || k >= n {
                return Err(Error::Invalid(format!(
                    "bracket index out of range in [{}, {}] -> {}",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            if c.is_zero() {
                continue;
            }
            if i == j {
                defects.push((i, j, k));
                continue;
            }
            let (a, b, v, flipped) = if i < j { (i, j, c, false) } else { (j, i, -c, true) };
            match seen.get(&(a, b, k)) {
                Some((was_flipped, prev)) if *was_flipped != flipped => {
                    if *prev != v {
                        defects.push((i, j, k));
                    }
                    continue;
                }
                _ => {}
            }
            seen.insert((a, b, k), (flipped, v.clone()));
            *table.entry((a, b, k)).or_insert_with(Rational::zero) += v;
        }
        let constants = table
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((i, j, k), value)| StructureConstant { i, j, k, value })
            .collect();
        Ok(Self {
            name: name.to_string(),
            weights,
            constants,
            antisymmetry_defects: defects,
            dynkin: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Layer weight of each basis vector.
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn step(&self) -> usize {
        self.weights.iter().copied().max().unwrap_or(0) as usize
    }

    /// Homogeneous dimension `Q = sum_i w_i`.
    pub fn homogeneous_dim(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// Dimension of the horizontal layer.
    pub fn horizontal_dim(&self) -> usize {
        self.weights.iter().filter(|&&w| w == 1).count()
    }

    pub fn constants(&self) -> &[StructureConstant] {
        &self.constants
    }

    /// Basis indices belonging to layer `w`.
    pub fn layer_indices(&self, w: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights[i] == w).collect()
    }

    pub fn basis(&self, i: usize) -> AlgVector {
        let mut c = vec![Rational::zero(); self.dim()];
        c[i] = Rational::one();
        AlgVector::new(c)
    }

    pub fn zero(&self) -> AlgVector {
        AlgVector::new(vec![Rational::zero(); self.dim()])
    }

    pub(crate) fn dynkin(&self) -> &DynkinTable {
        self.dynkin.get_or_init(|| DynkinTable::new(self.step().max(1)))
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// Bracket of coordinate vectors over any scalar ring.
    pub fn bracket_coords<R: Ring>(&self, x: &[R], y: &[R]) -> Vec<R> {
        let mut out = vec![R::rzero(); self.dim()];
        for sc in &self.constants {
            let (xi, xj, yi, yj) = (&x[sc.i], &x[sc.j], &y[sc.i], &y[sc.j]);
            if (xi.is_rzero() || yj.is_rzero()) && (xj.is_rzero() || yi.is_rzero()) {
                continue;
            }
            let t = xi.rmul(yj).rsub(&xj.rmul(yi));
            if !t.is_rzero() {
                out[sc.k] = out[sc.k].radd(&t.scale(&sc.value));
            }
        }
        out
    }

    pub fn bracket(&self, x: &AlgVector, y: &AlgVector) -> Result<AlgVector> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok(AlgVector::new(self.bracket_coords(&x.coeffs, &y.coeffs)))
    }

    /// Scales the layer-`w` coordinates by `lambda^w`.
    pub fn dilate_coords<R: Ring>(&self, lambda: &R, x: &[R]) -> Vec<R> {
        let mut powers = vec![R::rone()];
        for k in 1..=self.step() {
            let next = powers[k - 1].rmul(lambda);
            powers.push(next);
        }
        x.iter()
            .zip(&self.weights)
            .map(|(c, &w)| c.rmul(&powers[w as usize]))
            .collect()
    }

    pub fn dilate_alg(&self, lambda: &Rational, x: &AlgVector) -> Result<AlgVector> {
        if lambda < &Rational::zero() {
            return Err(Error::NegativeScale);
        }
        self.check_len(x.len())?;
        Ok(AlgVector::new(self.dilate_coords(lambda, &x.coeffs)))
    }

    /// `e^{ad_y} x = sum_{i < s} ad_y^i(x) / i!`, finite by nilpotency.
    pub fn adjoint_exp_coords<R: Ring>(&self, y: &[R], x: &[R]) -> Vec<R> {
        let mut acc = x.to_vec();
        let mut term = x.to_vec();
        for i in 1..self.step().max(1) as u32 {
            term = self.bracket_coords(y, &term);
            if term.iter().all(|t| t.is_rzero()) {
                break;
            }
            let inv = Rational::one() / factorial(i);
            for (a, t) in acc.iter_mut().zip(&term) {
                *a = a.radd(&t.scale(&inv));
            }
        }
        acc
    }

    pub fn adjoint_exp(&self, y: &AlgVector, x: &AlgVector) -> Result<AlgVector> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok(AlgVector::new(self.adjoint_exp_coords(&y.coeffs, &x.coeffs)))
    }

    /// Checks every structural invariant exactly.
    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// An element of the algebra in the adapted basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgVector {
    pub coeffs: Vec<Rational>,
}

impl AlgVector {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &AlgVector) -> AlgVector {
        AlgVector::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &AlgVector) -> AlgVector {
        AlgVector::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, q: &Rational) -> AlgVector {
        AlgVector::new(self.coeffs.iter().map(|a| a * q).collect())
    }

    pub fn neg(&self) -> AlgVector {
        AlgVector::new(self.coeffs.iter().map(|a| -a).collect())
    }

    /// Smallest layer with a nonzero component.
    pub fn min_layer(&self, weights: &[u32]) -> Option<u32> {
        self.coeffs
            .iter()
            .zip(weights)
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, &w)| w)
            .min()
    }

    /// Largest layer with a nonzero component.
    pub fn max_layer(&self, weights: &[u32]) -> Option<u32> {
        self.coeffs
            .iter()
            .zip(weights)
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, &w)| w)
            .max()
    }

    /// Component in layer `w` (other coordinates zeroed).
    pub fn layer_part(&self, weights: &[u32], w: u32) -> AlgVector {
        AlgVector::new(
            self.coeffs
                .iter()
                .zip(weights)
                .map(|(c, &wi)| if wi == w { c.clone() } else { Rational::zero() })
                .collect(),
        )
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// First violating basis triple (one based), when the check failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

impl Check {
    fn ok() -> Self {
        Self {
            pass: true,
            witness: None,
        }
    }

    fn fail(w: Vec<usize>) -> Self {
        Self {
            pass: false,
            witness: Some(w.into_iter().map(|i| i + 1).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub antisymmetry: Check,
    pub jacobi: Check,
    pub grading: Check,
    pub generation: Check,
    pub nilpotency: Check,
    pub step: usize,
    pub homogeneous_dim: u32,
    pub horizontal_dim: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry.pass && self.jacobi.pass && self.grading.pass && self.generation.pass && self.nilpotency.pass
    }
}

fn validate(a: &StratifiedAlgebra) -> ValidationReport {
    let n = a.dim();
    let w = a.weights();
    let s = a.step();

    let antisymmetry = match a.antisymmetry_defects.first() {
        Some(&(i, j, k)) => Check::fail(vec![i, j, k]),
        None => Check::ok(),
    };

    let mut jacobi = Check::ok();
    'outer: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (x, y, z) = (a.basis(i), a.basis(j), a.basis(k));
                let t1 = a.bracket_coords(&x.coeffs, &a.bracket_coords(&y.coeffs, &z.coeffs));
                let t2 = a.bracket_coords(&y.coeffs, &a.bracket_coords(&z.coeffs, &x.coeffs));
                let t3 = a.bracket_coords(&z.coeffs, &a.bracket_coords(&x.coeffs, &y.coeffs));
                if t1.iter().zip(&t2).zip(&t3).any(|((p, q), r)| !(p + q + r).is_zero()) {
                    jacobi = Check::fail(vec![i, j, k]);
                    break 'outer;
                }
            }
        }
    }

    // Layers must be nondecreasing and start at 1.
    let mut grading = Check::ok();
    if w[0] != 1 || w.windows(2).any(|p| p[1] < p[0]) {
        let bad = w.windows(2).position(|p| p[1] < p[0]).map(|p| p + 1).unwrap_or(0);
        grading = Check::fail(vec![bad]);
    } else if let Some(sc) = a.constants().iter().find(|sc| w[sc.k] != w[sc.i] + w[sc.j]) {
        grading = Check::fail(vec![sc.i, sc.j, sc.k]);
    }

    // [V_j, V_1] = V_{j+1} for 1 <= j < s; every layer up to s is nonempty.
    let mut generation = Check::ok();
    for layer in 1..=s as u32 {
        if a.layer_indices(layer).is_empty() {
            generation = Check::fail(vec![]);
            break;
        }
    }
    if generation.pass {
        for j in 1..s as u32 {
            let mut vecs = Vec::new();
            for &p in &a.layer_indices(j) {
                for &q in &a.layer_indices(1) {
                    vecs.push(a.bracket(&a.basis(p), &a.basis(q)).expect("basis"));
                }
            }
            let got = Subspace::span(n, &vecs);
            let want_vecs: Vec<AlgVector> = a.layer_indices(j + 1).into_iter().map(|i| a.basis(i)).collect();
            let want = Subspace::span(n, &want_vecs);
            if got != want {
                let first = a.layer_indices(j + 1)[0];
                generation = Check::fail(vec![first]);
                break;
            }
        }
    }

    // Lower central series reaches zero after at most s steps.
    let mut nilpotency = Check::ok();
    let mut current: Vec<AlgVector> = (0..n).map(|i| a.basis(i)).collect();
    for _ in 0..s {
        let mut next = Vec::new();
        for i in 0..n {
            for v in &current {
                let b = a.bracket(&a.basis(i), v).expect("basis");
                if !b.is_zero() {
                    next.push(b);
                }
            }
        }
        current = Subspace::span(n, &next).basis().to_vec();
    }
    if let Some(v) = current.first() {
        let k = v.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
        nilpotency = Check::fail(vec![k]);
    }

    ValidationReport {
        antisymmetry,
        jacobi,
        grading,
        generation,
        nilpotency,
        step: s,
        homogeneous_dim: a.homogeneous_dim(),
        horizontal_dim: a.horizontal_dim(),
    }
}
