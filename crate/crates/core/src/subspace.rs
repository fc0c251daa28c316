//! Exact linear algebra: subspaces of the algebra in reduced row-echelon
//! form, so that subspace equality is row equality.

use num_traits::{One, Zero};

use crate::algebra::AlgVector;
use crate::ring::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<AlgVector>,
    pivots: Vec<usize>,
}

/// Reduces `rows` in place to RREF and returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{v : M v = 0}` for a matrix given by rows.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let rows: Vec<AlgVector> = (0..ambient)
            .map(|i| {
                let mut c = vec![Rational::zero(); ambient];
                c[i] = Rational::one();
                AlgVector::new(c)
            })
            .collect();
        Self {
            ambient,
            rows,
            pivots: (0..ambient).collect(),
        }
    }

    pub fn span(ambient: usize, vectors: &[AlgVector]) -> Self {
        let mut rows: Vec<Vec<Rational>> = vectors
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.coeffs.clone())
            .collect();
        let pivots = rref(&mut rows, ambient);
        Self {
            ambient,
            rows: rows.into_iter().map(AlgVector::new).collect(),
            pivots,
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.rows.len()
    }

    pub fn basis(&self) -> &[AlgVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `v` minus its reduction against the RREF rows; zero iff `v` is in
    /// the subspace.
    pub fn residual(&self, v: &AlgVector) -> AlgVector {
        let mut r = v.coeffs.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (x, y) in r.iter_mut().zip(&row.coeffs) {
                    *x -= &f * y;
                }
            }
        }
        AlgVector::new(r)
    }

    pub fn contains(&self, v: &AlgVector) -> bool {
        self.residual(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn join(&self, other: &Subspace) -> Subspace {
        let mut v = self.rows.clone();
        v.extend(other.rows.iter().cloned());
        Subspace::span(self.ambient, &v)
    }

    pub fn with_vector(&self, v: &AlgVector) -> Subspace {
        let mut rows = self.rows.clone();
        rows.push(v.clone());
        Subspace::span(self.ambient, &rows)
    }

    /// Intersection with the coordinate subspace spanned by `indices`.
    pub fn intersect_coordinates(&self, indices: &[usize]) -> Subspace {
        // v = sum a_r row_r must vanish outside `indices`.
        let outside: Vec<usize> = (0..self.ambient).filter(|i| !indices.contains(i)).collect();
        let k = self.rows.len();
        let eqs: Vec<Vec<Rational>> = outside
            .iter()
            .map(|&c| self.rows.iter().map(|r| r.coeffs[c].clone()).collect())
            .collect();
        let sols = nullspace(&eqs, k);
        let vecs: Vec<AlgVector> = sols
            .iter()
            .map(|a| {
                let mut c = vec![Rational::zero(); self.ambient];
                for (ai, row) in a.iter().zip(&self.rows) {
                    for (x, y) in c.iter_mut().zip(&row.coeffs) {
                        *x += ai * y;
                    }
                }
                AlgVector::new(c)
            })
            .collect();
        Subspace::span(self.ambient, &vecs)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.to_strings()).collect()
    }
}
