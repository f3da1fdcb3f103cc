//! Exact linear algebra over the rationals.
//!
//! Everything the obstruction checks decide (ranks, kernels, ideal membership)
//! goes through these routines, so there is no floating point here.

use num_traits::{One, Zero};

use crate::Rational;

/// Incrementally built row echelon form.
///
/// Rows are kept fully reduced against each other, so `reduce` returns the
/// canonical remainder of a vector modulo the span.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    width: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    /// Remainder of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let mut out = v.to_vec();
        for (pivot, row) in &self.rows {
            if out[*pivot].is_zero() {
                continue;
            }
            let factor = out[*pivot].clone();
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o -= &factor * r;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` to the span. Returns `false` (and leaves the span unchanged)
    /// when `v` was already in it.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut r = self.reduce(v);
        let Some(pivot) = r.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = r[pivot].recip();
        for c in r.iter_mut() {
            *c *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let factor = row[pivot].clone();
            for (o, x) in row.iter_mut().zip(&r) {
                if !x.is_zero() {
                    *o -= &factor * x;
                }
            }
        }
        self.rows.push((pivot, r));
        true
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.rows.iter().map(|(_, r)| r.as_slice())
    }
}

/// Rank of a list of row vectors of common width.
pub fn rank(rows: &[Vec<Rational>], width: usize) -> usize {
    let mut e = Echelon::new(width);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of `{v : M v = 0}` where `M` is given by its rows.
pub fn kernel(rows: &[Vec<Rational>], width: usize) -> Vec<Vec<Rational>> {
    let mut e = Echelon::new(width);
    for r in rows {
        e.insert(r);
    }
    let pivots: Vec<(usize, &[Rational])> = e.rows.iter().map(|(p, r)| (*p, r.as_slice())).collect();
    let is_pivot = {
        let mut flags = vec![false; width];
        for (p, _) in &pivots {
            flags[*p] = true;
        }
        flags
    };
    (0..width)
        .filter(|c| !is_pivot[*c])
        .map(|free| {
            let mut v = vec![Rational::zero(); width];
            v[free] = Rational::one();
            for (p, row) in &pivots {
                v[*p] = -row[free].clone();
            }
            v
        })
        .collect()
}

/// Coordinates of `v` in the (independent) family `basis`, or `None` when
/// `v` is not in their span.
pub fn solve_in_span(basis: &[Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    let width = v.len();
    let k = basis.len();
    // Augmented transpose: unknowns are the k coefficients.
    let mut rows: Vec<Vec<Rational>> = (0..width)
        .map(|i| {
            let mut row: Vec<Rational> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut coeffs = vec![Rational::zero(); k];
    for (i, c) in pivot_cols.iter().enumerate() {
        coeffs[*c] = rows[i][k].clone();
    }
    Some(coeffs)
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            let pivot_row = a[c].clone();
            for (x, y) in a[i].iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * y;
            }
        }
    }
    det
}
