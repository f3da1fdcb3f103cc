//! Nilpotent Lie algebras as rational models of nilpotent fundamental groups.
//!
//! Structure constants are stored densely and antisymmetrically, with
//! `[X_i, X_j] = Σ_k c[i][j][k] X_k`. Cochains on the Chevalley–Eilenberg
//! complex reuse [`Multivector`] in dimension `m`, with `ξ_i` as the blade
//! `e_{i+1}`.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{binomial, blades_of_degree, Blade, ExteriorError, Multivector, MAX_DIM};
use crate::linalg::{self, Echelon};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NilError {
    #[error("bracket index out of range or repeated: [{0}, {1}]")]
    BadIndex(usize, usize),
    #[error("Lie algebra dimension {0} is out of range 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("Jacobi identity fails on ({0}, {1}, {2})")]
    Jacobi(usize, usize, usize),
    #[error("lower central series stabilizes at dimension {0}; not nilpotent")]
    NotNilpotent(usize),
    #[error("d² ≠ 0 on a degree-{0} cochain; structure constants are inconsistent")]
    DSquaredNonzero(usize),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilLieAlgebra {
    m: usize,
    c: Vec<Vec<Vec<Rational>>>,
}

/// Bracket entry `[X_i, X_j] ∋ coeff · X_k`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub coeff: Rational,
}

impl NilLieAlgebra {
    /// Builds the algebra from bracket entries. Entries with `i > j` are
    /// accepted and stored with the antisymmetric sign; repeated entries add.
    /// Jacobi and nilpotency are checked separately.
    pub fn new(m: usize, brackets: &[Bracket]) -> Result<Self, NilError> {
        if m == 0 || m > MAX_DIM {
            return Err(NilError::BadDimension(m));
        }
        let mut c = vec![vec![vec![Rational::zero(); m]; m]; m];
        for b in brackets {
            if b.i == b.j || b.i >= m || b.j >= m || b.k >= m {
                return Err(NilError::BadIndex(b.i, b.j));
            }
            c[b.i][b.j][b.k] += &b.coeff;
            c[b.j][b.i][b.k] -= &b.coeff;
        }
        Ok(Self { m, c })
    }

    pub fn abelian(m: usize) -> Self {
        Self::new(m, &[]).expect("valid dimension")
    }

    /// `[X, Y] = Z` on the basis (X, Y, Z).
    pub fn heisenberg() -> Self {
        Self::new(
            3,
            &[Bracket {
                i: 0,
                j: 1,
                k: 2,
                coeff: Rational::one(),
            }],
        )
        .expect("valid")
    }

    /// `[X₁, X_i] = X_{i+1}` for 2 ≤ i < m.
    pub fn filiform(m: usize) -> Self {
        let brackets: Vec<Bracket> = (1..m.saturating_sub(1))
            .map(|i| Bracket {
                i: 0,
                j: i,
                k: i + 1,
                coeff: Rational::one(),
            })
            .collect();
        Self::new(m, &brackets).expect("valid")
    }

    /// Direct sum with an abelian algebra of dimension `extra`.
    pub fn plus_abelian(&self, extra: usize) -> Self {
        let m = self.m + extra;
        let mut c = vec![vec![vec![Rational::zero(); m]; m]; m];
        for i in 0..self.m {
            for j in 0..self.m {
                for k in 0..self.m {
                    c[i][j][k] = self.c[i][j][k].clone();
                }
            }
        }
        Self { m, c }
    }

    /// The same algebra written in the basis `Y_a = Σ_i p[i][a] X_i`.
    /// `p` must be invertible.
    pub fn change_basis(&self, p: &[Vec<Rational>]) -> Self {
        let m = self.m;
        let inv = invert(p).expect("change of basis must be invertible");
        let mut c = vec![vec![vec![Rational::zero(); m]; m]; m];
        for a in 0..m {
            for b in 0..m {
                let ya: Vec<Rational> = (0..m).map(|i| p[i][a].clone()).collect();
                let yb: Vec<Rational> = (0..m).map(|i| p[i][b].clone()).collect();
                let br = self.bracket(&ya, &yb);
                for (k, row) in inv.iter().enumerate() {
                    c[a][b][k] = row.iter().zip(&br).map(|(x, y)| x * y).sum();
                }
            }
        }
        Self { m, c }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[i][j][k]
    }

    /// Nonzero entries with `i < j`.
    pub fn brackets(&self) -> Vec<Bracket> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                for k in 0..self.m {
                    if !self.c[i][j][k].is_zero() {
                        out.push(Bracket {
                            i,
                            j,
                            k,
                            coeff: self.c[i][j][k].clone(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().flatten().flatten().all(Zero::is_zero)
    }

    pub fn bracket(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.m];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() || i == j {
                    continue;
                }
                let s = ui * vj;
                for (o, c) in out.iter_mut().zip(&self.c[i][j]) {
                    if !c.is_zero() {
                        *o += &s * c;
                    }
                }
            }
        }
        out
    }

    fn unit(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.m];
        v[i] = Rational::one();
        v
    }

    /// First triple (i < j < l) where the Jacobi sum is nonzero.
    pub fn jacobi_violation(&self) -> Option<(usize, usize, usize)> {
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                for l in (j + 1)..self.m {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(l));
                    let a = self.bracket(&self.bracket(&x, &y), &z);
                    let b = self.bracket(&self.bracket(&y, &z), &x);
                    let c = self.bracket(&self.bracket(&z, &x), &y);
                    if a.iter().zip(&b).zip(&c).any(|((p, q), r)| !(p + q + r).is_zero()) {
                        return Some((i, j, l));
                    }
                }
            }
        }
        None
    }

    pub fn jacobi_check(&self) -> bool {
        self.jacobi_violation().is_none()
    }

    fn require_jacobi(&self) -> Result<(), NilError> {
        match self.jacobi_violation() {
            Some((i, j, l)) => Err(NilError::Jacobi(i, j, l)),
            None => Ok(()),
        }
    }

    /// Bases of γ₁ = g ⊇ γ₂ = [g, g] ⊇ … down to and including 0.
    pub fn lower_central_subspaces(&self) -> Result<Vec<Echelon>, NilError> {
        self.require_jacobi()?;
        let mut full = Echelon::new(self.m);
        for i in 0..self.m {
            full.insert(&self.unit(i));
        }
        let mut series = vec![full];
        loop {
            let last = series.last().expect("nonempty");
            if last.rank() == 0 {
                return Ok(series);
            }
            let mut next = Echelon::new(self.m);
            for v in last.rows() {
                for i in 0..self.m {
                    next.insert(&self.bracket(v, &self.unit(i)));
                }
            }
            if next.rank() == last.rank() {
                return Err(NilError::NotNilpotent(next.rank()));
            }
            series.push(next);
        }
    }

    /// `[dim γ₁, dim γ₂, …, 0]`.
    pub fn lower_central_series(&self) -> Result<Vec<usize>, NilError> {
        Ok(self.lower_central_subspaces()?.iter().map(Echelon::rank).collect())
    }

    pub fn nilpotency_class(&self) -> Result<usize, NilError> {
        Ok(self.lower_central_series()?.len() - 1)
    }

    /// Σ_k k·(dim γ_k − dim γ_{k+1}).
    pub fn bass_growth_degree(&self) -> Result<usize, NilError> {
        let dims = self.lower_central_series()?;
        Ok(dims.windows(2).enumerate().map(|(k, w)| (k + 1) * (w[0] - w[1])).sum())
    }

    /// dξ_k = −Σ_{i<j} c^k_{ij} ξ_i∧ξ_j.
    pub fn d_one_form(&self, k: usize) -> Multivector {
        let mut terms = Vec::new();
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                let c = &self.c[i][j][k];
                if !c.is_zero() {
                    terms.push((Blade::from_mask((1 << i) | (1 << j)), -c.clone()));
                }
            }
        }
        Multivector::from_terms(self.m, terms)
    }

    pub fn ce_differential(&self) -> Result<CEComplex, NilError> {
        self.require_jacobi()?;
        let m = self.m;
        let d1: Vec<Multivector> = (0..m).map(|k| self.d_one_form(k)).collect();
        let mut images = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut col = Vec::new();
            for blade in blades_of_degree(m, k) {
                col.push(derivation(m, blade, &d1)?.coordinates(k + 1));
            }
            images.push(col);
        }
        let complex = CEComplex { m, images };
        for k in 0..m {
            for blade in blades_of_degree(m, k) {
                let once = complex.apply(&Multivector::from_blade(m, blade, Rational::one()));
                if !complex.apply(&once).is_zero() {
                    return Err(NilError::DSquaredNonzero(k));
                }
            }
        }
        Ok(complex)
    }

    pub fn lie_cohomology_dims(&self) -> Result<Vec<usize>, NilError> {
        Ok(self.ce_differential()?.betti_numbers())
    }

    /// Kernel of H²(g/γ₂) → H²(g/γ₃) induced by the projection, compared
    /// with dim γ₂ − dim γ₃.
    pub fn nomizu_kernel(&self) -> Result<NomizuReport, NilError> {
        let series = self.lower_central_subspaces()?;
        let dims: Vec<usize> = series.iter().map(Echelon::rank).collect();
        if self.is_abelian() {
            return Ok(NomizuReport {
                kernel_dim: 0,
                expected: 0,
                abelian: true,
            });
        }
        let (q1, cols1) = self.quotient(&series[1]);
        let (q2, cols2) = self.quotient(&series[2]);
        // projection q2 → q1 in the chosen complements
        let proj: Vec<Vec<Rational>> = cols2
            .iter()
            .map(|&c| {
                let r = series[1].reduce(&self.unit(c));
                cols1.iter().map(|&a| r[a].clone()).collect()
            })
            .collect();
        let (m1, m2) = (q1.dim(), q2.dim());
        // pullback of ξ^{q1}_a is Σ_c proj[c][a] ξ^{q2}_c
        let pull: Vec<Multivector> = (0..m1)
            .map(|a| Multivector::from_terms(m2, (0..m2).map(|c| (Blade::from_mask(1 << c), proj[c][a].clone()))))
            .collect();
        let mut pulled = Echelon::new(binomial(m2, 2) as usize);
        for a in 0..m1 {
            for b in (a + 1)..m1 {
                pulled.insert(&pull[a].wedge(&pull[b])?.coordinates(2));
            }
        }
        let complex2 = q2.ce_differential()?;
        let exact: Vec<Vec<Rational>> = complex2.images[1].clone();
        let mut both = pulled.clone();
        for v in &exact {
            both.insert(v);
        }
        let exact_rank = linalg::rank(&exact, binomial(m2, 2) as usize);
        let kernel_dim = pulled.rank() + exact_rank - both.rank();
        Ok(NomizuReport {
            kernel_dim,
            expected: dims[1] - dims[2],
            abelian: false,
        })
    }

    /// g/h for an ideal h, on the complement spanned by the non-pivot basis
    /// vectors of h's echelon form. Returns the quotient and those indices.
    pub fn quotient(&self, h: &Echelon) -> (NilLieAlgebra, Vec<usize>) {
        let pivots: Vec<usize> = h.pivots().collect();
        let cols: Vec<usize> = (0..self.m).filter(|c| !pivots.contains(c)).collect();
        let q = cols.len();
        let mut c = vec![vec![vec![Rational::zero(); q]; q]; q];
        for (a, &ca) in cols.iter().enumerate() {
            for (b, &cb) in cols.iter().enumerate() {
                let r = h.reduce(&self.c[ca][cb]);
                for (k, &ck) in cols.iter().enumerate() {
                    c[a][b][k] = r[ck].clone();
                }
            }
        }
        (NilLieAlgebra { m: q, c }, cols)
    }

    /// Ranks in each degree of the subalgebra of H*(g) generated by H¹(g).
    pub fn degree_one_cohomology_subalgebra(&self) -> Result<Vec<usize>, NilError> {
        let complex = self.ce_differential()?;
        let m = self.m;
        // closed 1-forms: kernel of the m × C(m,2) matrix of d on Λ¹
        let w2 = binomial(m, 2) as usize;
        let rows: Vec<Vec<Rational>> = (0..w2)
            .map(|r| (0..m).map(|c| complex.images[1][c][r].clone()).collect())
            .collect();
        let cocycles: Vec<Multivector> = linalg::kernel(&rows, m)
            .into_iter()
            .map(|v| Multivector::from_coordinates(m, 1, &v))
            .collect();
        let k = cocycles.len();
        let mut ranks = vec![1];
        let mut level: Vec<Multivector> = vec![Multivector::one(m)];
        for j in 1..=m {
            let width = binomial(m, j) as usize;
            let mut exact = Echelon::new(width);
            for v in &complex.images[j - 1] {
                exact.insert(v);
            }
            let base = exact.rank();
            let mut next = Vec::new();
            let mut span = exact.clone();
            for a in &level {
                for x in &cocycles {
                    let p = a.wedge(x)?;
                    if span.insert(&p.coordinates(j)) {
                        next.push(p);
                    }
                }
            }
            ranks.push(span.rank() - base);
            if next.is_empty() || j >= k {
                ranks.extend(std::iter::repeat(0).take(m - j));
                break;
            }
            level = next;
        }
        Ok(ranks)
    }

    pub fn pi1_verdict(&self, n: usize) -> Result<Pi1Verdict, NilError> {
        let growth_degree = self.bass_growth_degree()?;
        let class = self.nilpotency_class()?;
        let abelian = self.is_abelian();
        let mut reasons = Vec::new();
        if growth_degree > n {
            reasons.push(format!(
                "growth of π₁ has degree {growth_degree} > {n}, but π₁ of an elliptic n-manifold grows as O(R^n)"
            ));
        }
        if !abelian {
            reasons.push(format!(
                "π₁ is nilpotent of class {class}, not virtually abelian as required for closed elliptic manifolds"
            ));
        }
        Ok(Pi1Verdict {
            growth_degree,
            nilpotency_class: class,
            abelian,
            class_within_open_bound: class < n.max(1),
            sqrt_heuristic: (class as f64) <= (n as f64).sqrt(),
            pass: reasons.is_empty(),
            reasons,
        })
    }
}

/// d on a wedge of basis 1-forms, as a graded derivation.
fn derivation(m: usize, blade: Blade, d1: &[Multivector]) -> Result<Multivector, ExteriorError> {
    let idx = blade.indices();
    let mut out = Multivector::zero(m);
    for s in 0..idx.len() {
        let mut term = Multivector::one(m);
        for (t, &i) in idx.iter().enumerate() {
            let factor = if t == s {
                d1[i - 1].clone()
            } else {
                Multivector::from_blade(m, Blade::from_mask(1 << (i - 1)), Rational::one())
            };
            term = term.wedge(&factor)?;
        }
        out = if s % 2 == 0 { &out + &term } else { &out - &term };
    }
    Ok(out)
}

fn invert(p: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let m = p.len();
    let cols: Vec<Vec<Rational>> = (0..m).map(|j| (0..m).map(|i| p[i][j].clone()).collect()).collect();
    let mut inv = vec![vec![Rational::zero(); m]; m];
    for i in 0..m {
        let mut e = vec![Rational::zero(); m];
        e[i] = Rational::one();
        let x = linalg::solve_in_span(&cols, &e)?;
        for (k, v) in x.into_iter().enumerate() {
            inv[k][i] = v;
        }
    }
    Some(inv)
}

/// Chevalley–Eilenberg complex: `images[k]` lists d of each degree-k blade,
/// as coordinates on the degree k+1 blades.
#[derive(Clone, Debug)]
pub struct CEComplex {
    m: usize,
    images: Vec<Vec<Vec<Rational>>>,
}

impl CEComplex {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn apply(&self, form: &Multivector) -> Multivector {
        let mut out = Multivector::zero(self.m);
        for k in 0..=self.m {
            let coords = form.coordinates(k);
            for (i, c) in coords.iter().enumerate() {
                if c.is_zero() || k == self.m {
                    continue;
                }
                let img = Multivector::from_coordinates(self.m, k + 1, &self.images[k][i]);
                out = &out + &img.scale(c);
            }
        }
        out
    }

    pub fn rank(&self, k: usize) -> usize {
        if k >= self.m {
            return 0;
        }
        linalg::rank(&self.images[k], binomial(self.m, k + 1) as usize)
    }

    pub fn betti_numbers(&self) -> Vec<usize> {
        (0..=self.m)
            .map(|k| {
                let dim = binomial(self.m, k) as usize;
                let kernel = dim - self.rank(k);
                let boundary = if k == 0 { 0 } else { self.rank(k - 1) };
                kernel - boundary
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NomizuReport {
    pub kernel_dim: usize,
    pub expected: usize,
    pub abelian: bool,
}

impl NomizuReport {
    pub fn matches(&self) -> bool {
        self.kernel_dim == self.expected
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi1Verdict {
    pub growth_degree: usize,
    pub nilpotency_class: usize,
    pub abelian: bool,
    /// Class at most n − 1, the bound used for open manifolds.
    pub class_within_open_bound: bool,
    /// Informational only: class ≲ √n.
    pub sqrt_heuristic: bool,
    pub pass: bool,
    pub reasons: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn jacobi_examples() {
        assert!(NilLieAlgebra::abelian(3).jacobi_check());
        assert!(NilLieAlgebra::heisenberg().jacobi_check());
        // h₃ with [X,Z] = Y added: every Jacobi sum has a factor [Y,Z] = 0 or
        // [Z,Z] = 0, so the identity holds, but ad X swaps Y and Z
        let swapped = NilLieAlgebra::new(
            3,
            &[
                Bracket {
                    i: 0,
                    j: 1,
                    k: 2,
                    coeff: q(1),
                },
                Bracket {
                    i: 0,
                    j: 2,
                    k: 1,
                    coeff: q(1),
                },
            ],
        )
        .unwrap();
        assert!(swapped.jacobi_check());
        assert_eq!(swapped.lower_central_series(), Err(NilError::NotNilpotent(2)));
        // [X₁,X₂] = X₃, [X₃,X₄] = X₁: [[X₁,X₂],X₄] = X₁, the other two terms vanish
        let broken = NilLieAlgebra::new(
            4,
            &[
                Bracket {
                    i: 0,
                    j: 1,
                    k: 2,
                    coeff: q(1),
                },
                Bracket {
                    i: 2,
                    j: 3,
                    k: 0,
                    coeff: q(1),
                },
            ],
        )
        .unwrap();
        assert_eq!(broken.jacobi_violation(), Some((0, 1, 3)));
        assert!(matches!(broken.ce_differential(), Err(NilError::Jacobi(..))));
    }

    #[test]
    fn lower_central_series_examples() {
        assert_eq!(NilLieAlgebra::abelian(3).lower_central_series().unwrap(), vec![3, 0]);
        assert_eq!(
            NilLieAlgebra::heisenberg().lower_central_series().unwrap(),
            vec![3, 1, 0]
        );
        assert_eq!(
            NilLieAlgebra::filiform(4).lower_central_series().unwrap(),
            vec![4, 2, 1, 0]
        );
        // sl2-like: [H,E]=2E, [H,F]=−2F, [E,F]=H
        let sl2 = NilLieAlgebra::new(
            3,
            &[
                Bracket {
                    i: 0,
                    j: 1,
                    k: 1,
                    coeff: q(2),
                },
                Bracket {
                    i: 0,
                    j: 2,
                    k: 2,
                    coeff: q(-2),
                },
                Bracket {
                    i: 1,
                    j: 2,
                    k: 0,
                    coeff: q(1),
                },
            ],
        )
        .unwrap();
        assert!(sl2.jacobi_check());
        assert_eq!(sl2.lower_central_series(), Err(NilError::NotNilpotent(3)));
    }

    #[test]
    fn ce_differential_examples() {
        let h = NilLieAlgebra::heisenberg();
        assert!(h.d_one_form(0).is_zero());
        assert!(h.d_one_form(1).is_zero());
        assert_eq!(h.d_one_form(2), -&Multivector::basis(3, &[1, 2]).unwrap());
        let f = NilLieAlgebra::filiform(4);
        assert_eq!(f.d_one_form(2), -&Multivector::basis(4, &[1, 2]).unwrap());
        assert_eq!(f.d_one_form(3), -&Multivector::basis(4, &[1, 3]).unwrap());
        assert!(NilLieAlgebra::abelian(4).ce_differential().unwrap().betti_numbers() == vec![1, 4, 6, 4, 1]);
        assert_eq!(h.lie_cohomology_dims().unwrap(), vec![1, 2, 2, 1]);
        assert_eq!(f.lie_cohomology_dims().unwrap(), vec![1, 2, 2, 2, 1]);
    }

    #[test]
    fn nomizu_and_growth_examples() {
        let h = NilLieAlgebra::heisenberg();
        assert_eq!(
            h.nomizu_kernel().unwrap(),
            NomizuReport {
                kernel_dim: 1,
                expected: 1,
                abelian: false
            }
        );
        assert!(NilLieAlgebra::abelian(3).nomizu_kernel().unwrap().abelian);
        let f = NilLieAlgebra::filiform(4);
        assert_eq!(f.nomizu_kernel().unwrap().kernel_dim, 1);
        assert_eq!(NilLieAlgebra::abelian(5).bass_growth_degree().unwrap(), 5);
        assert_eq!(h.bass_growth_degree().unwrap(), 4);
        assert_eq!(f.bass_growth_degree().unwrap(), 7);
    }

    #[test]
    fn pi1_verdicts() {
        assert!(NilLieAlgebra::abelian(3).pi1_verdict(3).unwrap().pass);
        assert!(!NilLieAlgebra::heisenberg().pi1_verdict(3).unwrap().pass);
        let v = NilLieAlgebra::abelian(5).pi1_verdict(4).unwrap();
        assert!(!v.pass);
        assert_eq!(v.growth_degree, 5);
    }

    #[test]
    fn degree_one_subalgebra_is_free_only_when_abelian() {
        assert_eq!(
            NilLieAlgebra::abelian(3).degree_one_cohomology_subalgebra().unwrap(),
            vec![1, 3, 3, 1]
        );
        // ξ_X ∧ ξ_Y is exact in h₃
        assert_eq!(
            NilLieAlgebra::heisenberg().degree_one_cohomology_subalgebra().unwrap(),
            vec![1, 2, 0, 0]
        );
    }
}
