//! Exact arithmetic in the exterior algebra Λ*ℚⁿ.
//!
//! Basis blades are bitmasks over `1..=n` (bit `i - 1` is index `i`), so the
//! ambient dimension is capped at [`MAX_DIM`]. The sign of a product of two
//! blades is the parity of the permutation that merges their index lists.
//!
//! Koszul convention used throughout the crate: moving an odd-degree element
//! past another odd-degree element costs a factor of −1, even-degree elements
//! are central.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Generator, GradedPolynomial};
use crate::Rational;

pub const MAX_DIM: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ambient dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("blade index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("blade indices must be strictly increasing")]
    UnsortedIndices,
    #[error("degree {k} out of range 0..={n}")]
    DegreeOutOfRange { k: usize, n: usize },
    #[error("no multivector assigned to generator `{0}`")]
    MissingGenerator(String),
    #[error("generator `{name}` has degree {expected} but its image is not pure of that degree")]
    DegreeMismatch { name: String, expected: u32 },
}

/// A basis element e_{i₁…i_k} of Λ*ℝⁿ, stored as a bitmask.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Blade(u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// Builds a blade from strictly increasing 1-based indices.
    pub fn new(indices: &[usize], n: usize) -> Result<Self, ExteriorError> {
        check_dim(n)?;
        let mut mask = 0u32;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(ExteriorError::IndexOutOfRange { index: i, n });
            }
            if i <= last {
                return Err(ExteriorError::UnsortedIndices);
            }
            last = i;
            mask |= 1 << (i - 1);
        }
        Ok(Blade(mask))
    }

    pub const fn from_mask(mask: u32) -> Self {
        Blade(mask)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    /// The top blade e_{1…n}.
    pub fn top(n: usize) -> Self {
        if n == 32 {
            Blade(u32::MAX)
        } else {
            Blade((1u32 << n) - 1)
        }
    }

    /// `Some(±1)` for `self ∧ other`, `None` when they share an index.
    pub fn wedge_sign(self, other: Blade) -> Option<i8> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Each index of `other` must move past every larger index of `self`.
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            swaps += (self.0 >> j).count_ones();
            b &= b - 1;
        }
        Some(if swaps % 2 == 0 { 1 } else { -1 })
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "e{{{}}}", idx.join(","))
    }
}

fn check_dim(n: usize) -> Result<(), ExteriorError> {
    if n > MAX_DIM {
        Err(ExteriorError::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// All blades of degree `k` in dimension `n`, in increasing mask order.
pub fn blades_of_degree(n: usize, k: usize) -> Vec<Blade> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(Blade(idx.iter().fold(0u32, |m, &i| m | (1 << i))));
        // next combination in colex-free lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// dim Λᵏℝⁿ.
pub fn graded_dimension(n: usize, k: usize) -> Result<u64, ExteriorError> {
    if k > n {
        return Err(ExteriorError::DegreeOutOfRange { k, n });
    }
    Ok(binomial(n, k))
}

/// Sparse element of Λ*ℚⁿ. No stored coefficient is ever zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multivector {
    n: usize,
    terms: BTreeMap<Blade, Rational>,
}

impl Multivector {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::from_blade(n, Blade::SCALAR, Rational::one())
    }

    pub fn from_blade(n: usize, blade: Blade, coeff: Rational) -> Self {
        let mut m = Self::zero(n);
        assert!(blade.0 >> n == 0 || n == 32, "blade {blade} outside dimension {n}");
        if !coeff.is_zero() {
            m.terms.insert(blade, coeff);
        }
        m
    }

    /// e_{indices} with coefficient 1.
    pub fn basis(n: usize, indices: &[usize]) -> Result<Self, ExteriorError> {
        Ok(Self::from_blade(n, Blade::new(indices, n)?, Rational::one()))
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Blade, Rational)>,
    {
        let mut m = Self::zero(n);
        for (b, c) in terms {
            m.add_term(b, c);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, blade: Blade) -> Rational {
        self.terms.get(&blade).cloned().unwrap_or_else(Rational::zero)
    }

    /// The common degree of all terms, or `None` for zero / mixed elements.
    pub fn pure_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|b| b.degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, k: usize) -> bool {
        self.terms.keys().all(|b| b.degree() == k)
    }

    pub fn grade(&self, k: usize) -> Multivector {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.degree() == k)
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, blade: Blade, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(blade).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&blade);
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), ExteriorError> {
        if self.n != other.n {
            Err(ExteriorError::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExteriorError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(b, c)| (*b, c * s)).collect(),
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        self.check_same(other)?;
        let mut out = Self::zero(self.n);
        for (ba, ca) in &self.terms {
            for (bb, cb) in &other.terms {
                if let Some(sign) = ba.wedge_sign(*bb) {
                    let c = ca * cb;
                    out.add_term(Blade(ba.0 | bb.0), if sign > 0 { c } else { -c });
                }
            }
        }
        Ok(out)
    }

    /// The same element viewed in Λ*ℚᵐ for m ≥ n.
    pub fn extend_dim(&self, m: usize) -> Result<Self, ExteriorError> {
        check_dim(m)?;
        if m < self.n {
            return Err(ExteriorError::DimensionMismatch(self.n, m));
        }
        Ok(Self {
            n: m,
            terms: self.terms.clone(),
        })
    }

    /// Dense coordinates on the blades of degree `k`, in `blades_of_degree` order.
    pub fn coordinates(&self, k: usize) -> Vec<Rational> {
        blades_of_degree(self.n, k)
            .into_iter()
            .map(|b| self.coefficient(b))
            .collect()
    }

    pub fn from_coordinates(n: usize, k: usize, coords: &[Rational]) -> Self {
        Self::from_terms(n, blades_of_degree(n, k).into_iter().zip(coords.iter().cloned()))
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if b.0 == 0 {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{b}")?;
            } else {
                write!(f, "{abs}*{b}")?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        self.try_add(rhs).expect("dimension mismatch in Multivector addition")
    }
}

impl std::ops::Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        self.try_add(&-rhs)
            .expect("dimension mismatch in Multivector subtraction")
    }
}

impl std::ops::Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        Multivector {
            n: self.n,
            terms: self.terms.iter().map(|(b, c)| (*b, -c.clone())).collect(),
        }
    }
}

/// a ∧ b.
pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector, ExteriorError> {
    a.wedge(b)
}

/// Coefficient of e_{1…n} in a ∧ b.
pub fn top_pairing(a: &Multivector, b: &Multivector) -> Result<Rational, ExteriorError> {
    Ok(a.wedge(b)?.coefficient(Blade::top(a.n)))
}

/// Substitutes the assigned multivectors into `p`.
///
/// `assignment[i]` is the image of generator `i`; monomials are multiplied in
/// generator-table order, matching how [`GradedPolynomial`] stores them.
pub fn evaluate_polynomial(
    p: &GradedPolynomial,
    generators: &[Generator],
    assignment: &[Multivector],
) -> Result<Multivector, ExteriorError> {
    let Some(first) = assignment.first() else {
        return Err(ExteriorError::MissingGenerator(
            generators.first().map(|g| g.name.clone()).unwrap_or_default(),
        ));
    };
    let n = first.n;
    for (i, g) in generators.iter().enumerate() {
        let img = assignment
            .get(i)
            .ok_or_else(|| ExteriorError::MissingGenerator(g.name.clone()))?;
        img.check_same(first)?;
        if !img.is_homogeneous_of(g.degree as usize) {
            return Err(ExteriorError::DegreeMismatch {
                name: g.name.clone(),
                expected: g.degree,
            });
        }
    }
    let mut out = Multivector::zero(n);
    let mut powers: Vec<Vec<Multivector>> = vec![vec![Multivector::one(n)]; generators.len()];
    for (mono, coeff) in p.terms() {
        let mut prod = Multivector::one(n);
        for (i, &e) in mono.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let e = e as usize;
            while powers[i].len() <= e {
                let next = powers[i].last().unwrap().wedge(&assignment[i])?;
                powers[i].push(next);
            }
            prod = prod.wedge(&powers[i][e])?;
            if prod.is_zero() {
                break;
            }
        }
        out = &out + &prod.scale(coeff);
    }
    Ok(out)
}
