//! Finitely presented graded-commutative algebras.
//!
//! A presentation is a table of generators with positive degrees, a list of
//! homogeneous relations, a formal dimension `n` and a fundamental class of
//! degree `n`. Everything is decided degree by degree with exact linear
//! algebra: the degree-k part of the quotient is the span of the degree-k
//! monomials modulo all multiples `m·p_j` that land in degree k.
//!
//! Anticommutation of odd generators and `x² = 0` for odd `x` are built in
//! and must not be listed as relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{blades_of_degree, ExteriorError, Multivector};
use crate::linalg::{self, Echelon};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Self {
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Exponent vector over the generator table.
pub type Monomial = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator `{0}` must have positive degree")]
    ZeroDegree(String),
    #[error("generator `{0}` is listed twice")]
    DuplicateGenerator(String),
    #[error("odd generator `{0}` appears with exponent greater than 1")]
    OddExponent(String),
    #[error("monomial has {found} exponents but the table has {expected} generators")]
    ExponentLength { found: usize, expected: usize },
    #[error("polynomial is not homogeneous (degrees {0} and {1})")]
    Inhomogeneous(u64, u64),
    #[error("degree overflow")]
    DegreeOverflow,
    #[error("fundamental class has degree {found:?}, expected {expected}")]
    FundamentalClassDegree { found: Option<u64>, expected: u32 },
    #[error("formal dimension must be at least 1")]
    ZeroDimension,
    #[error("degenerate presentation: the fundamental class lies in the relation ideal")]
    DegeneratePresentation,
    #[error("relations do not force vanishing in degree {degree} (rank {rank}) and truncation is off")]
    NotVanishingAboveTop { degree: u32, rank: usize },
    #[error("the algebra does not satisfy Poincaré duality (degree {0})")]
    NotPoincareDuality(usize),
    #[error("the element must be nonzero")]
    ZeroElement,
    #[error("element is not in the subalgebra or has the wrong degree")]
    NotInSubalgebra,
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Parse(#[from] PolyParseError),
}

/// Error from [`GradedPolynomial::parse`], with a byte offset into the input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at offset {offset}")]
pub struct PolyParseError {
    pub offset: usize,
    pub kind: PolyParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyParseErrorKind {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed rational literal `{0}`")]
    MalformedRational(String),
    #[error("odd generator `{0}` raised to a power above 1")]
    OddExponent(String),
    #[error("exponent or degree overflow")]
    DegreeOverflow,
    #[error("polynomial is not homogeneous")]
    Inhomogeneous,
    #[error("unexpected {0}")]
    Unexpected(String),
}

/// Product of two monomials under the Koszul convention.
///
/// Returns `None` when an odd generator would appear twice.
pub fn multiply_monomials(a: &[u32], b: &[u32], gens: &[Generator]) -> Option<(bool, Monomial)> {
    let mut negative = false;
    for (j, g) in gens.iter().enumerate() {
        if !g.is_odd() {
            continue;
        }
        if a[j] + b[j] > 1 {
            return None;
        }
        if b[j] == 1 {
            // b's x_j moves left past every odd x_i of a with i > j
            let passed = gens[j + 1..]
                .iter()
                .zip(&a[j + 1..])
                .filter(|(gi, &e)| gi.is_odd() && e == 1)
                .count();
            negative ^= passed % 2 == 1;
        }
    }
    Some((negative, a.iter().zip(b).map(|(x, y)| x + y).collect()))
}

pub fn monomial_degree(m: &[u32], gens: &[Generator]) -> Option<u64> {
    m.iter().zip(gens).try_fold(0u64, |acc, (&e, g)| {
        acc.checked_add((e as u64).checked_mul(g.degree as u64)?)
    })
}

/// All nonvanishing monomials of total degree `k`, in lexicographic order.
pub fn monomials_of_degree(gens: &[Generator], k: u64) -> Vec<Monomial> {
    fn go(gens: &[Generator], i: usize, left: u64, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if i == gens.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let d = gens[i].degree as u64;
        let max = if gens[i].is_odd() { 1 } else { left / d };
        for e in 0..=max.min(left / d) {
            cur[i] = e as u32;
            go(gens, i + 1, left - e * d, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if gens.iter().all(|g| g.degree > 0) {
        go(gens, 0, k, &mut vec![0; gens.len()], &mut out);
    }
    out
}

/// A homogeneous-or-not polynomial in the generators, stored by exponent
/// vector in table order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl GradedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(exponents: Monomial, coeff: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(exponents, coeff);
        p
    }

    pub fn one(ngens: usize) -> Self {
        Self::monomial(vec![0; ngens], Rational::one())
    }

    pub fn generator(i: usize, ngens: usize) -> Self {
        let mut e = vec![0; ngens];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &[u32]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self, gens: &[Generator]) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((neg, m)) = multiply_monomials(a, b, gens) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// Checks exponents against the table: right length, odd exponents ≤ 1.
    pub fn validate(&self, gens: &[Generator]) -> Result<(), AlgebraError> {
        for m in self.terms.keys() {
            if m.len() != gens.len() {
                return Err(AlgebraError::ExponentLength {
                    found: m.len(),
                    expected: gens.len(),
                });
            }
            for (e, g) in m.iter().zip(gens) {
                if g.is_odd() && *e > 1 {
                    return Err(AlgebraError::OddExponent(g.name.clone()));
                }
            }
        }
        Ok(())
    }

    /// Common degree of all terms, `None` for the zero polynomial.
    pub fn degree(&self, gens: &[Generator]) -> Result<Option<u64>, AlgebraError> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d = monomial_degree(m, gens).ok_or(AlgebraError::DegreeOverflow)?;
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return Err(AlgebraError::Inhomogeneous(d0, d)),
                _ => {}
            }
        }
        Ok(deg)
    }

    /// Parses text such as `x*q + y*p`, `a1^2 - 2*a2^2` or `-1/2 x*y`.
    ///
    /// Factors may be written in any order; they are moved into table order
    /// with the Koszul sign. Repeating an odd generator is an error rather
    /// than a silent zero.
    pub fn parse(text: &str, gens: &[Generator]) -> Result<Self, PolyParseError> {
        Parser::new(text, gens).polynomial()
    }

    pub fn display<'a>(&'a self, gens: &'a [Generator]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, gens }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a GradedPolynomial,
    gens: &'a [Generator],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let factors: Vec<String> = m
                .iter()
                .zip(self.gens)
                .filter(|(e, _)| **e > 0)
                .map(|(e, g)| {
                    if *e == 1 {
                        g.name.clone()
                    } else {
                        format!("{}^{}", g.name, e)
                    }
                })
                .collect();
            let abs = c.abs();
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    gens: &'a [Generator],
    index: HashMap<&'a str, usize>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, gens: &'a [Generator]) -> Self {
        let index = gens.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
        Self {
            text,
            pos: 0,
            gens,
            index,
        }
    }

    fn err(&self, offset: usize, kind: PolyParseErrorKind) -> PolyParseError {
        PolyParseError { offset, kind }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn polynomial(&mut self) -> Result<GradedPolynomial, PolyParseError> {
        let mut out = GradedPolynomial::zero();
        let mut degree: Option<u64> = None;
        self.skip_ws();
        let mut first = true;
        loop {
            self.skip_ws();
            let start = self.pos;
            let negative = match self.peek() {
                Some('-') => {
                    self.pos += 1;
                    true
                }
                Some('+') => {
                    self.pos += 1;
                    false
                }
                None if first => return Err(self.err(start, PolyParseErrorKind::Unexpected("end of input".into()))),
                None => break,
                _ if first => false,
                Some(c) => return Err(self.err(start, PolyParseErrorKind::Unexpected(format!("`{c}`")))),
            };
            first = false;
            let (coeff, mono) = self.term()?;
            if !coeff.is_zero() {
                let d = monomial_degree(&mono, self.gens)
                    .ok_or_else(|| self.err(start, PolyParseErrorKind::DegreeOverflow))?;
                match degree {
                    Some(d0) if d0 != d => return Err(self.err(start, PolyParseErrorKind::Inhomogeneous)),
                    _ => degree = Some(d),
                }
            }
            out.add_term(mono, if negative { -coeff } else { coeff });
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Rational, Monomial), PolyParseError> {
        let mut coeff = Rational::one();
        let mut mono = vec![0u32; self.gens.len()];
        let mut expect_factor = true;
        self.skip_ws();
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            coeff = self.rational()?;
            self.skip_ws();
            expect_factor = false;
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    expect_factor = true;
                }
                Some(c) if c.is_alphabetic() || c == '_' => expect_factor = true,
                _ => {}
            }
        }
        if !expect_factor {
            return Ok((coeff, mono));
        }
        loop {
            self.skip_ws();
            let start = self.pos;
            let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
            if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
                let what = self.peek().map(|c| format!("`{c}`")).unwrap_or("end of input".into());
                return Err(self.err(start, PolyParseErrorKind::Unexpected(what)));
            }
            let &i = self
                .index
                .get(name)
                .ok_or_else(|| self.err(start, PolyParseErrorKind::UnknownGenerator(name.into())))?;
            self.skip_ws();
            let mut exp = 1u32;
            if self.peek() == Some('^') {
                self.pos += 1;
                self.skip_ws();
                let estart = self.pos;
                let digits = self.take_while(|c| c.is_ascii_digit());
                exp = digits.parse().map_err(|_| {
                    if digits.is_empty() {
                        self.err(estart, PolyParseErrorKind::Unexpected("missing exponent".into()))
                    } else {
                        self.err(estart, PolyParseErrorKind::DegreeOverflow)
                    }
                })?;
            }
            let g = &self.gens[i];
            if g.is_odd() && exp > 1 {
                return Err(self.err(start, PolyParseErrorKind::OddExponent(g.name.clone())));
            }
            let mut factor = vec![0u32; self.gens.len()];
            factor[i] = exp;
            if exp > 0 {
                match multiply_monomials(&mono, &factor, self.gens) {
                    Some((neg, m)) => {
                        if neg {
                            coeff = -coeff;
                        }
                        mono = m;
                    }
                    None => return Err(self.err(start, PolyParseErrorKind::OddExponent(g.name.clone()))),
                }
                if monomial_degree(&mono, self.gens).is_none() {
                    return Err(self.err(start, PolyParseErrorKind::DegreeOverflow));
                }
            }
            self.skip_ws();
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coeff, mono))
    }

    fn rational(&mut self) -> Result<Rational, PolyParseError> {
        let start = self.pos;
        let num = self.take_while(|c| c.is_ascii_digit());
        let mut den = "1";
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            den = self.take_while(|c| c.is_ascii_digit());
        }
        let literal = &self.text[start..self.pos];
        parse_rational(&format!("{num}/{den}"))
            .ok_or_else(|| self.err(start, PolyParseErrorKind::MalformedRational(literal.trim().into())))
    }
}

/// Parses `p`, `-p` or `p/q` with a nonzero denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: num_bigint::BigInt = num.parse().ok()?;
    let den: num_bigint::BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Generators, relations, formal dimension and fundamental class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPresentation {
    generators: Vec<Generator>,
    relations: Vec<GradedPolynomial>,
    n: u32,
    fundamental_class: GradedPolynomial,
    truncate_above_n: bool,
}

impl AlgebraPresentation {
    pub fn new(
        generators: Vec<Generator>,
        relations: Vec<GradedPolynomial>,
        n: u32,
        fundamental_class: GradedPolynomial,
        truncate_above_n: bool,
    ) -> Result<Self, AlgebraError> {
        if n == 0 {
            return Err(AlgebraError::ZeroDimension);
        }
        for (i, g) in generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(AlgebraError::ZeroDegree(g.name.clone()));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
        }
        let mut kept = Vec::with_capacity(relations.len());
        for r in relations {
            r.validate(&generators)?;
            let deg = r.degree(&generators)?;
            match deg {
                // implied by truncation
                Some(d) if truncate_above_n && d > n as u64 => {}
                Some(_) => kept.push(r),
                None => {}
            }
        }
        fundamental_class.validate(&generators)?;
        let fdeg = fundamental_class.degree(&generators)?;
        if fdeg != Some(n as u64) {
            return Err(AlgebraError::FundamentalClassDegree {
                found: fdeg,
                expected: n,
            });
        }
        Ok(Self {
            generators,
            relations: kept,
            n,
            fundamental_class,
            truncate_above_n,
        })
    }

    /// Convenience constructor from polynomial strings.
    pub fn parse(
        generators: &[(&str, u32)],
        relations: &[&str],
        n: u32,
        fundamental_class: &str,
    ) -> Result<Self, AlgebraError> {
        let gens: Vec<Generator> = generators.iter().map(|(s, d)| Generator::new(*s, *d)).collect();
        let rels = relations
            .iter()
            .map(|r| GradedPolynomial::parse(r, &gens))
            .collect::<Result<Vec<_>, _>>()?;
        let fc = GradedPolynomial::parse(fundamental_class, &gens)?;
        Self::new(gens, rels, n, fc, true)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relations(&self) -> &[GradedPolynomial] {
        &self.relations
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn fundamental_class(&self) -> &GradedPolynomial {
        &self.fundamental_class
    }

    pub fn truncate_above_n(&self) -> bool {
        self.truncate_above_n
    }

    fn max_generator_degree(&self) -> u32 {
        self.generators.iter().map(|g| g.degree).max().unwrap_or(1)
    }

    /// Quotient basis in degrees `0..=n`.
    pub fn basis_and_dims(&self) -> Result<GradedBasis, AlgebraError> {
        let degrees: Vec<DegreeBasis> = (0..=self.n as u64).map(|k| self.degree_basis(k)).collect();
        let mut warnings = Vec::new();
        for k in (self.n + 1)..=(self.n + self.max_generator_degree()) {
            let rank = self.degree_basis(k as u64).rank();
            if rank > 0 {
                if !self.truncate_above_n {
                    return Err(AlgebraError::NotVanishingAboveTop { degree: k, rank });
                }
                warnings.push(format!(
                    "relations do not force vanishing in degree {k} (rank {rank}); truncating above {}",
                    self.n
                ));
            }
        }
        let basis = GradedBasis {
            generators: self.generators.clone(),
            n: self.n as usize,
            degrees,
            warnings,
        };
        if basis.normal_form(&self.fundamental_class)?.1.iter().all(Zero::is_zero) {
            return Err(AlgebraError::DegeneratePresentation);
        }
        Ok(basis)
    }

    fn degree_basis(&self, k: u64) -> DegreeBasis {
        let monomials = monomials_of_degree(&self.generators, k);
        let index: HashMap<Monomial, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut ideal = Echelon::new(monomials.len());
        for r in &self.relations {
            let rd = r.degree(&self.generators).ok().flatten().unwrap_or(0);
            if rd > k {
                continue;
            }
            for m in monomials_of_degree(&self.generators, k - rd) {
                let prod = GradedPolynomial::monomial(m, Rational::one()).mul(r, &self.generators);
                let mut row = vec![Rational::zero(); monomials.len()];
                for (mm, c) in prod.terms() {
                    row[index[mm]] = c.clone();
                }
                ideal.insert(&row);
            }
        }
        let mut is_pivot = vec![false; monomials.len()];
        for p in ideal.pivots() {
            is_pivot[p] = true;
        }
        let basis = (0..monomials.len()).filter(|&i| !is_pivot[i]).collect();
        DegreeBasis {
            monomials,
            index,
            ideal,
            basis,
        }
    }

    pub fn euler_characteristic(&self) -> Result<i64, AlgebraError> {
        Ok(self.basis_and_dims()?.euler_characteristic())
    }

    pub fn check_poincare_duality(&self) -> Result<PoincareReport, AlgebraError> {
        Ok(self.basis_and_dims()?.poincare_duality())
    }
}

/// Degree-k slice of the quotient: all monomials, the reduced ideal, and the
/// non-pivot monomials that represent a basis of the quotient.
#[derive(Clone, Debug)]
pub struct DegreeBasis {
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    ideal: Echelon,
    basis: Vec<usize>,
}

impl DegreeBasis {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn representatives(&self) -> impl Iterator<Item = &Monomial> {
        self.basis.iter().map(|&i| &self.monomials[i])
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }
}

#[derive(Clone, Debug)]
pub struct GradedBasis {
    generators: Vec<Generator>,
    n: usize,
    degrees: Vec<DegreeBasis>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoincareReport {
    pub holds: bool,
    pub failing_degree: Option<usize>,
}

impl GradedBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rank(&self, k: usize) -> usize {
        self.degrees.get(k).map_or(0, DegreeBasis::rank)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(DegreeBasis::rank).collect()
    }

    pub fn degree(&self, k: usize) -> Option<&DegreeBasis> {
        self.degrees.get(k)
    }

    pub fn total_dimension(&self) -> usize {
        self.ranks().iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks()
            .iter()
            .enumerate()
            .map(|(k, &r)| if k % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    }

    /// Degree and coordinates (in the representative basis) of a homogeneous
    /// polynomial. Anything above degree n is zero.
    pub fn normal_form(&self, p: &GradedPolynomial) -> Result<(usize, Vec<Rational>), AlgebraError> {
        let Some(d) = p.degree(&self.generators)? else {
            return Ok((0, Vec::new()));
        };
        let d = d as usize;
        let Some(slice) = self.degrees.get(d) else {
            return Ok((d, Vec::new()));
        };
        let mut v = vec![Rational::zero(); slice.monomials.len()];
        for (m, c) in p.terms() {
            v[slice.index[m]] += c;
        }
        let r = slice.ideal.reduce(&v);
        Ok((d, slice.basis.iter().map(|&i| r[i].clone()).collect()))
    }

    /// Coordinates of the product of two representative monomials.
    pub fn multiply_basis(&self, j: usize, a: usize, k: usize, b: usize) -> Vec<Rational> {
        if j + k > self.n {
            return Vec::new();
        }
        let ma = &self.degrees[j].monomials[self.degrees[j].basis[a]];
        let mb = &self.degrees[k].monomials[self.degrees[k].basis[b]];
        match multiply_monomials(ma, mb, &self.generators) {
            None => vec![Rational::zero(); self.rank(j + k)],
            Some((neg, m)) => {
                let c = if neg { -Rational::one() } else { Rational::one() };
                self.normal_form(&GradedPolynomial::monomial(m, c))
                    .expect("product of basis monomials is homogeneous")
                    .1
            }
        }
    }

    pub fn euler_pairing_matrix(&self, k: usize) -> Option<Vec<Vec<Rational>>> {
        if self.rank(self.n) != 1 || k > self.n {
            return None;
        }
        let j = self.n - k;
        Some(
            (0..self.rank(k))
                .map(|a| {
                    (0..self.rank(j))
                        .map(|b| self.multiply_basis(k, a, j, b)[0].clone())
                        .collect()
                })
                .collect(),
        )
    }

    /// Nondegeneracy of the product pairing into the one-dimensional top degree.
    pub fn poincare_duality(&self) -> PoincareReport {
        if self.rank(0) != 1 {
            return PoincareReport {
                holds: false,
                failing_degree: Some(0),
            };
        }
        if self.rank(self.n) != 1 {
            return PoincareReport {
                holds: false,
                failing_degree: Some(self.n),
            };
        }
        for k in 0..=self.n {
            let m = self.euler_pairing_matrix(k).expect("top rank checked");
            let rows = self.rank(k);
            let cols = self.rank(self.n - k);
            if rows != cols || linalg::rank(&m, cols) != rows {
                return PoincareReport {
                    holds: false,
                    failing_degree: Some(k),
                };
            }
        }
        PoincareReport {
            holds: true,
            failing_degree: None,
        }
    }

    /// Rank in degree `j` of the subalgebra generated by degree 1.
    pub fn degree_one_subalgebra_rank(&self, j: usize) -> usize {
        let k = self.rank(1);
        if j == 0 {
            return 1;
        }
        if j > self.n || j > k {
            return 0;
        }
        let reps: Vec<Monomial> = self.degrees[1].representatives().cloned().collect();
        let mut span = Echelon::new(self.rank(j));
        for subset in subsets(k, j) {
            let mut m = vec![0u32; self.generators.len()];
            let mut negative = false;
            let mut zero = false;
            for &s in &subset {
                match multiply_monomials(&m, &reps[s], &self.generators) {
                    Some((neg, next)) => {
                        negative ^= neg;
                        m = next;
                    }
                    None => {
                        zero = true;
                        break;
                    }
                }
            }
            if zero {
                continue;
            }
            let c = if negative { -Rational::one() } else { Rational::one() };
            let (_, coords) = self
                .normal_form(&GradedPolynomial::monomial(m, c))
                .expect("homogeneous");
            span.insert(&coords);
        }
        span.rank()
    }
}

/// Increasing `j`-subsets of `0..k`.
pub fn subsets(k: usize, j: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, j: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < j - cur.len() {
                break;
            }
            cur.push(i);
            go(k, j, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, j, 0, &mut Vec::new(), &mut out);
    out
}

/// A graded subalgebra of Λ*ℚⁿ given by bases of its homogeneous parts.
#[derive(Clone, Debug)]
pub struct ConcreteSubalgebra {
    n: usize,
    /// `parts[k]` is a basis of the degree-k part as coordinate vectors on
    /// the degree-k blades.
    parts: Vec<Vec<Vec<Rational>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub quotient_dims: Vec<usize>,
    pub ideal_dims: Vec<usize>,
    pub quotient_total: usize,
    pub ideal_total: usize,
    pub quotient_poincare: bool,
}

impl ConcreteSubalgebra {
    /// The smallest subalgebra containing 1 and the given homogeneous elements.
    pub fn generated_by(n: usize, generators: &[Multivector]) -> Result<Self, AlgebraError> {
        let mut by_degree: Vec<Vec<&Multivector>> = vec![Vec::new(); n + 1];
        for g in generators {
            if g.dim() != n {
                return Err(ExteriorError::DimensionMismatch(g.dim(), n).into());
            }
            if g.is_zero() {
                continue;
            }
            let d = g.pure_degree().ok_or(AlgebraError::NotInSubalgebra)?;
            if d == 0 {
                continue;
            }
            by_degree[d].push(g);
        }
        let mut parts: Vec<Vec<Vec<Rational>>> = vec![vec![vec![Rational::one()]]];
        for k in 1..=n {
            let width = blades_of_degree(n, k).len();
            let mut span = Echelon::new(width);
            let mut basis = Vec::new();
            let mut push = |v: Vec<Rational>| {
                if span.insert(&v) {
                    basis.push(v);
                }
            };
            for g in &by_degree[k] {
                push(g.coordinates(k));
            }
            for d in 1..k {
                for g in &by_degree[d] {
                    for a in &parts[k - d] {
                        let am = Multivector::from_coordinates(n, k - d, a);
                        push(g.wedge(&am)?.coordinates(k));
                    }
                }
            }
            parts.push(basis);
        }
        Ok(Self { n, parts })
    }

    /// The whole exterior algebra Λ*ℚⁿ.
    pub fn full(n: usize) -> Self {
        let gens: Vec<Multivector> = (1..=n)
            .map(|i| Multivector::basis(n, &[i]).expect("index in range"))
            .collect();
        Self::generated_by(n, &gens).expect("basis vectors are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    pub fn basis(&self, k: usize) -> Vec<Multivector> {
        self.parts[k]
            .iter()
            .map(|v| Multivector::from_coordinates(self.n, k, v))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims()
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    pub fn contains(&self, x: &Multivector) -> bool {
        let Some(k) = x.pure_degree() else {
            return x.is_zero();
        };
        let mut e = Echelon::new(blades_of_degree(self.n, k).len());
        for v in &self.parts[k] {
            e.insert(v);
        }
        e.contains(&x.coordinates(k))
    }

    /// Highest degree with a nonzero part.
    pub fn top_degree(&self) -> usize {
        self.parts.iter().rposition(|p| !p.is_empty()).unwrap_or(0)
    }

    /// Poincaré duality with respect to the top degree d of A: A_d is
    /// one-dimensional and every product pairing A_k × A_{d−k} → A_d is
    /// nondegenerate.
    pub fn is_poincare_duality(&self) -> Result<bool, AlgebraError> {
        let d = self.top_degree();
        if self.parts[d].len() != 1 {
            return Ok(false);
        }
        let top = &self.parts[d][0];
        let pivot = top
            .iter()
            .position(|c| !c.is_zero())
            .expect("basis vectors are nonzero");
        for k in 0..=d {
            let (left, right) = (self.basis(k), self.basis(d - k));
            if left.len() != right.len() {
                return Ok(false);
            }
            let mut m = Vec::with_capacity(left.len());
            for a in &left {
                let mut row = Vec::with_capacity(right.len());
                for b in &right {
                    row.push(&a.wedge(b)?.coordinates(d)[pivot] / &top[pivot]);
                }
                m.push(row);
            }
            if linalg::rank(&m, right.len()) != left.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dimensions of A/(x) and of the ideal (x) = x∧A, plus a direct check
    /// that A/(x) pairs nondegenerately into its degree d−1 part, where d is
    /// the top degree of A.
    pub fn quotient_by_degree1(&self, x: &Multivector) -> Result<QuotientReport, AlgebraError> {
        if x.dim() != self.n {
            return Err(ExteriorError::DimensionMismatch(x.dim(), self.n).into());
        }
        if x.is_zero() {
            return Err(AlgebraError::ZeroElement);
        }
        if x.pure_degree() != Some(1) || !self.contains(x) {
            return Err(AlgebraError::NotInSubalgebra);
        }
        if !self.is_poincare_duality()? {
            return Err(AlgebraError::NotPoincareDuality(self.top_degree()));
        }
        let n = self.top_degree();
        let ambient = self.n;
        // ideal[k] spans (x)_k; reps[k] complete it to a basis of A_k
        let mut ideal: Vec<Echelon> = Vec::with_capacity(n + 1);
        let mut reps: Vec<Vec<Multivector>> = Vec::with_capacity(n + 1);
        let mut ideal_dims = Vec::with_capacity(n + 1);
        let mut quotient_dims = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let width = blades_of_degree(ambient, k).len();
            let mut e = Echelon::new(width);
            if k > 0 {
                for a in self.basis(k - 1) {
                    e.insert(&x.wedge(&a)?.coordinates(k));
                }
            }
            ideal_dims.push(e.rank());
            let mut full = e.clone();
            let mut r = Vec::new();
            for a in self.basis(k) {
                if full.insert(&a.coordinates(k)) {
                    r.push(a);
                }
            }
            quotient_dims.push(r.len());
            ideal.push(e);
            reps.push(r);
        }
        let top = n - 1;
        let mut quotient_poincare = quotient_dims[top] == 1 && quotient_dims[n] == 0;
        if quotient_poincare {
            let unit = ideal[top].reduce(&reps[top][0].coordinates(top));
            let pivot = unit
                .iter()
                .position(|c| !c.is_zero())
                .expect("representative outside ideal");
            for k in 0..=top {
                let (left, right) = (&reps[k], &reps[top - k]);
                if left.len() != right.len() {
                    quotient_poincare = false;
                    break;
                }
                let mut m = Vec::with_capacity(left.len());
                for a in left {
                    let mut row = Vec::with_capacity(right.len());
                    for b in right {
                        let rem = ideal[top].reduce(&a.wedge(b)?.coordinates(top));
                        row.push(&rem[pivot] / &unit[pivot]);
                    }
                    m.push(row);
                }
                if linalg::rank(&m, right.len()) != left.len() {
                    quotient_poincare = false;
                    break;
                }
            }
        }
        Ok(QuotientReport {
            quotient_total: quotient_dims.iter().sum(),
            ideal_total: ideal_dims.iter().sum(),
            quotient_dims,
            ideal_dims,
            quotient_poincare,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn alg(gens: &[(&str, u32)], rels: &[&str], n: u32, fc: &str) -> AlgebraPresentation {
        AlgebraPresentation::parse(gens, rels, n, fc).unwrap()
    }

    #[test]
    fn sphere_torus_cp2_ranks() {
        assert_eq!(
            alg(&[("w", 2)], &["w^2"], 2, "w").basis_and_dims().unwrap().ranks(),
            vec![1, 0, 1]
        );
        let t2 = alg(&[("x", 1), ("y", 1)], &[], 2, "x*y");
        assert_eq!(t2.basis_and_dims().unwrap().ranks(), vec![1, 2, 1]);
        let cp2 = alg(&[("w", 2)], &["w^3"], 4, "w^2");
        assert_eq!(cp2.basis_and_dims().unwrap().ranks(), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn euler_characteristics() {
        let t2 = alg(&[("x", 1), ("y", 1)], &[], 2, "x*y");
        assert_eq!(t2.euler_characteristic().unwrap(), 0);
        let genus2 = alg(
            &[("x1", 1), ("y1", 1), ("x2", 1), ("y2", 1)],
            &["x1*y1 - x2*y2", "x1*x2", "x1*y2", "y1*x2", "y1*y2"],
            2,
            "x1*y1",
        );
        assert_eq!(genus2.basis_and_dims().unwrap().ranks(), vec![1, 4, 1]);
        assert_eq!(genus2.euler_characteristic().unwrap(), -2);
        assert_eq!(alg(&[("w", 2)], &["w^3"], 4, "w^2").euler_characteristic().unwrap(), 3);
    }

    #[test]
    fn poincare_duality_examples() {
        let t2 = alg(&[("x", 1), ("y", 1)], &[], 2, "x*y");
        assert!(t2.check_poincare_duality().unwrap().holds);
        let bad = alg(&[("x", 1), ("w", 2)], &[], 2, "w");
        let report = bad.check_poincare_duality().unwrap();
        assert_eq!(report.failing_degree, Some(1));
        let s2s2x3 = alg(
            &[("a1", 2), ("b1", 2), ("a2", 2), ("b2", 2), ("a3", 2), ("b3", 2)],
            &[
                "a1^2",
                "b1^2",
                "a2^2",
                "b2^2",
                "a3^2",
                "b3^2",
                "a1*a2",
                "a1*b2",
                "a1*a3",
                "a1*b3",
                "b1*a2",
                "b1*b2",
                "b1*a3",
                "b1*b3",
                "a2*a3",
                "a2*b3",
                "b2*a3",
                "b2*b3",
                "a1*b1 - a2*b2",
                "a1*b1 - a3*b3",
            ],
            4,
            "a1*b1",
        );
        let basis = s2s2x3.basis_and_dims().unwrap();
        assert_eq!(basis.ranks(), vec![1, 0, 6, 0, 1]);
        assert!(basis.poincare_duality().holds);
    }

    #[test]
    fn degenerate_and_invalid_presentations() {
        let killed = alg(&[("w", 2)], &["w"], 2, "w");
        assert_eq!(
            killed.basis_and_dims().unwrap_err(),
            AlgebraError::DegeneratePresentation
        );
        let degenerate = alg(&[("w", 2)], &["w^2"], 4, "w^2");
        assert_eq!(
            degenerate.basis_and_dims().unwrap_err(),
            AlgebraError::DegeneratePresentation
        );
        let implied = AlgebraPresentation::parse(&[("w", 2)], &["w^3"], 2, "w").unwrap();
        assert!(implied.relations().is_empty());
        assert!(matches!(
            AlgebraPresentation::parse(&[("w", 2)], &[], 4, "w"),
            Err(AlgebraError::FundamentalClassDegree { .. })
        ));
    }

    #[test]
    fn untruncated_presentations_must_vanish_on_their_own() {
        let gens = vec![Generator::new("x", 1), Generator::new("w", 2)];
        let fc = GradedPolynomial::parse("w", &gens).unwrap();
        let p = AlgebraPresentation::new(gens.clone(), vec![], 2, fc.clone(), false).unwrap();
        assert!(matches!(
            p.basis_and_dims(),
            Err(AlgebraError::NotVanishingAboveTop { .. })
        ));
        let p = AlgebraPresentation::new(gens, vec![], 2, fc, true).unwrap();
        assert!(!p.basis_and_dims().unwrap().warnings.is_empty());
    }

    #[test]
    fn koszul_signs_in_parser() {
        let gens = vec![Generator::new("x", 1), Generator::new("y", 1), Generator::new("w", 2)];
        let xy = GradedPolynomial::parse("x*y", &gens).unwrap();
        let yx = GradedPolynomial::parse("y*x", &gens).unwrap();
        assert_eq!(yx, xy.scale(&q(-1)));
        let wx = GradedPolynomial::parse("w*x", &gens).unwrap();
        assert_eq!(wx.coefficient(&[1, 0, 1]), q(1));
        assert!(GradedPolynomial::parse("x*x", &gens).is_err());
        assert!(GradedPolynomial::parse("x^3", &gens).is_err());
        assert!(GradedPolynomial::parse("x + w", &gens).is_err());
        assert!(GradedPolynomial::parse("1/0 x", &gens).is_err());
        assert!(GradedPolynomial::parse("z", &gens).is_err());
        let p = GradedPolynomial::parse("-1/2 x*y + 3*w", &gens).unwrap();
        assert_eq!(p.coefficient(&[1, 1, 0]), Rational::new((-1).into(), 2.into()));
        assert_eq!(p.display(&gens).to_string(), "-1/2*x*y + 3*w");
    }

    #[test]
    fn quotient_examples() {
        let e = |n: usize, i: &[usize]| Multivector::basis(n, i).unwrap();
        let a = ConcreteSubalgebra::full(3);
        let r = a.quotient_by_degree1(&e(3, &[1])).unwrap();
        assert_eq!((r.quotient_total, r.ideal_total), (4, 4));
        assert!(r.quotient_poincare);

        let a = ConcreteSubalgebra::full(1);
        let r = a.quotient_by_degree1(&e(1, &[1])).unwrap();
        assert_eq!((r.quotient_total, r.ideal_total), (1, 1));

        let a = ConcreteSubalgebra::generated_by(4, &[e(4, &[1]), e(4, &[2])]).unwrap();
        assert_eq!(a.dims(), vec![1, 2, 1, 0, 0]);
        let r = a.quotient_by_degree1(&e(4, &[1])).unwrap();
        assert_eq!((r.quotient_total, r.ideal_total), (2, 2));
        assert!(r.quotient_poincare);

        let not_pd = ConcreteSubalgebra::generated_by(3, &[e(3, &[1]), e(3, &[2]), e(3, &[1, 3])]).unwrap();
        assert_eq!(not_pd.dims(), vec![1, 2, 2, 1]);
        assert!(!not_pd.is_poincare_duality().unwrap());
        assert_eq!(
            not_pd.quotient_by_degree1(&e(3, &[1])).unwrap_err(),
            AlgebraError::NotPoincareDuality(3)
        );

        assert_eq!(
            ConcreteSubalgebra::full(2)
                .quotient_by_degree1(&Multivector::zero(2))
                .unwrap_err(),
            AlgebraError::ZeroElement
        );
    }
}
