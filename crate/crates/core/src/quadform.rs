//! Rational quadratic forms: congruence diagonalization, discriminant,
//! signature, Hilbert symbols, Hasse invariants and equivalence over ℚ.
//!
//! Equivalence uses the complete invariant set (rank, discriminant,
//! signature, Hasse invariant at every place), which by Hasse–Minkowski
//! classifies nondegenerate forms over ℚ.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{blades_of_degree, top_pairing, Multivector};
use crate::linalg;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadFormError {
    #[error("Gram matrix must be square")]
    NotSquare,
    #[error("Gram matrix must be symmetric")]
    NotSymmetric,
    #[error("form is degenerate")]
    Degenerate,
    #[error("Hilbert symbol arguments must be nonzero")]
    ZeroArgument,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("wedge pairing form needs an even dimension ≥ 2, got {0}")]
    OddDimension(usize),
}

/// A completion of ℚ.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "∞"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagonalization {
    pub diagonal: Vec<Rational>,
    /// Columns are the new basis: `transformᵗ · gram · transform` is diagonal.
    pub transform: Vec<Vec<Rational>>,
}

impl QuadraticForm {
    pub fn new(gram: Vec<Vec<Rational>>) -> Result<Self, QuadFormError> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(QuadFormError::NotSquare);
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(QuadFormError::NotSymmetric);
                }
            }
        }
        Ok(Self { gram })
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let n = entries.len();
        let gram = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { entries[i].clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self { gram }
    }

    pub fn from_integers(diag: &[i64]) -> Self {
        Self::diagonal(
            &diag
                .iter()
                .map(|&d| Rational::from_integer(d.into()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.gram, self.dim())
    }

    pub fn determinant(&self) -> Rational {
        linalg::determinant(&self.gram)
    }

    pub fn is_degenerate(&self) -> bool {
        self.determinant().is_zero()
    }

    /// Congruence diagonalization by symmetric row and column operations.
    pub fn diagonalize(&self) -> Diagonalization {
        let n = self.dim();
        let mut a = self.gram.clone();
        let mut t: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        // b_j ← b_j + c·b_i
        let add = |a: &mut Vec<Vec<Rational>>, t: &mut Vec<Vec<Rational>>, j: usize, i: usize, c: &Rational| {
            for k in 0..n {
                let v = &a[i][k] * c;
                a[j][k] += v;
            }
            for k in 0..n {
                let v = &a[k][i] * c;
                a[k][j] += v;
            }
            for row in t.iter_mut() {
                let v = &row[i] * c;
                row[j] += v;
            }
        };
        for i in 0..n {
            if a[i][i].is_zero() {
                if let Some(j) = (i + 1..n).find(|&j| !a[j][j].is_zero()) {
                    a.swap(i, j);
                    for row in a.iter_mut() {
                        row.swap(i, j);
                    }
                    for row in t.iter_mut() {
                        row.swap(i, j);
                    }
                } else if let Some(j) = (i + 1..n).find(|&j| !a[i][j].is_zero()) {
                    add(&mut a, &mut t, i, j, &Rational::one());
                }
            }
            if a[i][i].is_zero() {
                continue;
            }
            for j in (i + 1)..n {
                if a[j][i].is_zero() {
                    continue;
                }
                let c = -(&a[j][i] / &a[i][i]);
                add(&mut a, &mut t, j, i, &c);
            }
        }
        Diagonalization {
            diagonal: (0..n).map(|i| a[i][i].clone()).collect(),
            transform: t,
        }
    }

    fn nonzero_diagonal(&self) -> Result<Vec<Rational>, QuadFormError> {
        let d = self.diagonalize().diagonal;
        if d.iter().any(Zero::is_zero) {
            return Err(QuadFormError::Degenerate);
        }
        Ok(d)
    }

    /// Determinant modulo squares, as a squarefree integer.
    pub fn discriminant(&self) -> Result<BigInt, QuadFormError> {
        let det = self.determinant();
        if det.is_zero() {
            return Err(QuadFormError::Degenerate);
        }
        Ok(squarefree_class(&det))
    }

    pub fn signature(&self) -> Result<(usize, usize), QuadFormError> {
        let d = self.nonzero_diagonal()?;
        let p = d.iter().filter(|x| x.is_positive()).count();
        Ok((p, d.len() - p))
    }

    pub fn hasse_invariant(&self, place: Place) -> Result<i8, QuadFormError> {
        let d = self.nonzero_diagonal()?;
        let mut s = 1i8;
        for i in 0..d.len() {
            for j in (i + 1)..d.len() {
                s *= hilbert_symbol(&d[i], &d[j], place)?;
            }
        }
        Ok(s)
    }

    /// Primes at which the Hasse invariant can differ from +1: 2 and every
    /// prime dividing a numerator or denominator of the diagonal.
    fn relevant_primes(&self) -> Result<BTreeSet<u64>, QuadFormError> {
        let mut out = BTreeSet::from([2u64]);
        for d in self.nonzero_diagonal()? {
            for part in [d.numer(), d.denom()] {
                out.extend(prime_factors(&part.abs()));
            }
        }
        Ok(out)
    }

    pub fn equivalence_report(&self, other: &Self) -> Result<EquivalenceReport, QuadFormError> {
        let discriminants = (self.discriminant()?, other.discriminant()?);
        let signatures = (self.signature()?, other.signature()?);
        let mut places = vec![Place::Infinity];
        let primes: BTreeSet<u64> = self
            .relevant_primes()?
            .union(&other.relevant_primes()?)
            .copied()
            .collect();
        places.extend(primes.into_iter().map(Place::Prime));
        let mut hasse_mismatch = None;
        if self.dim() == other.dim() && discriminants.0 == discriminants.1 && signatures.0 == signatures.1 {
            for &p in &places {
                if self.hasse_invariant(p)? != other.hasse_invariant(p)? {
                    hasse_mismatch = Some(p);
                    break;
                }
            }
        }
        let equivalent = self.dim() == other.dim()
            && discriminants.0 == discriminants.1
            && signatures.0 == signatures.1
            && hasse_mismatch.is_none();
        Ok(EquivalenceReport {
            ranks: (self.dim(), other.dim()),
            discriminants: (discriminants.0.to_string(), discriminants.1.to_string()),
            signatures,
            places_checked: places,
            hasse_mismatch,
            equivalent,
        })
    }

    pub fn rationally_equivalent(&self, other: &Self) -> Result<bool, QuadFormError> {
        Ok(self.equivalence_report(other)?.equivalent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub ranks: (usize, usize),
    pub discriminants: (String, String),
    pub signatures: ((usize, usize), (usize, usize)),
    pub places_checked: Vec<Place>,
    /// First place where the Hasse invariants differ, when rank,
    /// discriminant and signature already agree.
    pub hasse_mismatch: Option<Place>,
    pub equivalent: bool,
}

/// Squarefree integer in the class of `x` modulo nonzero rational squares.
pub fn squarefree_class(x: &Rational) -> BigInt {
    // p/q ~ p·q since q² is a square
    let m = x.numer() * x.denom();
    let sign = if m.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rest = m.abs();
    let mut out = BigInt::one();
    let mut d = BigInt::from(2);
    while &d * &d <= rest {
        let mut e = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &d;
        }
        d += 1;
    }
    out * rest * sign
}

fn prime_factors(m: &BigInt) -> Vec<u64> {
    let mut rest = m.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= rest {
        if (&rest % &d).is_zero() {
            out.push(d.to_u64().expect("trial divisor fits in u64"));
            while (&rest % &d).is_zero() {
                rest /= &d;
            }
        }
        d += 1;
    }
    if rest > BigInt::one() {
        out.push(rest.to_u64().expect("prime factor fits in u64"));
    }
    out
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Splits an integer as p^v · u with p ∤ u.
fn split_valuation(x: &BigInt, p: &BigInt) -> (i64, BigInt) {
    let mut v = 0;
    let mut u = x.clone();
    while (&u % p).is_zero() {
        u /= p;
        v += 1;
    }
    (v, u)
}

/// p-adic valuation and unit part (as numerator, denominator) of a rational.
fn rational_split(x: &Rational, p: u64) -> (i64, BigInt, BigInt) {
    let pb = BigInt::from(p);
    let (vn, un) = split_valuation(x.numer(), &pb);
    let (vd, ud) = split_valuation(x.denom(), &pb);
    (vn - vd, un, ud)
}

fn legendre(a: &BigInt, p: u64) -> i8 {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits");
    if r == 0 {
        return 0;
    }
    let e = (p - 1) / 2;
    let mut base = r as u128;
    let mut acc = 1u128;
    let mut k = e;
    let m = p as u128;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        k >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// `u mod 8` for a 2-adic unit u = n/d (n, d odd).
fn unit_mod8(n: &BigInt, d: &BigInt) -> u64 {
    let n8 = n.mod_floor(&BigInt::from(8)).to_u64().expect("small");
    let d8 = d.mod_floor(&BigInt::from(8)).to_u64().expect("small");
    // every odd residue is its own inverse mod 8
    n8 * d8 % 8
}

/// Hilbert symbol (a, b) at the given place: +1 iff z² = a x² + b y² has a
/// nonzero solution over the completion.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> Result<i8, QuadFormError> {
    if a.is_zero() || b.is_zero() {
        return Err(QuadFormError::ZeroArgument);
    }
    match place {
        Place::Infinity => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Prime(p) if !is_prime(p) => Err(QuadFormError::NotPrime(p)),
        Place::Prime(2) => {
            let (alpha, an, ad) = rational_split(a, 2);
            let (beta, bn, bd) = rational_split(b, 2);
            let u = unit_mod8(&an, &ad);
            let v = unit_mod8(&bn, &bd);
            let eps = |w: u64| ((w - 1) / 2) % 2;
            let omega = |w: u64| ((w * w - 1) / 8) % 2;
            let e = eps(u) * eps(v) + (alpha.rem_euclid(2) as u64) * omega(v) + (beta.rem_euclid(2) as u64) * omega(u);
            Ok(if e % 2 == 0 { 1 } else { -1 })
        }
        Place::Prime(p) => {
            let (alpha, an, ad) = rational_split(a, p);
            let (beta, bn, bd) = rational_split(b, p);
            let (alpha, beta) = (alpha.rem_euclid(2), beta.rem_euclid(2));
            let mut s: i8 = if alpha * beta * (((p - 1) / 2) % 2) as i64 % 2 == 1 {
                -1
            } else {
                1
            };
            if beta == 1 {
                s *= legendre(&an, p) * legendre(&ad, p);
            }
            if alpha == 1 {
                s *= legendre(&bn, p) * legendre(&bd, p);
            }
            Ok(s)
        }
    }
}

/// Gram matrix of the top-degree pairing on Λ^{n/2}ℝⁿ in the blade basis.
///
/// For n ≡ 2 mod 4 the pairing is alternating; there each pair of blades is
/// paired in increasing blade order, which gives the symmetric form with the
/// same hyperbolic-plane structure.
pub fn wedge_pairing_form(n: usize) -> Result<QuadraticForm, QuadFormError> {
    if n < 2 || n % 2 == 1 {
        return Err(QuadFormError::OddDimension(n));
    }
    let blades: Vec<Multivector> = blades_of_degree(n, n / 2)
        .into_iter()
        .map(|b| Multivector::from_blade(n, b, Rational::one()))
        .collect();
    let gram = (0..blades.len())
        .map(|i| {
            (0..blades.len())
                .map(|j| {
                    let (a, b) = if i <= j { (i, j) } else { (j, i) };
                    top_pairing(&blades[a], &blades[b]).expect("same ambient dimension")
                })
                .collect()
        })
        .collect();
    QuadraticForm::new(gram)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn hyperbolic() -> QuadraticForm {
        QuadraticForm::new(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap()
    }

    #[test]
    fn diagonalization_is_a_congruence() {
        let f = hyperbolic();
        let d = f.diagonalize();
        assert_eq!(d.diagonal.iter().filter(|x| x.is_positive()).count(), 1);
        assert_eq!(d.diagonal.iter().filter(|x| x.is_negative()).count(), 1);
        let t = &d.transform;
        let g = f.gram();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = q(0);
                for a in 0..2 {
                    for b in 0..2 {
                        s += &t[a][i] * &g[a][b] * &t[b][j];
                    }
                }
                let expect = if i == j { d.diagonal[i].clone() } else { q(0) };
                assert_eq!(s, expect);
            }
        }
        let zero = QuadraticForm::diagonal(&[q(0), q(0)]);
        assert!(zero.diagonalize().diagonal.iter().all(Zero::is_zero));
        assert_eq!(zero.discriminant(), Err(QuadFormError::Degenerate));
    }

    #[test]
    fn invariants_of_the_nine_manifold_form_and_the_torus_form() {
        let y = QuadraticForm::from_integers(&[2, 1, 1, -1, -1, -1]);
        assert_eq!(y.discriminant().unwrap(), BigInt::from(-2));
        assert_eq!(y.signature().unwrap(), (3, 3));
        let t4 = wedge_pairing_form(4).unwrap();
        assert_eq!(t4.discriminant().unwrap(), BigInt::from(-1));
        assert_eq!(t4.signature().unwrap(), (3, 3));
        assert!(!y.rationally_equivalent(&t4).unwrap());
        assert!(y.rationally_equivalent(&y).unwrap());
        assert_eq!(wedge_pairing_form(2).unwrap().gram(), hyperbolic().gram());
        assert_eq!(wedge_pairing_form(6).unwrap().signature().unwrap(), (10, 10));
        assert!(wedge_pairing_form(3).is_err());
        let g4 = wedge_pairing_form(4).unwrap();
        // e{1,2}·e{3,4} = +1, e{1,3}·e{2,4} = −1, e{1,4}·e{2,3} = +1
        assert_eq!(g4.gram()[0][5], q(1));
        assert_eq!(g4.gram()[1][4], q(-1));
        assert_eq!(g4.gram()[2][3], q(1));
    }

    #[test]
    fn hilbert_symbol_examples() {
        let m1 = q(-1);
        assert_eq!(hilbert_symbol(&m1, &m1, Place::Infinity).unwrap(), -1);
        assert_eq!(hilbert_symbol(&m1, &m1, Place::Prime(2)).unwrap(), -1);
        for p in [2, 3, 5, 7] {
            assert_eq!(hilbert_symbol(&q(1), &q(-7), Place::Prime(p)).unwrap(), 1);
        }
        assert_eq!(
            hilbert_symbol(&q(0), &q(1), Place::Infinity),
            Err(QuadFormError::ZeroArgument)
        );
        assert_eq!(
            hilbert_symbol(&q(1), &q(1), Place::Prime(9)),
            Err(QuadFormError::NotPrime(9))
        );
    }

    #[test]
    fn hasse_and_equivalence_examples() {
        let one = QuadraticForm::from_integers(&[1, 1]);
        assert_eq!(one.hasse_invariant(Place::Prime(3)).unwrap(), 1);
        let neg = QuadraticForm::from_integers(&[-1, -1]);
        assert_eq!(neg.hasse_invariant(Place::Infinity).unwrap(), -1);
        assert!(QuadraticForm::from_integers(&[1, -1])
            .rationally_equivalent(&hyperbolic())
            .unwrap());
        // same rank, discriminant and signature; Hasse invariants differ at 2 and 3
        let three = QuadraticForm::from_integers(&[3, 3]);
        assert_eq!(three.hasse_invariant(Place::Prime(3)).unwrap(), -1);
        let report = three.equivalence_report(&one).unwrap();
        assert!(!report.equivalent);
        assert_eq!(report.hasse_mismatch, Some(Place::Prime(2)));
    }

    #[test]
    fn squarefree_classes() {
        assert_eq!(squarefree_class(&q(12)), BigInt::from(3));
        assert_eq!(
            squarefree_class(&Rational::new(BigInt::from(-8), BigInt::from(3))),
            BigInt::from(-6)
        );
        assert_eq!(squarefree_class(&q(1)), BigInt::from(1));
    }
}
