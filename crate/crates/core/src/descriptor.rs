//! Manifold descriptor files.
//!
//! A descriptor is a TOML document:
//!
//! ```toml
//! name = "T^2"
//! n = 2
//! notes = "optional free text"
//!
//! [cohomology]
//! generators = [{ name = "x", degree = 1 }, { name = "y", degree = 1 }]
//! relations = []                 # strings like "x*y - 1/2*w", or term lists
//! fundamental_class = "x*y"
//! truncate_above_n = true        # optional, default true
//!
//! [pi1]
//! kind = "free-abelian"          # "finite" | "free-abelian" | "lie" | "other"
//! rank = 2
//!
//! [betti]                        # optional, 4-manifolds only
//! plus = 1
//! minus = 1
//! ```
//!
//! A relation may also be written as a list of terms with exponent vectors,
//! `[{ coefficient = "-2", exponents = [0, 2, 0] }, ...]`. A `lie` block
//! gives `dim` and `brackets = [{ i = 1, j = 2, k = 3, coefficient = "1" }]`
//! meaning [e_i, e_j] has coefficient c on e_k, indices from 1.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::algebra::{parse_rational, AlgebraError, AlgebraPresentation, Generator, GradedPolynomial};
use crate::embed::Pi1Class;
use crate::nilcoh::{Bracket, NilLieAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct DescriptorError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for DescriptorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn locate(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn error_at(text: &str, offset: usize, message: impl Into<String>) -> DescriptorError {
    let (line, column) = locate(text, offset);
    DescriptorError {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    name: String,
    n: Spanned<u32>,
    #[serde(default)]
    notes: Option<String>,
    cohomology: Spanned<RawCohomology>,
    pi1: Spanned<RawPi1>,
    #[serde(default)]
    betti: Option<RawBetti>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCohomology {
    generators: Vec<Spanned<RawGenerator>>,
    #[serde(default)]
    relations: Vec<Spanned<RawRelation>>,
    fundamental_class: Spanned<RawRelation>,
    #[serde(default = "yes")]
    truncate_above_n: bool,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    degree: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRelation {
    Text(String),
    Terms(Vec<RawTerm>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(default = "one")]
    coefficient: String,
    exponents: Vec<u32>,
}

fn one() -> String {
    "1".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPi1 {
    kind: String,
    #[serde(default)]
    rank: Option<usize>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    brackets: Vec<Spanned<RawBracket>>,
    #[serde(default)]
    description: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBracket {
    i: usize,
    j: usize,
    k: usize,
    #[serde(default = "one")]
    coefficient: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBetti {
    plus: usize,
    minus: usize,
}

/// Fundamental group data of a descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum Pi1Descriptor {
    Finite,
    FreeAbelian(usize),
    /// Torsion-free nilpotent, given by the Lie algebra of its Mal'cev completion.
    Lie(NilLieAlgebra),
    Other(String),
}

impl Pi1Descriptor {
    pub fn class(&self) -> Pi1Class {
        match self {
            Pi1Descriptor::Finite => Pi1Class::Finite,
            Pi1Descriptor::FreeAbelian(k) => Pi1Class::FreeAbelian(*k),
            Pi1Descriptor::Lie(g) if g.is_abelian() => Pi1Class::FreeAbelian(g.dim()),
            Pi1Descriptor::Lie(_) => Pi1Class::Other("nonabelian nilpotent".into()),
            Pi1Descriptor::Other(s) => Pi1Class::Other(s.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Pi1Descriptor::Finite => "finite".into(),
            Pi1Descriptor::FreeAbelian(k) => format!("Z^{k}"),
            Pi1Descriptor::Lie(g) => format!("nilpotent lattice, Lie algebra of dimension {}", g.dim()),
            Pi1Descriptor::Other(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldDescriptor {
    pub name: String,
    pub n: u32,
    pub notes: Option<String>,
    pub cohomology: AlgebraPresentation,
    pub pi1: Pi1Descriptor,
    pub betti: Option<(usize, usize)>,
}

/// Reads a descriptor, reporting errors with 1-based line and column.
pub fn parse_descriptor(text: &str) -> Result<ManifoldDescriptor, DescriptorError> {
    let raw: RawDescriptor = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        error_at(text, offset, e.message().trim().to_string())
    })?;
    let n = *raw.n.get_ref();
    let coh_span = raw.cohomology.span();
    let coh = raw.cohomology.into_inner();
    if coh.generators.is_empty() {
        return Err(error_at(
            text,
            coh_span.start,
            "cohomology needs at least one generator",
        ));
    }
    let mut gens = Vec::with_capacity(coh.generators.len());
    for g in &coh.generators {
        let r = g.get_ref();
        if r.degree == 0 {
            return Err(error_at(
                text,
                g.span().start,
                format!("generator `{}` has degree 0", r.name),
            ));
        }
        if gens.iter().any(|x: &Generator| x.name == r.name) {
            return Err(error_at(
                text,
                g.span().start,
                format!("duplicate generator `{}`", r.name),
            ));
        }
        gens.push(Generator::new(r.name.clone(), r.degree));
    }
    let mut relations = Vec::with_capacity(coh.relations.len());
    for rel in &coh.relations {
        relations.push(relation(text, rel.span(), rel.get_ref(), &gens)?);
    }
    let fc_span = coh.fundamental_class.span();
    let fc = relation(text, fc_span.clone(), coh.fundamental_class.get_ref(), &gens)?;
    let cohomology = AlgebraPresentation::new(gens, relations, n, fc, coh.truncate_above_n).map_err(|e| {
        let at = match e {
            AlgebraError::FundamentalClassDegree { .. } => fc_span.start,
            _ => coh_span.start,
        };
        error_at(text, at, e.to_string())
    })?;
    let pi1_span = raw.pi1.span();
    let pi1 = pi1_block(text, pi1_span, raw.pi1.into_inner())?;
    if let (Some(_), false) = (&raw.betti, n == 4) {
        return Err(error_at(
            text,
            raw.n.span().start,
            "a [betti] block is only meaningful for n = 4",
        ));
    }
    Ok(ManifoldDescriptor {
        name: raw.name,
        n,
        notes: raw.notes,
        cohomology,
        pi1,
        betti: raw.betti.map(|b| (b.plus, b.minus)),
    })
}

fn relation(
    text: &str,
    span: Range<usize>,
    r: &RawRelation,
    gens: &[Generator],
) -> Result<GradedPolynomial, DescriptorError> {
    match r {
        RawRelation::Text(s) => {
            let p = GradedPolynomial::parse(s, gens).map_err(|e| {
                // +1 skips the opening quote
                error_at(text, span.start + 1 + e.offset, e.kind.to_string())
            })?;
            p.validate(gens)
                .map_err(|e| error_at(text, span.start, e.to_string()))?;
            Ok(p)
        }
        RawRelation::Terms(terms) => {
            let mut p = GradedPolynomial::zero();
            for t in terms {
                let c = parse_rational(&t.coefficient)
                    .ok_or_else(|| error_at(text, span.start, format!("malformed rational `{}`", t.coefficient)))?;
                p = p.add(&GradedPolynomial::monomial(t.exponents.clone(), c));
            }
            p.validate(gens)
                .map_err(|e| error_at(text, span.start, e.to_string()))?;
            p.degree(gens).map_err(|e| error_at(text, span.start, e.to_string()))?;
            Ok(p)
        }
    }
}

fn pi1_block(text: &str, span: Range<usize>, raw: RawPi1) -> Result<Pi1Descriptor, DescriptorError> {
    let need = |field: Option<usize>, name: &str| {
        field.ok_or_else(|| error_at(text, span.start, format!("pi1 of kind `{}` needs `{name}`", raw.kind)))
    };
    match raw.kind.as_str() {
        "finite" => Ok(Pi1Descriptor::Finite),
        "free-abelian" => Ok(Pi1Descriptor::FreeAbelian(need(raw.rank, "rank")?)),
        "lie" => {
            let dim = need(raw.dim, "dim")?;
            let mut brackets = Vec::with_capacity(raw.brackets.len());
            for b in &raw.brackets {
                let r = b.get_ref();
                let at = b.span().start;
                let coeff = parse_rational(&r.coefficient)
                    .ok_or_else(|| error_at(text, at, format!("malformed rational `{}`", r.coefficient)))?;
                if [r.i, r.j, r.k].iter().any(|&x| x == 0 || x > dim) {
                    return Err(error_at(text, at, format!("bracket indices must lie in 1..={dim}")));
                }
                brackets.push(Bracket {
                    i: r.i - 1,
                    j: r.j - 1,
                    k: r.k - 1,
                    coeff,
                });
            }
            let g = NilLieAlgebra::new(dim, &brackets).map_err(|e| error_at(text, span.start, e.to_string()))?;
            Ok(Pi1Descriptor::Lie(g))
        }
        "other" => Ok(Pi1Descriptor::Other(
            raw.description.unwrap_or_else(|| "unspecified".into()),
        )),
        k => Err(error_at(
            text,
            span.start,
            format!("unknown pi1 kind `{k}` (expected finite, free-abelian, lie or other)"),
        )),
    }
}
