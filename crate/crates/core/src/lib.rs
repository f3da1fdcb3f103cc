//! Obstructions to ellipticity of closed manifolds and numerical checks for
//! explicit wrapping maps of open ones.
//!
//! The algebraic side is exact: cohomology rings are finite presentations
//! over ℚ, targets live in Λ*ℚⁿ, and every verdict that excludes a manifold
//! is backed by a rank or pairing computation with rational arithmetic.
//! Floating point appears only in the embedding search, the surface
//! classifiers and the map estimates.

pub mod algebra;
pub mod battery;
pub mod descriptor;
pub mod embed;
pub mod exterior;
pub mod geom2d;
pub mod linalg;
pub mod nilcoh;
pub mod quadform;
pub mod wrapmaps;

pub type Rational = num_rational::BigRational;

/// Any error from the library, tagged with the module it came from.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("descriptor: {0}")]
    Descriptor(#[from] descriptor::DescriptorError),
    #[error("algebra: {0}")]
    Algebra(#[from] algebra::AlgebraError),
    #[error("exterior: {0}")]
    Exterior(#[from] exterior::ExteriorError),
    #[error("embed: {0}")]
    Embed(#[from] embed::EmbedError),
    #[error("quadform: {0}")]
    Quadform(#[from] quadform::QuadFormError),
    #[error("nilcoh: {0}")]
    Nil(#[from] nilcoh::NilError),
    #[error("geom2d: {0}")]
    Geom(#[from] geom2d::GeomError),
    #[error("wrapmaps: {0}")]
    Map(#[from] wrapmaps::MapError),
    #[error("{0}")]
    InvalidInput(String),
}
