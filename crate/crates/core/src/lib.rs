//! Exact computer algebra for quiver path algebras, their wreath-product
//! deformations, and symplectic reflection algebras.
//!
//! Everything is computed over cyclotomic fields with arbitrary-precision
//! rational coefficients; there is no floating point anywhere. The crate is
//! organized around the objects it manipulates:
//!
//! * [`scalar`] / [`linalg`] — the field ℚ(ζ_m) and exact dense linear
//!   algebra (rank, kernel, solve, subspace intersection).
//! * [`quiver`] — quivers, doubling with the star involution, affine ADE
//!   constructors, moment-map elements, product quivers.
//! * [`wreathalg`] — the smash product of the product-quiver path algebra
//!   with the symmetric group, commutator brackets, relation sets, and
//!   graded dimension counts.
//! * [`pbw`] — classification of the admissible deformation parameters via
//!   the degree-3 overlap condition, with exact certificates.
//! * [`groups`] — finite subgroups of SL₂ with explicit irreducible
//!   representations, McKay quivers, matrix-unit idempotents, and group
//!   algebra arithmetic for wreath products.
//! * [`sra`] — symplectic reflection algebras: reflection enumeration, the
//!   deformed commutator pairing, defining relations, and a rewriting
//!   normal-form engine.
//! * [`morita`] — the corner isomorphism between the wreath deformation and
//!   the idempotent-cut symplectic reflection algebra, certified degree by
//!   degree.

pub mod groups;
pub mod linalg;
pub mod morita;
pub mod pbw;
pub mod perm;
pub mod quiver;
pub mod scalar;
pub mod sra;
pub mod wreathalg;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid quiver index: {0}")]
    InvalidQuiver(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("incompatible arguments: {0}")]
    Incompatible(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
