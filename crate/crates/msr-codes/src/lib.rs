//! Maximum Sum Rank (MSR) convolutional codes for low-delay streaming over
//! networks that lose rank instead of packets.
//!
//! A linear network code reduces each use of the network to a channel matrix
//! `A_t` over a ground field `F_q`; failing links make `A_t` rank deficient.
//! This crate implements the full pipeline for protecting a packet stream
//! against such losses with a convolutional code over an extension field
//! `F_{q^M}`:
//!
//! - [`gf`] — arithmetic in `F_q` and `F_{q^M}`, Frobenius powers, primitive
//!   and normal elements, and the isomorphism between extension-field vectors
//!   and ground-field coordinate matrices that defines the rank metric.
//! - [`matrix`] — exact linear algebra over both fields, super-regular matrix
//!   certification, and canonical subspace enumeration.
//! - [`codes`] — Gabidulin generators, block Hankel/Toeplitz super-regular
//!   constructions, MSR code extraction, and the column sum rank machinery
//!   (brute-force distance profiles and the determinant-based MSR
//!   verification they certify).
//! - [`stream`] — the sliding-window rank-deficient channel model, the
//!   convolutional encoder, a delay-constrained windowed decoder, and a
//!   seeded simulation harness.
//! - [`cli`] — the `msr` command-line front end.
//!
//! The guide in `book/` walks through the concepts chapter by chapter; its
//! code snippets are compiled and run as doctests (see [`book`]).

pub mod book;
pub mod cli;
pub mod codes;
pub mod gf;
pub mod matrix;
pub mod stream;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("division by zero in the field")]
    DivisionByZero,
    #[error("operand does not belong to the expected field")]
    FieldMismatch,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("factoring q^M - 1 for q={q}, M={m} exceeds the certification range")]
    FactorizationInfeasible { q: u64, m: usize },
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("element is not normal: its Frobenius conjugates are dependent")]
    NotNormal,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("generator entries must be linearly independent over the ground field")]
    DependentGenerators,
    #[error("polynomials must be linearly independent over the ground field")]
    DependentPolynomials,
    #[error("invalid row indices: {0}")]
    BadRowIndices(String),
    #[error("generator block G_0 must have full row rank")]
    SingularG0,
    #[error("enumeration needs {needed} candidates, over the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("channel blocks must be non-singular")]
    SingularChannelBlock,
    #[error("decoding window is infeasible: {0}")]
    Infeasible(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
