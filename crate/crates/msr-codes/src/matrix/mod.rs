//! Linear algebra over `F_q` and `F_{q^M}`.
//!
//! [`GroundMatrix`] covers rank, inversion, kernels, and sampling over the
//! prime field; [`ExtMatrix`] adds determinants, trivial-determinant
//! detection, and super-regularity certification over the extension field;
//! [`enumerate_subspaces`] produces the canonical channel maps used by the
//! code-verification machinery.

mod ext;
mod ground;
mod subspace;

pub use ext::{row_vec_mul, row_vec_mul_ground, ExtMatrix, SuperRegularity, DEFAULT_MINOR_CAP};
pub use ground::{random_full_rank, random_invertible, GroundMatrix};
pub use subspace::{enumerate_subspaces, gaussian_binomial};
