//! Block tridiagonal reduction of almost normal matrices.
//!
//! A matrix `A` is `k`-almost normal when `A^H A − A A^H = C A − A C` for some
//! `C` of rank `k`. For such matrices the block Lanczos process applied to
//! the Hermitian part `A_H`, started from a block built from `C`, produces a
//! unitary `U` for which `U^H A U` is block tridiagonal with small blocks.
//!
//! * [`matcore`]: dense complex matrices, Jacobi SVD, Householder QR.
//! * [`lanczos`]: block Lanczos with restarts and Krylov inclusion checks.
//! * [`almostnormal`]: certificates, starting blocks, conic fitting.
//! * [`generators`]: seeded test families.
//! * [`structure`]: block profiles and rank tracking under shifted QR.
//! * [`interchange`]: Matrix Market files and spy patterns.

pub mod almostnormal;
pub mod error;
pub mod generators;
pub mod interchange;
pub mod lanczos;
pub mod matcore;
pub mod structure;

pub use error::{Error, Result};
pub use lanczos::{block_lanczos, BlockTridiagonalization, BreakdownEvent};
pub use matcore::{c64, ComplexMatrix};
