//! Random Liouville functions `λ_Q`, their negative sets `A_Q`, empirical
//! normality statistics, and diophantine equations inside normal sets.
//!
//! Module map:
//!
//! * [`sieve`]: smallest-prime-factor table, factorizations, squarefree
//!   kernels, offset specs `(i_1 < ... < i_k)` and their divisor sets;
//! * [`sign`]: seed-keyed prime signs, `λ_Q` and `A_Q`;
//! * [`bitset`]: the membership bitset shared by sets and sign sequences;
//! * [`normality`]: word frequencies, correlation sums, discrepancy, trends;
//! * [`pair_square`]: square classes and exact `E(T_N^2)`;
//! * [`equations`]: solvers and exhaustive refuters;
//! * [`nset`], [`run`]: file format, run configs and reports.

pub mod bitset;
pub mod equations;
pub mod error;
pub mod normality;
pub mod nset;
pub mod pair_square;
pub mod run;
pub mod sieve;
pub mod sign;

pub use bitset::SetBitset;
pub use error::{Error, Result};
pub use sieve::{OffsetSpec, SpfTable};
pub use sign::{SignAssignment, SignMode, SignedSequence};
