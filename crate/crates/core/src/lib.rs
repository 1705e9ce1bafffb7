//! Exact computations in the modular Witt algebra W1 over a prime field F_p
//! (p > 3): Lie bracket, restricted p-th power, the nilpotent cone with three
//! independent membership criteria, the automorphism group action, and the
//! constructive two-class classification of Borel subalgebras. A small
//! Jacobson-Witt (W_n) layer supports Cartan subalgebra checks and a seeded
//! explorer for maximal solvable subalgebras.
//!
//! All arithmetic is exact; nothing here uses floating point.

pub mod aut;
pub mod borel;
pub mod codec;
pub mod field;
pub mod jacobson;
pub mod linalg;
pub mod nilcone;
pub mod stream;
pub mod trunc;
pub mod witt;

pub use aut::{AutError, Automorphism};
pub use borel::{BorelClass, BorelError, BorelTag, Subalgebra};
pub use codec::ParseError;
pub use field::{FieldError, FpScalar, Prime};
pub use nilcone::{ConeError, ConeReport, NilpotencyMethod, NormalForm};
pub use trunc::{TruncError, TruncPoly};
pub use witt::{WittElement, WittError};
