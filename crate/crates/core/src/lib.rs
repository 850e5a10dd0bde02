//! Krylov complexity of exactly solvable quantum systems.
//!
//! Moments, Lanczos coefficients and Krylov amplitudes for the sixteen
//! systems whose sinusoidal coordinate closes under double commutation with
//! the Hamiltonian: ten finite discrete systems built on Askey-scheme
//! polynomials, two infinite discrete systems (Meixner, Charlier) and four
//! one-dimensional systems (Hermite, Laguerre, Gegenbauer, Jacobi).
//!
//! All computations run either in exact rational arithmetic or in big-float
//! arithmetic at a configurable number of decimal digits; see [`numeric`].

pub mod catalog;
pub mod dynamics;
pub mod lanczos_chain;
pub mod moments;
pub mod numeric;
pub mod operator_space;
pub mod parallel;
pub mod verification;

pub use catalog::{SystemKind, SystemSpec};
pub use numeric::{Complex, Mode, Scalar, Tolerance};
pub use parallel::Execution;
