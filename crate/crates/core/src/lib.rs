//! Face-type Gaudin model on elliptic curves at the critical level.
//!
//! The crate is layered bottom-up:
//!
//! * [`elliptic`]: θ₁₁, ζ₁₁ and `w_c` with analytic jets;
//! * [`liealg`]: type-A root data, irreducible and dual Verma modules;
//! * [`diffop`]: matrix-valued jets in the Cartan coordinates and
//!   finite-order differential operators over them;
//! * [`gaudin`]: the transfer matrix, its conjugate by the Weyl–Kac
//!   denominator and the commutativity residual;
//! * [`bethe`]: Bethe equations, the Newton solver, Bethe vectors,
//!   eigenvalues and the eigenvector residual.

pub mod elliptic;
pub mod liealg;
pub mod diffop;
pub mod gaudin;
pub mod bethe;

pub use num_complex::Complex64 as C64;
