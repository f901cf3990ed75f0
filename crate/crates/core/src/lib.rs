//! Extended-precision Dirac-Hartree-Fock for helium-like atoms in a basis of
//! Slater-type spinor orbitals with non-integer principal quantum numbers.
//!
//! The crate is layered bottom-up:
//!
//! * [`precision`]: MPFR-backed reals and special functions
//! * [`hyperradial`]: two-electron radial integrals
//! * [`basis`]: spinor construction
//! * [`integrals`]: one- and two-electron matrices
//! * [`linalg`]: Jacobi eigensolver and Löwdin orthogonalization
//! * [`scf`]: the self-consistent field iteration
//! * [`optimize`]: Nelder-Mead exponent optimization
//! * [`cli`]: configuration, orchestration and reports for `dirac-scf`

pub mod basis;
pub mod cli;
pub mod error;
pub mod hyperradial;
pub mod integrals;
pub mod linalg;
pub mod optimize;
pub mod precision;
pub mod scf;

pub use error::{Error, Result};
pub use precision::{PrecisionContext, Real};

/// Speed of light in atomic units used unless configured otherwise.
pub const DEFAULT_C: &str = "137.0359895";
