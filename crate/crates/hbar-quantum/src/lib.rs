//! Truncated formal series over U(gl_n): PBW normal forms, multi-leg tensors,
//! Drinfeld's U′ and i_Δ, and the order-ħ layer of the dynamical KZ equation
//! (twist 1-jet, quantum Stokes matrices, semiclassical checks).
//!
//! The primitive deformation parameter is sfh; ħ = 2πι·sfh.

pub mod pbw;
pub mod series;
pub mod twist;

pub use pbw::{PbwContext, PbwElement, Word};
pub use series::{hbar_factor, i_delta, scl_extract, uprime_membership, PbwTensor, SclMap, TensorSeries, UPrimeReport};
pub use twist::*;

use stokes_classical::StokesError;

#[derive(Debug, thiserror::Error)]
pub enum HbarError {
    #[error("PBW degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("not in U′: order {order} has degree {degree}")]
    NotInUPrime { order: usize, degree: usize },
    #[error("quadrature not converged (refinement gap {gap:e})")]
    QuadratureNotConverged { gap: f64 },
    #[error("twist route and direct route disagree by {gap:e}")]
    RouteMismatch { gap: f64 },
    #[error("second leg has degree {degree} at order {order}; not in U⊗U′")]
    PatternViolation { order: usize, degree: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Stokes(#[from] StokesError),
}
