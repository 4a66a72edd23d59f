//! Numerics for the restricted fourth-order Prandtl equation on the half-line
//!
//! ```text
//! a_t = -a_yyyy + a^2 - a_y ∫_0^y a,   a(t,0) = a_y(t,0) = 0,
//! ```
//!
//! built on the clamped biharmonic heat kernel.
//!
//! * [`kernel`]: kernel profiles by oscillatory quadrature, row integrals.
//! * [`semigroup`]: dense grid operators `∂_x^m S(t)` and their properties.
//! * [`solver`]: Duhamel-based exponential integrator with blow-up detection.
//! * [`diagnostics`]: energy functionals, dissipation, Riccati bound, norms.

pub mod datum;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod semigroup;
pub mod solver;
pub mod stencil;

pub use diagnostics::EnergyReport;
pub use error::{Error, Result};
pub use grid::{Grid, Profile};
pub use kernel::{KernelKind, PhiKind, QuadratureSpec};
pub use semigroup::{KernelOperator, OperatorCache};
pub use solver::{EvolutionTrace, SolverConfig, Termination};
