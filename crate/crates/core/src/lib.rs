//! Spin-chain thermodynamics read as two-path interference.
//!
//! The normalized magnetization `m` and susceptibility `s` of a spin chain
//! obey the same tradeoff, `m² + s ≤ 1`, as the predictability `P` and fringe
//! visibility `V` of a double slit, `P² + V² ≤ 1`. This crate computes both
//! sides:
//!
//! * [`numerics`]: stable hyperbolic kernels, band quadrature, finite differences.
//! * [`models`]: free spins, classical Ising (transfer matrix), XY and
//!   transverse-field Ising chains in the thermodynamic limit.
//! * [`observables`]: complementarity sums, interference diagnostics and
//!   critical-field detection.
//! * [`optics`]: Gaussian double slits and the thermodynamics ↔ optics maps.
//! * [`duality`]: the law `f² + αf′ = β`, its tanh solutions and inequality checks.
//! * [`oracle`]: exact diagonalization and exhaustive sums at small `N`.
//! * [`verify`]: the invariant suite behind `thermoptics verify`.
//! * [`cli`]: the `thermoptics` command-line front-end.
//!
//! ```
//! use thermoptics::models::{xy_observables, ReducedCouplings};
//! use thermoptics::numerics::QuadratureSpec;
//!
//! let obs = xy_observables(&ReducedCouplings::xy(1.0, 1.0), &QuadratureSpec::default()).unwrap();
//! assert!(obs.complementarity_sum() < 1.0);
//! ```

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod duality;
pub mod error;
pub mod grid;
pub mod models;
pub mod numerics;
pub mod observables;
pub mod optics;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
