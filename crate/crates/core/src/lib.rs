//! Numerical verification of weak-L² admissibility for diagonal semigroups.
//!
//! The crate is organised bottom-up:
//!
//! * [`lorentz`] computes distribution functions, decreasing rearrangements and
//!   `L^{p,q}` quasi-norms of step functions exactly.
//! * [`quadrature`] integrates the singular and oscillatory kernels that show
//!   up in the counterexample, and evaluates Γ on `(0, 2]`.
//! * [`semigroup`] simulates diagonal observation systems: orbits `CT(t)x`,
//!   resolvents `C(λ+A)^{-1}x`, Weiss quotients and decay profiles.
//! * [`counterexample`] builds the conditional-basis witness whose observed
//!   orbit lies in `L^{2,∞}` but in no `L^{2,q}` with `q < ∞`.
//! * [`report`] and [`suites`] turn checks into CSV tables and a JSON summary.

pub mod counterexample;
mod error;
pub(crate) mod exact;
pub mod lorentz;
pub mod quadrature;
pub mod report;
pub mod semigroup;
pub mod suites;

pub use error::{Error, Result};
