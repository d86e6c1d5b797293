//! Exact solution family of the quantum harmonic oscillator with a
//! time-dependent frequency, expressed through a positive width function
//! `σ(t)`: densities, velocity fields, wave functions, rank-2 and rank-4
//! Wigner functions, energy spectra and residual checks of the transport
//! equations they satisfy.
//!
//! Everything is built on [`dynamics::SigmaState`], the triple `(σ, σ̇, σ̈)`
//! (plus `σ⃛` where the rank-2 potential needs it) at one instant.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod highrank;
pub mod polynomials;
pub mod quadrature;
pub mod report;
pub mod spectrum;
pub mod vlasov;
pub mod wavefunction;
pub mod wigner;

pub use dynamics::{PhysicalParams, SigmaDriver, SigmaHistory, SigmaState};
pub use error::{Error, Result};
pub use polynomials::PolyOrder;
pub use quadrature::{Axis, GridSpec};
pub use report::ResidualReport;
