//! Distinguishability quantifiers and non-Markovianity measures for a qubit
//! under spin-boson pure dephasing.
//!
//! The crate is organized bottom-up:
//!
//! - [`qubit`]: 2×2 density matrices, Bloch parametrization, random states
//!   and channels, the dephasing map.
//! - [`quantifiers`]: trace distance, Jensen-Shannon, quantum and Holevo skew
//!   divergences, and the constants of their triangle-like inequalities.
//! - [`dephasing`]: the decoherence function Γ(t) for an underdamped
//!   Lorentzian spectral density, as a Matsubara-summed closed form and as a
//!   quadrature oracle.
//! - [`nonmarkov`]: distinguishability trajectories, revival windows and the
//!   non-Markovianity measure.
//! - [`checks`]: seeded property suites shared by the test-suite and the
//!   `check` subcommand.
//! - [`cli`]: configuration and the subcommands of the `memoryflow` binary.

pub mod checks;
pub mod cli;
pub mod dephasing;
mod error;
pub mod nonmarkov;
pub mod quantifiers;
pub mod qubit;

pub use error::{Error, Result};
