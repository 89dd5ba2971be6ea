//! Coherent states for the Kronecker product SU(1,1) x SU(1,1) in truncated
//! four-mode Fock space.
//!
//! The crate constructs pair coherent states (simultaneous eigenstates of the
//! two-mode annihilation product `ab` and the photon-number difference) and
//! their four-mode generalization, the bi-pair coherent states: joint
//! eigenstates of `K^- = ab + cd`, both factor Casimirs, and the total
//! Casimir. On top of the state constructions it provides
//!
//! - the positive-discrete-series Clebsch-Gordan coefficients coupling the
//!   two factors, both in closed form and from a brute-force lowest-weight
//!   construction ([`cg`]),
//! - photon statistics of the coupled states: single-mode marginals, Mandel Q,
//!   pair-count distributions and their sub-Poissonian behavior ([`stats`]),
//! - the analytic overlap kernel on the pair-coherent-state basis and its
//!   defining differential equations ([`states`]),
//! - the resolution of identity over each charge sector ([`states`]),
//! - a master equation for two-photon absorption competing with four-wave
//!   mixing, whose steady states are exactly the bi-pair coherent states
//!   ([`dynamics`]).
//!
//! Runnable demonstrations of each capability live in `examples/`; the
//! `bipair` binary exposes the same functionality as CSV-producing
//! subcommands.

pub mod cg;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod output;
pub mod quad;
pub mod scan;
pub mod specfun;
pub mod states;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
