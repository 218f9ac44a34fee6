//! Simulation and estimation toolkit for distributed sensing with networks of
//! conditionally displaced mechanical oscillators prepared in a W state.
//!
//! The crate is organised bottom-up:
//!
//! - [`probe`]: network configuration, initial state, and the two sensing
//!   cases that reduce the stroboscopic state to relative phases.
//! - [`dynamics`]: exact branch-form time evolution at arbitrary `τ`.
//! - [`entanglement`]: linear entropy between the probe subsystems and the
//!   mechanical modes.
//! - [`estimation`]: quantum Fisher information matrix, its closed-form
//!   inverse, and finite-difference cross-checks.
//! - [`measurement`]: Gram–Schmidt projective basis, classical Fisher
//!   information, SLD eigenbasis and weak commutativity.
//! - [`oracle`]: brute-force truncated-Fock evolution used to validate the
//!   closed forms.
//! - [`platforms`]: SI-unit bounds for concrete optomechanical and
//!   spin-mechanical platforms, plus the figure sweeps.
//! - [`sampler`]: Monte Carlo measurement records and maximum-likelihood
//!   estimation.
//!
//! Node indices are zero-based throughout: node `0` is the reference node whose
//! branch carries the gauge-fixed phase, and parameter `p` of a [`PhaseSet`]
//! belongs to node `p + 1`.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod estimation;
pub mod measurement;
pub mod oracle;
pub mod platforms;
pub mod probe;
pub mod sampler;

pub use num_complex::Complex64 as C64;

pub use dynamics::BranchState;
pub use error::{Error, Result};
pub use estimation::{FisherKind, FisherMatrix};
pub use measurement::ProjectorSet;
pub use oracle::FockState;
pub use platforms::PlatformPreset;
pub use probe::{Case, NetworkConfig, PhaseSet};
