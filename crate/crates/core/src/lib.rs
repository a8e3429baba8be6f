//! Connection states and weak values of pre- and post-selected quantum
//! ensembles.
//!
//! A preparation `ρ` followed by a post-selection on the effect `E` is
//! summarized by the connection state `w = ρE / Tr(ρE)`. Weak values are
//! `A_w = Tr(A w)`. Around that object the crate provides:
//!
//! - [`qmcore`]: validated matrices, states, effects, observables.
//! - [`connection`]: `w`, its Hermitian and anti-Hermitian parts,
//!   usual/unusual classification, posterior families.
//! - [`measurement`]: Born and ABL probabilities, gated strong-PPS shortcut.
//! - [`meter`]: a finite von Neumann meter model and the weak limit.
//! - [`dynamics`]: piecewise-constant Hamiltonians, `w(t)`, pictures.
//! - [`tomography`]: reconstruction of `w` and of unknown detectors.
//! - [`scenario`]: named, seeded parameter scans used by the `ppslab` binary.

pub mod connection;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod meter;
pub mod qmcore;
pub mod random;
pub mod scenario;
pub mod tomography;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
