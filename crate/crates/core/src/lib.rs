//! Simulation and analysis toolkit for the two-species pyramid spin lattice.
//!
//! A single polarized spin at the apex of a corner-cut crystal is amplified by
//! a cellular automaton that applies field-conditioned NOT pulses alternately to
//! the two nuclear species. The crate provides:
//!
//! * [`lattice`]: the pyramid site set, its bipartite neighbor topology, Bravais
//!   geometry and dipolar couplings.
//! * [`automaton`]: the bit-packed spin state and the flip rule, with a
//!   wavefront-restricted scan.
//! * [`noise_mc`]: the non-coherent Monte Carlo harness (imperfect polarization,
//!   gate omissions, spin diffusion, planted-error analysis).
//! * [`spectrum`]: secular stick spectra of a probed spin and an addressability
//!   score.
//! * [`cli_io`]: configuration documents, CSV/JSON emission and run manifests.

pub mod automaton;
pub mod cli_io;
pub mod error;
pub mod lattice;
pub mod noise_mc;
pub mod spectrum;

pub use error::{Error, Result};
