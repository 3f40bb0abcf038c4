//! Wave-optics simulation of topological-charge arithmetic for optical
//! vortices carried through non-degenerate four-wave mixing.
//!
//! The pipeline runs fork holograms to imprint charges on Gaussian beams,
//! mixes three beams into a signal `chi3 * E_F * E_B * conj(E_P)`, and reads
//! the signal's charge back out of an asymmetric Mach-Zehnder interferogram.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod field;
pub mod hologram;
pub mod interferometer;
pub mod io;
pub mod mixer;
pub mod pipeline;
pub mod spectral;

pub use error::{Error, Result};
