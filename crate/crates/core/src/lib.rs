//! Squeezing-enhanced sideband cooling of a levitated micromagnet in a hybrid
//! cavity–magnon system.
//!
//! Everything is expressed in units of the CM trap frequency ω_c. The crate
//! is `no_std` (with `alloc`); file IO and the command line live in the
//! `magnocool` crate.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

pub mod error;
pub mod model;
pub mod presets;
pub mod spectra;
pub mod steady_state;
pub mod cooling;
pub mod sweep_opt;

pub use error::{Error, Result};
pub use model::{Mechanism, SystemParams};
