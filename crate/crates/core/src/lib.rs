//! Simulation and analysis core for time-bin entanglement quantum key
//! distribution.
//!
//! The crate is `no_std` (with `alloc`) and covers every stage that does not
//! touch the filesystem:
//!
//! * [`source`]: entangled-pair emission and per-party detector impairments
//!   (loss, Gaussian jitter, dark counts, non-paralyzable dead time).
//! * [`binning`]: framing of time tags into pulse-position-modulation symbols,
//!   public sifting, and symbol-to-bit mapping.
//! * [`info`]: mutual-information estimation, the uniform-offset jitter rate
//!   curve, downtime Markov chains and the bin-count sweep.
//! * [`reconcile`]: syndrome-based one-way reconciliation with regular LDPC
//!   codes and multilevel belief-propagation decoding.
//! * [`privacy`]: Toeplitz hashing and the output-length budget.
//!
//! Every randomized operation takes an explicit `u64` seed and is a pure
//! function of its inputs.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod binning;
pub mod bits;
mod error;
pub mod info;
pub mod privacy;
pub mod reconcile;
pub mod rng;
pub mod source;

pub use error::{Error, Result};
