//! Link-level math for the uplink of an interference-limited cellular MIMO
//! system with a linear MMSE receiver.
//!
//! The crate is organized around one Monte Carlo trial: draw a quasi-static
//! channel realization ([`model`]), run the MMSE receiver on it and compute
//! per-stream SINRs, mutual information, and the associated bound quantities
//! ([`receiver`]), then aggregate trials into outage curves and empirical
//! diversity slopes ([`analysis`]). [`numerics`] holds the small dense
//! complex-matrix kernels and the reproducible per-trial random substreams
//! everything else is built on.
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature (on by
//! default) only switches float intrinsics to the hardware paths where that
//! cannot change results. All transcendental math goes through `libm`, so a
//! fixed seed produces bit-identical samples on every platform.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
mod math;
pub mod model;
pub mod numerics;
pub mod receiver;
