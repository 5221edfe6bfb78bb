//! Cellular network configuration optimization for ground users and UAV
//! corridors.
//!
//! The crate models a terrestrial deployment of sectorized base stations and
//! a 3D user population made of a ground region plus aerial corridors, then
//! optimizes per-station vertical antenna tilts, transmit powers, and the
//! user-to-cell partitioning with alternating-optimization loops driven by
//! analytic gradients.
//!
//! Modules:
//!
//! * [`channel`] — angle geometry, antenna gains, pathloss, RSS/SINR, and
//!   line-of-sight modeling between one base station and one 3D point.
//! * [`scenario`] — hexagonal deployments, region specs, and the weighted
//!   sample grid that discretizes the user density.
//! * [`partition`] — best-RSS cell assignment and exchange-based optimality
//!   verification.
//! * [`objectives`] — the four performance functions (mean RSS, mean SINR,
//!   max-product, soft max-min) and their tilt/power gradients.
//! * [`optimizer`] — the alternating-optimization loops with learning-rate
//!   decay, power projection, and convergence tracking.
//! * [`gradcheck`] — finite-difference verification of every analytic
//!   gradient.
//!
//! The crate is `no_std` compatible (`alloc` required). All evaluation is
//! deterministic: weighted sums run over fixed-size point chunks with
//! compensated summation, so parallel evaluation (feature `parallel`)
//! reproduces serial results bit-exactly.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod channel;
pub mod error;
mod exec;
pub mod gradcheck;
mod math;
pub mod objectives;
pub mod optimizer;
pub mod partition;
pub mod scenario;
pub mod sum;

pub use error::{Error, Result};
