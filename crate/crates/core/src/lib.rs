//! Joint control, sensing and communication co-design for a centralized
//! wireless networked control system operating under URLLC requirements.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: plant placement, large-scale fading and SINR models.
//! - [`rates`]: finite-blocklength rates and the Gaussian sensing constraint.
//! - [`control_cost`]: Riccati pair, rate-cost bound and the closed-form LQR cost.
//! - [`energy`]: round-trip energy models and maximum-energy normalizers.
//! - [`ece`]: the energy-to-control efficiency metrics (GECE and FECE).
//! - [`optimizer`]: Dinkelbach / bisection max-min resource allocation.
//! - [`harness`]: configuration, Monte-Carlo experiments and result files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod control_cost;
pub mod ece;
pub mod energy;
mod error;
pub mod harness;
pub mod optimizer;
pub mod rates;
pub mod system;

pub use error::{Error, Result};
