//! Deterministic simulator and analysis toolkit for momentum federated
//! learning (MFL).
//!
//! The crate simulates three ways of minimizing a convex empirical risk that
//! is partitioned across edge nodes:
//!
//! * centralized gradient descent / momentum gradient descent on the pooled
//!   data ([`optim`]),
//! * federated learning with plain local GD steps (`fed`, algorithm `Fl`),
//! * momentum federated learning, where the local steps carry a momentum
//!   buffer and the server averages both the model and the momentum
//!   ([`fed`], algorithm `Mfl`).
//!
//! On top of the simulators, [`analysis`] implements the closed-form
//! convergence machinery: the per-interval drift envelope `h(x)`, the global
//! convergence bounds for both algorithm families, empirical estimators for
//! the smoothness/divergence constants, and the acceleration verdict that
//! compares the two bounds.
//!
//! Everything is 64-bit, single-threaded per run, and deterministic: the same
//! seed and configuration produce bit-identical results.

pub mod analysis;
pub mod data;
pub mod error;
pub mod fed;
pub mod models;
pub mod optim;
pub mod rng;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use vector::ParamVector;
