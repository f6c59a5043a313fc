//! Semilinear forecasting of approximately eventually periodic signals: a
//! sparse linear autoregressive block, GRU blocks with sparsified input
//! weights, and sparse mixing of their one-step predictions.
//!
//! Pipeline stages live in [`signal`], [`sparse`], [`linear`], [`gru`],
//! [`model`] and [`spectra`]; [`experiment`] drives the `spars` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod generate;
pub mod gru;
pub mod io;
pub mod linear;
pub mod model;
pub mod persist;
pub mod signal;
pub mod sparse;
pub mod spectra;

pub use error::{Error, Result};
