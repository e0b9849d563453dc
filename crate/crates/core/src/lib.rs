//! Skill-text career classification.
//!
//! The crate is `no_std` (with `alloc`) and does no IO: survey rows, the taxonomy
//! and stop-word lists come in as values or strings, trained models go out as
//! serde-serializable parameter sets.
//!
//! Pipeline: [`corpus`] cleans survey rows into labeled documents, [`textprep`]
//! turns them into count vectors and a stratified split, [`classical`] and
//! [`neural`] hold the eight classifiers, and [`eval`] scores predictions.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod classical;
pub mod corpus;
mod dataset;
pub mod error;
pub mod eval;
pub mod model;
pub mod neural;
pub mod numkit;
pub mod textprep;

pub use dataset::{Dataset, Prediction};
pub use error::{Error, Result};
