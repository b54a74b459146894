//! Experiment runner around `nhtrace-core`.
//!
//! A run takes an [`ExperimentConfig`] (TOML), executes one recipe, writes
//! plot-ready CSV tables plus `report.json` and returns the
//! [`ExperimentReport`]. Sampled spectral systems can be reused across runs
//! through the binary [`cache`]. [`acceptance`] bundles the recipe runs that
//! make up the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cache;
pub mod config;
mod error;
pub mod output;
pub mod recipes;
pub mod report;

pub use config::{ExperimentConfig, RecipeName};
pub use error::{Error, Result};
pub use recipes::{run, RunOptions};
pub use report::{Criterion, ExperimentReport};
