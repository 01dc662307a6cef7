//! Spatio-temporal food popularity analytics over geo-tagged social media posts.
//!
//! The crate is organised as a pipeline:
//!
//! * [`data`] ingests business and post CSV files, applies recency and per-venue
//!   caps, derives hashtags and assigns each post to a time slot of the day.
//! * [`geo`] projects WGS84 coordinates into a local metric frame.
//! * [`kde`] estimates isotropic Gaussian kernel densities, selects the bandwidth
//!   by leave-one-out likelihood cross-validation, rasterizes density surfaces
//!   and extracts hot spots.
//! * [`bn`] learns linear-Gaussian Bayesian network structures over daily
//!   category counts with a BIC score and greedy hill climbing.
//! * [`synth`] generates seeded synthetic datasets with known ground truth.
//!
//! Data-parallel loops go through [`Execution`]; with the `parallel` feature
//! disabled every path runs sequentially and produces identical results.

pub mod bn;
pub mod data;
mod exec;
pub mod gazetteer;
pub mod geo;
pub mod kde;
pub mod synth;

pub use exec::Execution;
