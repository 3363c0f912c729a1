//! Contour maps of latent Gaussian fields with quantified uncertainty.
//!
//! The crate builds sparse Matérn precision models on triangulated domains,
//! evaluates Gaussian rectangle probabilities by sequential conditioning,
//! and uses them for the quality measures P0, P1 and P2 of a contour map,
//! the contour map function F and credible contour-avoiding sets. F can be
//! interpolated between mesh nodes by step, linear or log interpolation.
//!
//! Runnable examples (`cargo run --release --example <name>`):
//!
//! - `matern_field`: precision construction, marginal variances, sampling
//! - `kriging`: conditioning on noisy point observations
//! - `rectangle_probability`: sequential-conditioning integration against closed forms
//! - `two_point_oracle`: exact F for two nodes against the interpolations
//! - `quality_measures`: P0/P1/P2 table for standard and pretty levels
//! - `select_levels`: choosing the number of levels for a target P2
//! - `credible_regions`: credible sets with GeoJSON and SVG export
//! - `coverage_study`: empirical coverage of credible regions
//!
//! The `contourmap` binary wraps the same functionality; see [`cli`].

pub mod cholesky;
pub mod cli;
pub mod error;
pub mod export;
pub mod gmrf;
pub mod interp;
pub mod levels;
pub mod matern;
pub mod measures;
pub mod mesh;
pub mod normal;
pub mod prob;
pub mod rng;
pub mod sim;
pub mod sparse;
pub mod twopoint;

pub use error::{Error, Result};
