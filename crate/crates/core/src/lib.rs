//! Computational machinery for Favard-length and visibility experiments.
//!
//! The library is organized around a few concrete representations:
//!
//! * [`geom`]: points, grid-aligned cell sets, interval and arc unions,
//!   rasterization and Minkowski-sum sweeps;
//! * [`fractal`]: similarity iterated function systems and their finite
//!   generations (four-corner Cantor sets, linear Cantor sets);
//! * [`measure`]: cell-supported measures, Riesz energies, pushforwards,
//!   Frostman diagnostics, and ball-averaged auxiliary measures;
//! * [`family`]: one-parameter projection families (orthogonal, radial,
//!   curve-translation, surface-translation), transversality estimation,
//!   and tube-condition checks for vantage sets;
//! * [`favard`]: three independent length estimators (parameter integral,
//!   Minkowski-sum raster, Buffon-style Monte Carlo), visibility integrals,
//!   directional shadows, and box-dimension experiments;
//! * [`fit`]: decay-law fitting for experiment tables.
//!
//! All randomized routines draw from a single 64-bit seed expanded through
//! counter-based streams, and every parallel reduction runs in a fixed
//! order, so results are byte-identical across thread counts.

// Validation guards are written `!(x > 0.0)` on purpose: the negation is
// what rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod family;
pub mod favard;
pub mod fit;
pub mod fractal;
pub mod geom;
pub mod measure;
pub mod rng;

pub use error::{Error, Result};
