//! Spherical environment maps assembled from multi-camera rigs, with a matted
//! foreground layer composited over a background map and reflected onto
//! virtual objects through a Fresnel-weighted mirror term.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod codec;
pub mod composite;
pub mod envmap;
pub mod error;
pub mod math;
pub mod matte;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod rig;
pub mod synthetic;
pub mod warp;

pub use error::{Error, Result};
