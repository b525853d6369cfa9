//! bevbox — bird's-eye-view object boxes with calibrated uncertainty.
//!
//! The crate covers the full pipeline around an uncertainty-estimating
//! BEV object detector:
//!
//! - [`gridmap`] — multi-layer top-view grid maps rasterized from a
//!   single range sensor, including the occlusion-height layer obtained
//!   by ray casting.
//! - [`uncert`] — the six-parameter uncertain box model (Gaussian
//!   position, log-normal dimensions, doubled-angle heading) and
//!   percentile convex hulls with bounded collision probability.
//! - [`bnn`] — MC-dropout predictive moments, heteroscedastic losses,
//!   attenuated classification loss, and a desk-scale trainable
//!   regressor exercising them end to end.
//! - [`eval`] — rotated IoU, PASCAL-style matching, 11-point average
//!   precision, and binned uncertainty analyses.
//! - [`sim`] — a synthetic-scene oracle with known noise, for
//!   calibration and recovery checks.
//! - [`io`] — KITTI labels, point-cloud binaries, grid-map files, the
//!   uncertain-box CSV, and SVG emitters.
//!
//! Every stochastic operation takes an explicit seed and draws from
//! counter-based streams ([`rng`]), so identical inputs give bit-identical
//! outputs regardless of evaluation order.

pub mod bnn;
pub mod error;
pub mod eval;
pub mod geom;
pub mod gridmap;
pub mod io;
pub mod rng;
pub mod sim;
pub mod uncert;

pub use error::{Error, Result};
pub use eval::{Class, Difficulty, LabeledObject};
pub use geom::Vec2;
pub use gridmap::{GridConfig, GridMap, PointCloud};
pub use uncert::{BoxParams, HullConfig, HullPolygon, OrientedBox, UncertainBox};

/// Default number of stochastic forward passes for MC prediction.
pub const DEFAULT_FORWARD_PASSES: usize = 15;
