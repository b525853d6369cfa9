//! Uncertain box model and percentile convex hulls.
//!
//! A detected object is represented by the mean and variance of six
//! regression parameters: position `x`, `y`, log length, log width, and
//! `sin(2phi)`, `cos(2phi)` of the heading. Position parameters are
//! Gaussian, dimensions log-normal, and the doubled-angle encoding leaves
//! the heading distribution without a closed form, so footprint bounds are
//! obtained by sampling: rotations are swept between angle bounds derived
//! from the trig quantiles, per-rotation face extents are sampled from the
//! convolution of position and dimension uncertainty, and the convex hull
//! of all percentile corners gives a compact, conservative footprint.

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::rng::{normal_quantile, CounterRng};

/// The six regression parameters of one box.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoxParams {
    pub x: f64,
    pub y: f64,
    pub log_bl: f64,
    pub log_bw: f64,
    pub sin2phi: f64,
    pub cos2phi: f64,
}

impl BoxParams {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.x,
            self.y,
            self.log_bl,
            self.log_bw,
            self.sin2phi,
            self.cos2phi,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            log_bl: a[2],
            log_bw: a[3],
            sin2phi: a[4],
            cos2phi: a[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Mean and per-parameter variance of the box parameters plus class
/// scores. `var` reuses the component layout of [`BoxParams`], holding
/// one variance per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainBox {
    pub mean: BoxParams,
    pub var: BoxParams,
    pub class_scores: Vec<f64>,
    pub class_entropy: f64,
}

impl UncertainBox {
    pub fn new(mean: BoxParams, var: BoxParams, class_scores: Vec<f64>) -> Result<Self> {
        let entropy = class_scores
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        let u = Self {
            mean,
            var,
            class_scores,
            class_entropy: entropy,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !self.var.is_finite() {
            return Err(Error::Domain("box parameters must be finite".into()));
        }
        if self.var.as_array().iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("variances must be non-negative".into()));
        }
        if !self.class_scores.is_empty() {
            let sum: f64 = self.class_scores.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Domain(format!(
                    "class scores sum to {sum}, expected 1"
                )));
            }
        }
        if self.class_entropy < 0.0 {
            return Err(Error::Domain("class entropy must be non-negative".into()));
        }
        Ok(())
    }
}

/// A decoded rectangle in the sensor frame; `phi` in `(-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec2,
    pub length: f64,
    pub width: f64,
    pub phi: f64,
}

impl OrientedBox {
    pub fn new(center: Vec2, length: f64, width: f64, phi: f64) -> Result<Self> {
        if !(center.is_finite() && length.is_finite() && width.is_finite() && phi.is_finite()) {
            return Err(Error::Domain("box fields must be finite".into()));
        }
        if length <= 0.0 || width <= 0.0 {
            return Err(Error::Domain(format!(
                "box dimensions must be positive, got {length} x {width}"
            )));
        }
        Ok(Self {
            center,
            length,
            width,
            phi,
        })
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Vec2; 4] {
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        [
            Vec2::new(-hl, -hw),
            Vec2::new(hl, -hw),
            Vec2::new(hl, hw),
            Vec2::new(-hl, hw),
        ]
        .map(|c| self.center + c.rotated(self.phi))
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }
}

/// Convex counter-clockwise polygon with positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPolygon {
    vertices: Vec<Vec2>,
}

impl HullPolygon {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        geom::polygon_area(&self.vertices)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        geom::point_in_convex(p, &self.vertices, 1e-9)
    }

    pub fn contains_polygon(&self, other: &HullPolygon) -> bool {
        geom::polygon_contains(&self.vertices, &other.vertices, 1e-9)
    }
}

/// Parameters of the hull construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullConfig {
    /// Upper percentile of the face extents, in `(0.5, 1)`.
    pub percentile: f64,
    /// Number of equidistant rotation samples between the angle bounds.
    pub n_rotations: usize,
    /// Monte-Carlo draws per face distribution.
    pub n_mc_samples: usize,
    pub rng_seed: u64,
}

impl Default for HullConfig {
    fn default() -> Self {
        Self {
            percentile: 0.95,
            n_rotations: 7,
            n_mc_samples: 10_000,
            rng_seed: 0,
        }
    }
}

impl HullConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.percentile > 0.5 && self.percentile < 1.0) {
            return Err(Error::Config(format!(
                "percentile must be in (0.5, 1), got {}",
                self.percentile
            )));
        }
        if self.n_rotations < 1 {
            return Err(Error::Config("n_rotations must be at least 1".into()));
        }
        if self.n_mc_samples < 100 {
            return Err(Error::Config("n_mc_samples must be at least 100".into()));
        }
        Ok(())
    }
}

/// Bin count of the face-extent histograms.
pub const HISTOGRAM_BINS: usize = 256;

/// Fixed-width histogram over the sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    min: f64,
    max: f64,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("histogram needs samples".into()));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &s in samples {
            min = min.min(s);
            max = max.max(s);
        }
        let mut counts = vec![0u64; HISTOGRAM_BINS];
        if max > min {
            let inv_width = HISTOGRAM_BINS as f64 / (max - min);
            for &s in samples {
                let bin = (((s - min) * inv_width) as usize).min(HISTOGRAM_BINS - 1);
                counts[bin] += 1;
            }
        } else {
            counts[0] = samples.len() as u64;
        }
        Ok(Self {
            min,
            max,
            counts,
            total: samples.len() as u64,
        })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Quantile by linear interpolation inside the containing bin.
    pub fn quantile(&self, p: f64) -> f64 {
        if self.max <= self.min {
            return self.min;
        }
        let target = p.clamp(0.0, 1.0) * self.total as f64;
        let bin_width = (self.max - self.min) / HISTOGRAM_BINS as f64;
        let mut cum = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            let next = cum + c as f64;
            if next >= target && c > 0 {
                let frac = ((target - cum) / c as f64).clamp(0.0, 1.0);
                return self.min + (i as f64 + frac) * bin_width;
            }
            cum = next;
        }
        self.max
    }

    /// Mean and variance of the binned distribution (bin centers).
    pub fn moments(&self) -> (f64, f64) {
        if self.max <= self.min {
            return (self.min, 0.0);
        }
        let bin_width = (self.max - self.min) / HISTOGRAM_BINS as f64;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            let center = self.min + (i as f64 + 0.5) * bin_width;
            sum += c as f64 * center;
            sq += c as f64 * center * center;
        }
        let mean = sum / self.total as f64;
        (mean, (sq / self.total as f64 - mean * mean).max(0.0))
    }
}

/// Encode a box into the six regression parameters.
pub fn encode_box(b: &OrientedBox) -> Result<BoxParams> {
    if b.length <= 0.0 || b.width <= 0.0 {
        return Err(Error::Domain("box dimensions must be positive".into()));
    }
    let two_phi = 2.0 * b.phi;
    Ok(BoxParams {
        x: b.center.x,
        y: b.center.y,
        log_bl: b.length.ln(),
        log_bw: b.width.ln(),
        sin2phi: two_phi.sin(),
        cos2phi: two_phi.cos(),
    })
}

/// Decode the median box: mean position, median (`exp` of the mean log)
/// dimensions, and the heading recovered from the trig channels.
pub fn decode_median(u: &UncertainBox) -> Result<OrientedBox> {
    u.validate()?;
    if u.mean.sin2phi == 0.0 && u.mean.cos2phi == 0.0 {
        return Err(Error::OrientationUndefined);
    }
    let phi = 0.5 * u.mean.sin2phi.atan2(u.mean.cos2phi);
    OrientedBox::new(
        Vec2::new(u.mean.x, u.mean.y),
        u.mean.log_bl.exp(),
        u.mean.log_bw.exp(),
        phi,
    )
}

/// Lower/upper heading bounds from the trig-channel Gaussian quantiles.
///
/// The quantiles of `sin(2phi)` and `cos(2phi)` at `(1 - percentile,
/// percentile)` are clamped to the valid trig range `[-1, 1]`, then
/// `phi_min = atan2(sin_lo, cos_hi) / 2` and
/// `phi_max = atan2(sin_hi, cos_lo) / 2`, ordered so `phi_min <= phi_max`.
pub fn phi_bounds(u: &UncertainBox, percentile: f64) -> Result<(f64, f64)> {
    if !(percentile > 0.5 && percentile < 1.0) {
        return Err(Error::Config(format!(
            "percentile must be in (0.5, 1), got {percentile}"
        )));
    }
    if u.var.sin2phi < 0.0 || u.var.cos2phi < 0.0 {
        return Err(Error::Domain("trig variances must be non-negative".into()));
    }
    let z = normal_quantile(percentile);
    let sin_lo = (u.mean.sin2phi - z * u.var.sin2phi.sqrt()).clamp(-1.0, 1.0);
    let sin_hi = (u.mean.sin2phi + z * u.var.sin2phi.sqrt()).clamp(-1.0, 1.0);
    let cos_lo = (u.mean.cos2phi - z * u.var.cos2phi.sqrt()).clamp(-1.0, 1.0);
    let cos_hi = (u.mean.cos2phi + z * u.var.cos2phi.sqrt()).clamp(-1.0, 1.0);
    if (sin_lo == 0.0 && cos_hi == 0.0) || (sin_hi == 0.0 && cos_lo == 0.0) {
        return Err(Error::DegenerateQuantiles);
    }
    let a = 0.5 * sin_lo.atan2(cos_hi);
    let b = 0.5 * sin_hi.atan2(cos_lo);
    Ok(if a <= b { (a, b) } else { (b, a) })
}

/// Per-face extent histograms at a fixed rotation.
///
/// The position covariance `diag(var_x, var_y)` is rotated by `-phi` into
/// the box frame; its diagonal gives the along-length and along-width
/// position spread. Each extent sample convolves a log-normal dimension
/// draw with twice the folded box-frame position offset, so the upper
/// percentile of the histogram is an extent that absorbs both dimension
/// and position uncertainty on either face.
///
/// Draws come from `(cfg.rng_seed)` alone; every rotation scales the same
/// underlying normal variates, which keeps hulls at different percentiles
/// nested for a fixed seed.
pub fn face_distributions(
    u: &UncertainBox,
    phi: f64,
    cfg: &HullConfig,
) -> Result<(Histogram, Histogram)> {
    cfg.validate()?;
    let (s, c) = phi.sin_cos();
    // diagonal of R(-phi) diag(var_x, var_y) R(-phi)^T
    let var_long = c * c * u.var.x + s * s * u.var.y;
    let var_lat = s * s * u.var.x + c * c * u.var.y;
    let (std_long, std_lat) = (var_long.sqrt(), var_lat.sqrt());
    let (std_log_bl, std_log_bw) = (u.var.log_bl.sqrt(), u.var.log_bw.sqrt());

    let mut rng = CounterRng::new(cfg.rng_seed, 0);
    let n = cfg.n_mc_samples;
    let mut bl = Vec::with_capacity(n);
    let mut bw = Vec::with_capacity(n);
    for _ in 0..n {
        let (n1, n2, n3, n4) = (rng.normal(), rng.normal(), rng.normal(), rng.normal());
        bl.push((u.mean.log_bl + std_log_bl * n1).exp() + 2.0 * (std_long * n2).abs());
        bw.push((u.mean.log_bw + std_log_bw * n3).exp() + 2.0 * (std_lat * n4).abs());
    }
    Ok((Histogram::from_samples(&bl)?, Histogram::from_samples(&bw)?))
}

/// Corner points of the percentile box: the upper-percentile extents of
/// both face histograms, centered on the mean position, rotated by `phi`
/// and returned in the sensor frame (counter-clockwise).
pub fn percentile_corners(
    hist_bl: &Histogram,
    hist_bw: &Histogram,
    center: Vec2,
    phi: f64,
    percentile: f64,
) -> [Vec2; 4] {
    let hl = hist_bl.quantile(percentile).max(0.0) / 2.0;
    let hw = hist_bw.quantile(percentile).max(0.0) / 2.0;
    [
        Vec2::new(-hl, -hw),
        Vec2::new(hl, -hw),
        Vec2::new(hl, hw),
        Vec2::new(-hl, hw),
    ]
    .map(|v| center + v.rotated(phi))
}

/// Build the percentile hull of an uncertain box.
///
/// Rotations are sampled equidistantly (inclusive) between the
/// [`phi_bounds`] at the configured percentile; the median heading is
/// always included so the hull covers the median box even when the trig
/// quantile bounds exclude it. The hull is the convex hull of all
/// percentile corners, deterministic for a given `(box, config)`.
pub fn build_hull(u: &UncertainBox, cfg: &HullConfig) -> Result<HullPolygon> {
    cfg.validate()?;
    u.validate()?;
    let median = decode_median(u)?;
    let (phi_min, phi_max) = phi_bounds(u, cfg.percentile)?;

    let mut rotations = Vec::with_capacity(cfg.n_rotations + 1);
    if cfg.n_rotations == 1 {
        rotations.push(0.5 * (phi_min + phi_max));
    } else {
        let step = (phi_max - phi_min) / (cfg.n_rotations - 1) as f64;
        for k in 0..cfg.n_rotations {
            rotations.push(phi_min + step * k as f64);
        }
    }
    rotations.push(median.phi);

    let center = Vec2::new(u.mean.x, u.mean.y);
    let mut corners = Vec::with_capacity(4 * rotations.len());
    for &phi in &rotations {
        let (hist_bl, hist_bw) = face_distributions(u, phi, cfg)?;
        corners.extend(percentile_corners(
            &hist_bl,
            &hist_bw,
            center,
            phi,
            cfg.percentile,
        ));
    }
    convex_hull(&corners)
}

/// Convex hull of arbitrary points as a [`HullPolygon`].
pub fn convex_hull(points: &[Vec2]) -> Result<HullPolygon> {
    let vertices = geom::convex_hull(points)?;
    Ok(HullPolygon { vertices })
}
