//! Synthetic-scene oracle: ground-truth boxes and noisy detections drawn
//! from known parameter distributions, so hull coverage, predictive
//! moments and the metric pipeline can be validated against analytic
//! truth.
//!
//! Detections carry the *true* noise variances in their uncertainty
//! fields, which isolates hull and metric correctness from estimator
//! quality.

use crate::error::{Error, Result};
use crate::eval::{Class, LabeledObject};
use crate::geom::Vec2;
use crate::gridmap::{PointCloud, PointXyzi};
use crate::rng::CounterRng;
use crate::uncert::{encode_box, BoxParams, OrientedBox, UncertainBox};

/// Height of the simulated sensor above ground. Clouds are emitted in the
/// sensor frame (origin at the sensor), so the ground plane sits at
/// `-SENSOR_HEIGHT`.
pub const SENSOR_HEIGHT: f64 = 1.73;

/// Camera focal length used to synthesize image bbox heights.
const FOCAL_PX: f64 = 721.5377;

/// A standard deviation (or rate) as a linear function of distance,
/// clamped to be non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceFn {
    pub base: f64,
    pub slope: f64,
}

impl DistanceFn {
    pub const fn new(base: f64, slope: f64) -> Self {
        Self { base, slope }
    }

    pub const fn constant(value: f64) -> Self {
        Self {
            base: value,
            slope: 0.0,
        }
    }

    pub fn eval(&self, distance: f64) -> f64 {
        (self.base + self.slope * distance).max(0.0)
    }

    pub fn rate(&self, distance: f64) -> f64 {
        self.eval(distance).clamp(0.0, 1.0)
    }
}

/// Per-parameter noise as a function of distance plus detection failure
/// rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_x: DistanceFn,
    pub sigma_y: DistanceFn,
    pub sigma_log_bl: DistanceFn,
    pub sigma_log_bw: DistanceFn,
    pub sigma_sin2phi: DistanceFn,
    pub sigma_cos2phi: DistanceFn,
    /// Expected false positives per frame.
    pub false_positive_rate: f64,
    /// Miss probability as a function of distance, clamped to `[0, 1]`.
    pub miss_rate: DistanceFn,
}

impl NoiseModel {
    /// Exact detections: no noise, no misses, no false positives.
    pub fn zero() -> Self {
        Self {
            sigma_x: DistanceFn::constant(0.0),
            sigma_y: DistanceFn::constant(0.0),
            sigma_log_bl: DistanceFn::constant(0.0),
            sigma_log_bw: DistanceFn::constant(0.0),
            sigma_sin2phi: DistanceFn::constant(0.0),
            sigma_cos2phi: DistanceFn::constant(0.0),
            false_positive_rate: 0.0,
            miss_rate: DistanceFn::constant(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.sigma_x,
            self.sigma_y,
            self.sigma_log_bl,
            self.sigma_log_bw,
            self.sigma_sin2phi,
            self.sigma_cos2phi,
        ];
        if sigmas.iter().any(|s| s.base < 0.0 || !s.base.is_finite()) {
            return Err(Error::Config("noise base std-devs must be >= 0".into()));
        }
        if !(0.0..=60.0).contains(&self.false_positive_rate) {
            return Err(Error::Config("false-positive rate out of range".into()));
        }
        Ok(())
    }

    /// True per-parameter standard deviations at a distance, in the box
    /// parameter component order.
    pub fn sigmas_at(&self, distance: f64) -> [f64; 6] {
        [
            self.sigma_x.eval(distance),
            self.sigma_y.eval(distance),
            self.sigma_log_bl.eval(distance),
            self.sigma_log_bw.eval(distance),
            self.sigma_sin2phi.eval(distance),
            self.sigma_cos2phi.eval(distance),
        ]
    }
}

impl Default for NoiseModel {
    /// Distance-increasing noise roughly matching a mid-range lidar
    /// detector; position noise dominates dimension noise.
    fn default() -> Self {
        Self {
            sigma_x: DistanceFn::new(0.10, 0.004),
            sigma_y: DistanceFn::new(0.10, 0.004),
            sigma_log_bl: DistanceFn::new(0.02, 0.0008),
            sigma_log_bw: DistanceFn::new(0.02, 0.0008),
            sigma_sin2phi: DistanceFn::new(0.02, 0.0008),
            sigma_cos2phi: DistanceFn::new(0.02, 0.0008),
            false_positive_rate: 0.5,
            miss_rate: DistanceFn::new(0.02, 0.002),
        }
    }
}

/// Rectangular placement region in BEV coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x_min: 4.0,
            x_max: 56.0,
            y_min: -26.0,
            y_max: 26.0,
        }
    }
}

/// How object centers are drawn inside the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Uniform over the region area.
    UniformArea,
    /// Uniform in sensor distance (useful for per-distance-bin statistics).
    UniformDistance,
}

/// Scene generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub n_frames: usize,
    pub mean_cars: f64,
    pub mean_pedestrians: f64,
    pub mean_cyclists: f64,
    pub region: Region,
    pub placement: Placement,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            n_frames: 10,
            mean_cars: 6.0,
            mean_pedestrians: 2.0,
            mean_cyclists: 1.0,
            region: Region::default(),
            placement: Placement::UniformArea,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mean_cars < 0.0 || self.mean_pedestrians < 0.0 || self.mean_cyclists < 0.0 {
            return Err(Error::Config("object counts must be >= 0".into()));
        }
        if self.region.x_max <= self.region.x_min || self.region.y_max <= self.region.y_min {
            return Err(Error::Config("placement region must be non-empty".into()));
        }
        // clouds must rasterize into the standard grid extent
        let grid = crate::gridmap::GridConfig::default();
        if self.region.x_min < grid.x_min
            || self.region.x_max > grid.x_max
            || self.region.y_min < grid.y_min
            || self.region.y_max > grid.y_max
        {
            return Err(Error::Config(format!(
                "placement region [{}, {}] x [{}, {}] leaves the grid extent",
                self.region.x_min, self.region.x_max, self.region.y_min, self.region.y_max
            )));
        }
        Ok(())
    }
}

/// A ground-truth object with the attributes the label formats need.
#[derive(Debug, Clone, PartialEq)]
pub struct SimObject {
    pub object: LabeledObject,
    /// 3-D object height in meters.
    pub height: f64,
}

/// One generated frame: ground truths plus the sensor-frame point cloud.
#[derive(Debug, Clone)]
pub struct SimFrame {
    pub index: usize,
    pub ground_truths: Vec<SimObject>,
    pub cloud: PointCloud,
}

/// A corrupted detection carrying true variances and, for survivors of a
/// real object, the index of its source ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDetection {
    pub frame: usize,
    pub uncertain: UncertainBox,
    pub class: Class,
    pub score: f64,
    pub source_gt: Option<usize>,
}

impl SimDetection {
    /// View as a labeled detection for matching/AP.
    pub fn to_labeled(&self) -> Result<LabeledObject> {
        let bev_box = crate::uncert::decode_median(&self.uncertain)?;
        let d = bev_box.center.norm().max(1.0);
        let height = class_height(self.class);
        Ok(LabeledObject {
            class: self.class,
            bev_box,
            score: Some(self.score),
            truncation: 0.0,
            occlusion: 0,
            bbox_height_px: FOCAL_PX * height / d,
        })
    }
}

/// Nominal 3-D object height per class.
pub fn class_height(class: Class) -> f64 {
    match class {
        Class::Car => 1.5,
        _ => 1.75,
    }
}

/// Fold an angle into `(-pi/2, pi/2]`.
pub fn fold_phi(phi: f64) -> f64 {
    let folded = (phi + std::f64::consts::FRAC_PI_2).rem_euclid(std::f64::consts::PI)
        - std::f64::consts::FRAC_PI_2;
    if folded == -std::f64::consts::FRAC_PI_2 {
        std::f64::consts::FRAC_PI_2
    } else {
        folded
    }
}

fn sample_dimensions(class: Class, rng: &mut CounterRng) -> (f64, f64, f64) {
    let (l, w, h) = match class {
        Class::Car => (
            rng.normal_scaled(4.2, 0.25).clamp(3.2, 5.2),
            rng.normal_scaled(1.75, 0.10).clamp(1.4, 2.1),
            rng.normal_scaled(1.50, 0.08).clamp(1.2, 1.8),
        ),
        Class::Pedestrian => (
            rng.normal_scaled(0.9, 0.10).clamp(0.5, 1.2),
            rng.normal_scaled(0.6, 0.06).clamp(0.4, 0.8),
            rng.normal_scaled(1.75, 0.10).clamp(1.4, 2.0),
        ),
        Class::Cyclist => (
            rng.normal_scaled(1.76, 0.10).clamp(1.4, 2.1),
            rng.normal_scaled(0.6, 0.06).clamp(0.4, 0.8),
            rng.normal_scaled(1.75, 0.10).clamp(1.4, 2.0),
        ),
        Class::DontCare => (1.0, 1.0, 1.0),
    };
    (l, w, h)
}

/// Orientation mixture: concentrated near the 0°/90° base angles with a
/// uniform component.
fn sample_orientation(rng: &mut CounterRng) -> f64 {
    let u = rng.uniform();
    let spread = 5.0f64.to_radians();
    let phi = if u < 0.4 {
        rng.normal_scaled(0.0, spread)
    } else if u < 0.8 {
        rng.normal_scaled(std::f64::consts::FRAC_PI_2, spread)
    } else {
        rng.uniform_range(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    };
    fold_phi(phi)
}

fn sample_center(spec: &SceneSpec, rng: &mut CounterRng) -> Vec2 {
    let r = &spec.region;
    match spec.placement {
        Placement::UniformArea => Vec2::new(
            rng.uniform_range(r.x_min, r.x_max),
            rng.uniform_range(r.y_min, r.y_max),
        ),
        Placement::UniformDistance => {
            let d_min = r.x_min.max(2.0);
            let d_max = r.x_max.hypot(r.y_max.abs().max(r.y_min.abs()));
            for _ in 0..64 {
                let d = rng.uniform_range(d_min, d_max);
                let bearing = rng.uniform_range(-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3);
                let p = Vec2::new(d * bearing.cos(), d * bearing.sin());
                if r.contains(p) {
                    return p;
                }
            }
            Vec2::new(
                rng.uniform_range(r.x_min, r.x_max),
                rng.uniform_range(r.y_min, r.y_max),
            )
        }
    }
}

/// Generate all frames of a scene. Deterministic per `spec.seed`; frame
/// `i` draws only from streams derived from `(seed, i)`.
pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<SimFrame>> {
    spec.validate()?;
    (0..spec.n_frames).map(|i| generate_frame(spec, i)).collect()
}

fn generate_frame(spec: &SceneSpec, frame: usize) -> Result<SimFrame> {
    let mut rng = CounterRng::new(spec.seed, frame as u64);
    let mut objects: Vec<SimObject> = Vec::new();
    let mut points: Vec<PointXyzi> = Vec::new();

    let class_plan = [
        (Class::Car, spec.mean_cars),
        (Class::Pedestrian, spec.mean_pedestrians),
        (Class::Cyclist, spec.mean_cyclists),
    ];
    for (class, mean) in class_plan {
        let count = rng.poisson(mean);
        for _ in 0..count {
            let Some(sim) = place_object(spec, class, &objects, &mut rng) else {
                continue;
            };
            emit_surface_points(&sim, &mut points, &mut rng);
            objects.push(sim);
        }
    }

    let cloud = PointCloud::new(points, [0.0, 0.0, 0.0])?;
    Ok(SimFrame {
        index: frame,
        ground_truths: objects,
        cloud,
    })
}

fn place_object(
    spec: &SceneSpec,
    class: Class,
    existing: &[SimObject],
    rng: &mut CounterRng,
) -> Option<SimObject> {
    let (length, width, height) = sample_dimensions(class, rng);
    for _ in 0..40 {
        let center = sample_center(spec, rng);
        let phi = sample_orientation(rng);
        let bev_box = OrientedBox::new(center, length, width, phi).ok()?;
        let clear = existing.iter().all(|o| {
            crate::eval::rotated_iou(&bev_box, &o.object.bev_box)
                .map(|iou| iou < 0.01)
                .unwrap_or(false)
        });
        if !clear {
            continue;
        }
        let d = center.norm().max(1.0);
        return Some(SimObject {
            object: LabeledObject {
                class,
                bev_box,
                score: None,
                truncation: 0.0,
                occlusion: 0,
                bbox_height_px: FOCAL_PX * height / d,
            },
            height,
        });
    }
    None
}

/// Sample box-perimeter surface points with inverse-linear density in
/// distance; returns emitted points in the sensor frame.
fn emit_surface_points(sim: &SimObject, points: &mut Vec<PointXyzi>, rng: &mut CounterRng) {
    let b = &sim.object.bev_box;
    let d = b.center.norm().max(1.0);
    let count = ((1200.0 / d).round() as usize).clamp(10, 200);
    let half_perimeter = b.length + b.width;
    let intensity_mean = match sim.object.class {
        Class::Car => 0.45,
        Class::Pedestrian => 0.35,
        Class::Cyclist => 0.40,
        Class::DontCare => 0.30,
    };
    for _ in 0..count {
        let t = rng.uniform_range(0.0, 2.0 * half_perimeter);
        let hl = b.length / 2.0;
        let hw = b.width / 2.0;
        // arc length along the rectangle perimeter, one edge at a time
        let local = if t < b.length {
            Vec2::new(t - hl, hw)
        } else if t < half_perimeter {
            Vec2::new(hl, (t - b.length) - hw)
        } else if t < half_perimeter + b.length {
            Vec2::new((t - half_perimeter) - hl, -hw)
        } else {
            Vec2::new(-hl, (t - half_perimeter - b.length) - hw)
        };
        let p = b.center + local.rotated(b.phi);
        let z_above_ground = rng.uniform_range(0.1, sim.height.max(0.2));
        points.push(PointXyzi {
            x: p.x,
            y: p.y,
            z: z_above_ground - SENSOR_HEIGHT,
            intensity: (intensity_mean + rng.normal_scaled(0.0, 0.1)).clamp(0.05, 0.95),
        });
    }
}

/// Corrupt ground truths into detections: per-parameter Gaussian noise at
/// the true distance-dependent std-dev, variance fields set to the true
/// variances, misses removed, and uniformly placed low-score false
/// positives appended. Deterministic per `(frames, noise, seed)`.
pub fn corrupt(frames: &[SimFrame], noise: &NoiseModel, seed: u64) -> Result<Vec<Vec<SimDetection>>> {
    noise.validate()?;
    frames
        .iter()
        .map(|frame| corrupt_frame(frame, noise, seed))
        .collect()
}

fn corrupt_frame(frame: &SimFrame, noise: &NoiseModel, seed: u64) -> Result<Vec<SimDetection>> {
    let mut rng = CounterRng::new(seed, frame.index as u64 ^ 0x51ED_2705_1234_ABCD);
    let mut detections = Vec::new();

    for (gi, sim) in frame.ground_truths.iter().enumerate() {
        let d = sim.object.distance();
        if rng.chance(noise.miss_rate.rate(d)) {
            continue;
        }
        let truth = encode_box(&sim.object.bev_box)?;
        let sigmas = noise.sigmas_at(d);
        let t = truth.as_array();
        let mut noisy = [0.0; 6];
        for k in 0..6 {
            noisy[k] = t[k] + rng.normal_scaled(0.0, sigmas[k]);
        }
        // trig channels stay in the valid range
        noisy[4] = noisy[4].clamp(-1.0, 1.0);
        noisy[5] = noisy[5].clamp(-1.0, 1.0);
        let score = rng.uniform_range(0.5, 1.0);
        let uncertain = UncertainBox::new(
            BoxParams::from_array(noisy),
            BoxParams::from_array(sigmas.map(|s| s * s)),
            class_scores(sim.object.class, score, &mut rng),
        )?;
        detections.push(SimDetection {
            frame: frame.index,
            uncertain,
            class: sim.object.class,
            score,
            source_gt: Some(gi),
        });
    }

    let fp_count = rng.poisson(noise.false_positive_rate);
    for _ in 0..fp_count {
        let class = Class::EVALUATED[rng.pick_index(3)];
        let (length, width, _) = sample_dimensions(class, &mut rng);
        let center = Vec2::new(rng.uniform_range(4.0, 56.0), rng.uniform_range(-26.0, 26.0));
        let phi = sample_orientation(&mut rng);
        let bev_box = OrientedBox::new(center, length, width, phi)?;
        let d = center.norm();
        let sigmas = noise.sigmas_at(d);
        let score = rng.uniform_range(0.0, 0.3);
        let uncertain = UncertainBox::new(
            encode_box(&bev_box)?,
            BoxParams::from_array(sigmas.map(|s| s * s)),
            class_scores(class, 0.34 + score, &mut rng),
        )?;
        detections.push(SimDetection {
            frame: frame.index,
            uncertain,
            class,
            score,
            source_gt: None,
        });
    }
    Ok(detections)
}

fn class_scores(class: Class, confidence: f64, rng: &mut CounterRng) -> Vec<f64> {
    let c = confidence.clamp(0.34, 0.99);
    let mut scores = vec![(1.0 - c) / 2.0; 3];
    let idx = Class::EVALUATED.iter().position(|&k| k == class).unwrap_or(0);
    scores[idx] = c;
    // tiny deterministic jitter keeps score vectors distinct
    let jitter = rng.uniform_range(-1e-6, 1e-6);
    scores[(idx + 1) % 3] += jitter;
    scores[(idx + 2) % 3] -= jitter;
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom;

    #[test]
    fn empty_spec_gives_empty_frames() {
        let spec = SceneSpec {
            mean_cars: 0.0,
            mean_pedestrians: 0.0,
            mean_cyclists: 0.0,
            n_frames: 3,
            ..SceneSpec::default()
        };
        let frames = generate_scene(&spec).unwrap();
        assert_eq!(frames.len(), 3);
        for f in frames {
            assert!(f.ground_truths.is_empty());
            assert!(f.cloud.is_empty());
        }
    }

    #[test]
    fn surface_points_stay_inside_dilated_footprint() {
        let spec = SceneSpec {
            mean_cars: 1.0,
            mean_pedestrians: 0.0,
            mean_cyclists: 0.0,
            n_frames: 40,
            seed: 9,
            ..SceneSpec::default()
        };
        let frames = generate_scene(&spec).unwrap();
        let mut checked = 0;
        for f in &frames {
            if f.ground_truths.len() != 1 {
                continue;
            }
            let b = &f.ground_truths[0].object.bev_box;
            let dilated = OrientedBox::new(b.center, b.length + 0.02, b.width + 0.02, b.phi)
                .unwrap();
            let polygon = dilated.corners();
            for p in &f.cloud.points {
                assert!(
                    geom::point_in_convex(Vec2::new(p.x, p.y), &polygon, 1e-9),
                    "surface point escaped the footprint"
                );
                checked += 1;
            }
        }
        assert!(checked > 0, "no single-object frame sampled");
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = SceneSpec {
            n_frames: 4,
            seed: 11,
            ..SceneSpec::default()
        };
        let a = generate_scene(&spec).unwrap();
        let b = generate_scene(&spec).unwrap();
        assert_eq!(a.len(), b.len());
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.ground_truths, fb.ground_truths);
            assert_eq!(fa.cloud.points, fb.cloud.points);
        }
        let other = generate_scene(&SceneSpec { seed: 12, ..spec }).unwrap();
        let differs = a
            .iter()
            .zip(&other)
            .any(|(fa, fo)| fa.ground_truths != fo.ground_truths);
        assert!(differs, "different seeds must differ");
    }

    #[test]
    fn zero_noise_detections_equal_ground_truth() {
        let spec = SceneSpec {
            n_frames: 5,
            seed: 3,
            ..SceneSpec::default()
        };
        let frames = generate_scene(&spec).unwrap();
        let dets = corrupt(&frames, &NoiseModel::zero(), 1).unwrap();
        for (frame, frame_dets) in frames.iter().zip(&dets) {
            assert_eq!(frame.ground_truths.len(), frame_dets.len());
            for det in frame_dets {
                let gt = &frame.ground_truths[det.source_gt.unwrap()].object.bev_box;
                let db = det.to_labeled().unwrap().bev_box;
                let iou = crate::eval::rotated_iou(gt, &db).unwrap();
                assert!(iou > 1.0 - 1e-9, "IoU {iou}");
            }
        }
    }

    #[test]
    fn positional_noise_std_matches_model() {
        let spec = SceneSpec {
            n_frames: 1500,
            mean_cars: 7.0,
            mean_pedestrians: 0.0,
            mean_cyclists: 0.0,
            seed: 21,
            ..SceneSpec::default()
        };
        let frames = generate_scene(&spec).unwrap();
        let noise = NoiseModel {
            sigma_x: DistanceFn::constant(0.5),
            miss_rate: DistanceFn::constant(0.0),
            false_positive_rate: 0.0,
            ..NoiseModel::zero()
        };
        let dets = corrupt(&frames, &noise, 5).unwrap();
        let mut errs: Vec<f64> = Vec::new();
        for (frame, frame_dets) in frames.iter().zip(&dets) {
            for det in frame_dets {
                let gt = &frame.ground_truths[det.source_gt.unwrap()].object.bev_box;
                errs.push(det.uncertain.mean.x - gt.center.x);
            }
        }
        assert!(errs.len() >= 10_000, "need 10^4 objects, got {}", errs.len());
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / errs.len() as f64;
        let std = var.sqrt();
        assert!((std - 0.5).abs() / 0.5 < 0.02, "std {std}");
    }

    #[test]
    fn total_miss_rate_leaves_only_false_positives() {
        let spec = SceneSpec {
            n_frames: 10,
            seed: 2,
            ..SceneSpec::default()
        };
        let frames = generate_scene(&spec).unwrap();
        let noise = NoiseModel {
            miss_rate: DistanceFn::constant(1.0),
            false_positive_rate: 1.0,
            ..NoiseModel::zero()
        };
        let dets = corrupt(&frames, &noise, 3).unwrap();
        for frame_dets in dets {
            assert!(frame_dets.iter().all(|d| d.source_gt.is_none()));
        }
    }

    #[test]
    fn region_outside_grid_is_a_config_error() {
        let spec = SceneSpec {
            region: Region {
                x_min: -10.0,
                x_max: 70.0,
                y_min: -26.0,
                y_max: 26.0,
            },
            ..SceneSpec::default()
        };
        assert!(matches!(
            generate_scene(&spec),
            Err(crate::error::Error::Config(_))
        ));
    }

    #[test]
    fn fold_phi_lands_in_half_open_interval() {
        use std::f64::consts::{FRAC_PI_2, PI};
        assert!((fold_phi(PI) - 0.0).abs() < 1e-12);
        assert_eq!(fold_phi(-FRAC_PI_2), FRAC_PI_2);
        assert!((fold_phi(2.0) - (2.0 - PI)).abs() < 1e-12);
        for i in -20..20 {
            let phi = i as f64 * 0.37;
            let f = fold_phi(phi);
            assert!(f > -FRAC_PI_2 - 1e-12 && f <= FRAC_PI_2 + 1e-12);
            // same axis direction modulo pi
            let delta = (phi - f).rem_euclid(PI);
            assert!(delta < 1e-9 || (PI - delta) < 1e-9);
        }
    }
}
