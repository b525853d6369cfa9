//! Detection matching, rotated IoU, average precision and binned
//! uncertainty analyses.
//!
//! Matching follows the PASCAL-style protocol: detections in descending
//! score order claim the best-overlapping unclaimed ground truth of their
//! class, "DontCare" regions (and ground truths outside the evaluated
//! difficulty) absorb detections without counting them, and average
//! precision interpolates the precision/recall curve at eleven recall
//! steps of 10%.

use crate::error::{Error, Result};
use crate::geom;
use crate::uncert::{decode_median, phi_bounds, OrientedBox, UncertainBox};

/// Object classes of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Car,
    Pedestrian,
    Cyclist,
    DontCare,
}

impl Class {
    pub const EVALUATED: [Class; 3] = [Class::Car, Class::Pedestrian, Class::Cyclist];

    pub fn as_str(&self) -> &'static str {
        match self {
            Class::Car => "Car",
            Class::Pedestrian => "Pedestrian",
            Class::Cyclist => "Cyclist",
            Class::DontCare => "DontCare",
        }
    }

    /// Default BEV IoU threshold for matching.
    pub fn default_iou_threshold(&self) -> f64 {
        match self {
            Class::Car => 0.7,
            _ => 0.5,
        }
    }
}

/// Difficulty gate derived from truncation, occlusion and image bbox
/// height; ground truths outside the gate are absorbed, not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
}

impl Difficulty {
    pub fn admits(&self, truncation: f64, occlusion: u8, bbox_height_px: f64) -> bool {
        let (min_height, max_occlusion, max_truncation) = match self {
            Difficulty::Easy => (40.0, 0, 0.15),
            Difficulty::Moderate => (25.0, 1, 0.30),
            Difficulty::Hard => (25.0, 2, 0.50),
        };
        bbox_height_px >= min_height && occlusion <= max_occlusion && truncation <= max_truncation
    }
}

/// A ground-truth or detected box in BEV sensor coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObject {
    pub class: Class,
    pub bev_box: OrientedBox,
    /// Detection score; `None` for ground truths.
    pub score: Option<f64>,
    pub truncation: f64,
    pub occlusion: u8,
    pub bbox_height_px: f64,
}

impl LabeledObject {
    pub fn distance(&self) -> f64 {
        self.bev_box.center.norm()
    }
}

/// One matched detection/ground-truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub det_index: usize,
    pub gt_index: usize,
    pub iou: f64,
    pub score: f64,
}

/// Result of matching one frame for one class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    /// True positives, sorted by detection score descending.
    pub pairs: Vec<MatchPair>,
    /// Unmatched detections `(det_index, score)`.
    pub false_positives: Vec<(usize, f64)>,
    /// Unmatched qualifying ground truths.
    pub false_negatives: Vec<usize>,
    /// Detections absorbed by DontCare or out-of-difficulty regions.
    pub absorbed: Vec<usize>,
}

/// Intersection over union of two rotated rectangles via convex polygon
/// clipping.
pub fn rotated_iou(a: &OrientedBox, b: &OrientedBox) -> Result<f64> {
    if a.area() <= 0.0 || b.area() <= 0.0 {
        return Err(Error::Domain("zero-area box in IoU".into()));
    }
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

fn intersection_area(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let clipped = geom::clip_polygon(&a.corners(), &b.corners());
    if clipped.len() < 3 {
        0.0
    } else {
        geom::polygon_area(&clipped).abs()
    }
}

/// Fraction of `det` covered by `region`.
fn overlap_over_detection(det: &OrientedBox, region: &OrientedBox) -> f64 {
    intersection_area(det, region) / det.area()
}

/// Detections absorbed by ignore regions when at least this fraction of
/// the detection lies inside the region.
const ABSORB_OVERLAP: f64 = 0.5;

/// Match one frame's detections against ground truths for one class.
///
/// Detections are visited in descending score order; each claims the
/// highest-IoU unclaimed qualifying ground truth with IoU at or above the
/// threshold. Detections that instead fall on DontCare regions or
/// non-qualifying ground truths are absorbed.
pub fn match_frame(
    detections: &[LabeledObject],
    ground_truths: &[LabeledObject],
    iou_threshold: f64,
    class: Class,
    difficulty: Option<Difficulty>,
) -> Result<MatchResult> {
    let qualifies = |g: &LabeledObject| match difficulty {
        Some(d) => d.admits(g.truncation, g.occlusion, g.bbox_height_px),
        None => true,
    };

    let mut det_order: Vec<usize> = detections
        .iter()
        .enumerate()
        .filter(|(_, d)| d.class == class)
        .map(|(i, _)| i)
        .collect();
    det_order.sort_by(|&i, &j| {
        let (si, sj) = (
            detections[i].score.unwrap_or(0.0),
            detections[j].score.unwrap_or(0.0),
        );
        sj.total_cmp(&si).then(i.cmp(&j))
    });

    let evaluated: Vec<usize> = ground_truths
        .iter()
        .enumerate()
        .filter(|(_, g)| g.class == class && qualifies(g))
        .map(|(i, _)| i)
        .collect();
    let ignore_regions: Vec<usize> = ground_truths
        .iter()
        .enumerate()
        .filter(|(_, g)| g.class == Class::DontCare || (g.class == class && !qualifies(g)))
        .map(|(i, _)| i)
        .collect();

    let mut claimed = vec![false; ground_truths.len()];
    let mut result = MatchResult::default();

    for &di in &det_order {
        let det = &detections[di];
        let score = det.score.unwrap_or(0.0);

        let mut best: Option<(usize, f64)> = None;
        for &gi in &evaluated {
            if claimed[gi] {
                continue;
            }
            let iou = rotated_iou(&det.bev_box, &ground_truths[gi].bev_box)?;
            if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        if let Some((gi, iou)) = best {
            claimed[gi] = true;
            result.pairs.push(MatchPair {
                det_index: di,
                gt_index: gi,
                iou,
                score,
            });
            continue;
        }

        let absorbed = ignore_regions.iter().any(|&gi| {
            overlap_over_detection(&det.bev_box, &ground_truths[gi].bev_box) >= ABSORB_OVERLAP
        });
        if absorbed {
            result.absorbed.push(di);
        } else {
            result.false_positives.push((di, score));
        }
    }

    result.false_negatives = evaluated.into_iter().filter(|&gi| !claimed[gi]).collect();
    Ok(result)
}

/// Eleven-point interpolated average precision over per-frame match
/// results. Returns `None` when there are no ground truths for the class.
pub fn average_precision(results: &[MatchResult]) -> Option<f64> {
    let n_gt: usize = results
        .iter()
        .map(|r| r.pairs.len() + r.false_negatives.len())
        .sum();
    if n_gt == 0 {
        return None;
    }

    let mut events: Vec<(f64, bool)> = Vec::new();
    for r in results {
        events.extend(r.pairs.iter().map(|p| (p.score, true)));
        events.extend(r.false_positives.iter().map(|&(_, s)| (s, false)));
    }
    events.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut curve: Vec<(f64, f64)> = Vec::with_capacity(events.len());
    for (_, is_tp) in events {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        curve.push((
            tp as f64 / n_gt as f64,
            tp as f64 / (tp + fp) as f64,
        ));
    }

    let mut total = 0.0;
    for step in 0..=10 {
        let r = step as f64 / 10.0;
        let p_interp = curve
            .iter()
            .filter(|(recall, _)| *recall >= r - 1e-12)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
        total += p_interp;
    }
    Some(total / 11.0)
}

/// Sum of the six parameter variances. Unit-inconsistent; used to rank
/// objects, not to measure anything physical.
pub fn total_variance(u: &UncertainBox) -> f64 {
    u.var.as_array().iter().sum()
}

/// Format a total variance in the `<n>e-4` convention used by the
/// normalized-coordinate reports.
pub fn format_tv_e4(tv: f64) -> String {
    format!("{:.0}e-4", tv * 1e4)
}

/// Multiplicative standard deviation of a log-normal dimension:
/// `exp(sigma_log)`. The central 68% of the mass lies between the median
/// divided and multiplied by this factor.
pub fn multiplicative_std(sigma_log: f64) -> f64 {
    sigma_log.exp()
}

/// Difference (degrees, in `[0, 45]`) between a heading and the nearest
/// base angle at 0° or 90°.
pub fn diff_to_base_angle(phi: f64) -> f64 {
    let deg = phi.to_degrees().rem_euclid(90.0);
    deg.min(90.0 - deg)
}

/// Largest angular deviation (degrees) of the heading bounds from the
/// median heading at the given percentile.
pub fn max_differential_angle(u: &UncertainBox, percentile: f64) -> Result<f64> {
    let (lo, hi) = phi_bounds(u, percentile)?;
    let median = decode_median(u)?.phi;
    Ok((hi - median).abs().max((median - lo).abs()).to_degrees())
}

/// Binning axis of the uncertainty analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinAxis {
    /// IoU with the matched ground truth, range `[0, 1]`.
    Iou,
    /// Distance from the sensor in meters, range `[0, 60]`.
    Distance,
    /// Difference to the nearest base angle in degrees, range `[0, 45]`.
    DiffToBaseAngle,
}

impl BinAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinAxis::Iou => "iou",
            BinAxis::Distance => "distance",
            BinAxis::DiffToBaseAngle => "angle",
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match self {
            BinAxis::Iou => (0.0, 1.0),
            BinAxis::Distance => (0.0, 60.0),
            BinAxis::DiffToBaseAngle => (0.0, 45.0),
        }
    }

    pub fn default_bin_width(&self) -> f64 {
        match self {
            BinAxis::Iou => 0.1,
            BinAxis::Distance => 2.5,
            BinAxis::DiffToBaseAngle => 5.0,
        }
    }
}

/// One detection carrying its uncertainty and the axis values it can be
/// binned by.
#[derive(Debug, Clone)]
pub struct BinSample {
    pub u: UncertainBox,
    /// IoU with the matched ground truth; 0 for unmatched detections.
    pub iou: f64,
    pub distance: f64,
}

/// Per-bin means of the uncertainty measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinMeans {
    pub total_variance: f64,
    /// Per-parameter standard deviations, component order of the box
    /// parameters.
    pub std_devs: [f64; 6],
    /// Multiplicative standard deviations of length and width.
    pub mult_std: [f64; 2],
    pub entropy: f64,
}

/// Contiguous bins over one axis with per-bin counts and means.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBins {
    pub axis: BinAxis,
    /// `len() == bins + 1` edges; samples outside the range are clamped
    /// into the first or last bin.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `None` for empty bins.
    pub means: Vec<Option<BinMeans>>,
}

/// Bin detections along an axis and average the uncertainty measures per
/// bin.
pub fn bin_uncertainties(
    samples: &[BinSample],
    axis: BinAxis,
    bin_width: f64,
) -> Result<UncertaintyBins> {
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(Error::Config(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let (lo, hi) = axis.range();
    let n_bins = ((hi - lo) / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=n_bins).map(|i| lo + i as f64 * bin_width).collect();

    let mut counts = vec![0usize; n_bins];
    let mut acc = vec![(0.0f64, [0.0f64; 6], [0.0f64; 2], 0.0f64); n_bins];
    for s in samples {
        let value = match axis {
            BinAxis::Iou => s.iou,
            BinAxis::Distance => s.distance,
            BinAxis::DiffToBaseAngle => {
                let median = decode_median(&s.u)?;
                diff_to_base_angle(median.phi)
            }
        };
        let bin = (((value - lo) / bin_width).floor() as isize).clamp(0, n_bins as isize - 1)
            as usize;
        counts[bin] += 1;
        let a = &mut acc[bin];
        a.0 += total_variance(&s.u);
        for (slot, &v) in a.1.iter_mut().zip(s.u.var.as_array().iter()) {
            *slot += v.sqrt();
        }
        a.2[0] += multiplicative_std(s.u.var.log_bl.sqrt());
        a.2[1] += multiplicative_std(s.u.var.log_bw.sqrt());
        a.3 += s.u.class_entropy;
    }

    let means = counts
        .iter()
        .zip(&acc)
        .map(|(&c, a)| {
            if c == 0 {
                None
            } else {
                let inv = 1.0 / c as f64;
                Some(BinMeans {
                    total_variance: a.0 * inv,
                    std_devs: a.1.map(|v| v * inv),
                    mult_std: a.2.map(|v| v * inv),
                    entropy: a.3 * inv,
                })
            }
        })
        .collect();

    Ok(UncertaintyBins {
        axis,
        edges,
        counts,
        means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::rng::CounterRng;
    use crate::uncert::BoxParams;

    fn bx(x: f64, y: f64, l: f64, w: f64, phi: f64) -> OrientedBox {
        OrientedBox::new(Vec2::new(x, y), l, w, phi).unwrap()
    }

    fn det(class: Class, b: OrientedBox, score: f64) -> LabeledObject {
        LabeledObject {
            class,
            bev_box: b,
            score: Some(score),
            truncation: 0.0,
            occlusion: 0,
            bbox_height_px: 100.0,
        }
    }

    fn gt(class: Class, b: OrientedBox) -> LabeledObject {
        LabeledObject {
            class,
            bev_box: b,
            score: None,
            truncation: 0.0,
            occlusion: 0,
            bbox_height_px: 100.0,
        }
    }

    #[test]
    fn iou_identical_and_disjoint() {
        let a = bx(0.0, 0.0, 4.0, 2.0, 0.3);
        assert!((rotated_iou(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let far = bx(100.0, 0.0, 4.0, 2.0, 0.3);
        assert_eq!(rotated_iou(&a, &far).unwrap(), 0.0);
    }

    #[test]
    fn iou_hand_computed_offset_squares() {
        let a = bx(0.0, 0.0, 2.0, 2.0, 0.0);
        let b = bx(1.0, 0.0, 2.0, 2.0, 0.0);
        // intersection 2, union 6
        assert!((rotated_iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iou_is_symmetric_and_rigid_invariant() {
        let mut rng = CounterRng::new(21, 0);
        for _ in 0..200 {
            let a = bx(
                rng.uniform_range(-5.0, 5.0),
                rng.uniform_range(-5.0, 5.0),
                rng.uniform_range(0.5, 6.0),
                rng.uniform_range(0.5, 3.0),
                rng.uniform_range(-1.5, 1.5),
            );
            let b = bx(
                rng.uniform_range(-5.0, 5.0),
                rng.uniform_range(-5.0, 5.0),
                rng.uniform_range(0.5, 6.0),
                rng.uniform_range(0.5, 3.0),
                rng.uniform_range(-1.5, 1.5),
            );
            let ab = rotated_iou(&a, &b).unwrap();
            let ba = rotated_iou(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);

            let angle = rng.uniform_range(-3.0, 3.0);
            let shift = Vec2::new(rng.uniform_range(-10.0, 10.0), rng.uniform_range(-10.0, 10.0));
            let mv = |v: &OrientedBox| {
                OrientedBox::new(v.center.rotated(angle) + shift, v.length, v.width, v.phi + angle)
                    .unwrap()
            };
            let moved = rotated_iou(&mv(&a), &mv(&b)).unwrap();
            assert!((ab - moved).abs() < 1e-9, "{ab} vs {moved}");
        }
    }

    #[test]
    fn iou_rejects_degenerate_box() {
        let a = bx(0.0, 0.0, 2.0, 2.0, 0.0);
        let degenerate = OrientedBox {
            center: Vec2::new(0.0, 0.0),
            length: 0.0,
            width: 1.0,
            phi: 0.0,
        };
        assert!(rotated_iou(&a, &degenerate).is_err());
    }

    #[test]
    fn iou_matches_mc_area_oracle() {
        let mut rng = CounterRng::new(314, 0);
        for case in 0..30 {
            let a = bx(
                rng.uniform_range(-2.0, 2.0),
                rng.uniform_range(-2.0, 2.0),
                rng.uniform_range(1.0, 5.0),
                rng.uniform_range(1.0, 3.0),
                rng.uniform_range(-1.5, 1.5),
            );
            let b = bx(
                rng.uniform_range(-2.0, 2.0),
                rng.uniform_range(-2.0, 2.0),
                rng.uniform_range(1.0, 5.0),
                rng.uniform_range(1.0, 3.0),
                rng.uniform_range(-1.5, 1.5),
            );
            let analytic = rotated_iou(&a, &b).unwrap();
            let mc = mc_iou(&a, &b, 200_000, &mut rng);
            assert!(
                (analytic - mc).abs() < 0.01,
                "case {case}: {analytic} vs {mc}"
            );
        }
    }

    pub(crate) fn mc_iou(a: &OrientedBox, b: &OrientedBox, n: usize, rng: &mut CounterRng) -> f64 {
        let pts: Vec<Vec2> = a.corners().iter().chain(b.corners().iter()).copied().collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in pts {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let inside = |bx: &OrientedBox, p: Vec2| {
            let d = (p - bx.center).rotated(-bx.phi);
            d.x.abs() <= bx.length / 2.0 && d.y.abs() <= bx.width / 2.0
        };
        let (mut ni, mut nu) = (0u64, 0u64);
        for _ in 0..n {
            let p = Vec2::new(rng.uniform_range(x0, x1), rng.uniform_range(y0, y1));
            let (ia, ib) = (inside(a, p), inside(b, p));
            if ia && ib {
                ni += 1;
            }
            if ia || ib {
                nu += 1;
            }
        }
        if nu == 0 {
            0.0
        } else {
            ni as f64 / nu as f64
        }
    }

    #[test]
    fn match_single_pair() {
        let g = vec![gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0))];
        let d = vec![det(Class::Car, bx(10.2, 0.0, 4.0, 2.0, 0.0), 0.9)];
        let r = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert!(r.false_positives.is_empty());
        assert!(r.false_negatives.is_empty());
    }

    #[test]
    fn single_claim_rule() {
        let g = vec![gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0))];
        let d = vec![
            det(Class::Car, bx(10.1, 0.0, 4.0, 2.0, 0.0), 0.8),
            det(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0), 0.9),
        ];
        let r = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.pairs[0].det_index, 1, "higher score claims the GT");
        assert_eq!(r.false_positives.len(), 1);
    }

    #[test]
    fn dontcare_absorbs_detections() {
        // three-object frame: one car GT, one DontCare region, one det on each
        // plus one detection over empty space
        let g = vec![
            gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0)),
            gt(Class::DontCare, bx(30.0, 5.0, 8.0, 8.0, 0.0)),
        ];
        let d = vec![
            det(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0), 0.9),
            det(Class::Car, bx(30.0, 5.0, 4.0, 2.0, 0.0), 0.8),
            det(Class::Car, bx(50.0, -10.0, 4.0, 2.0, 0.0), 0.7),
        ];
        let r = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.absorbed, vec![1]);
        assert_eq!(r.false_positives.len(), 1);
        assert_eq!(r.false_positives[0].0, 2);
    }

    #[test]
    fn matching_is_order_invariant_for_tie_free_scores() {
        let g = vec![
            gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0)),
            gt(Class::Car, bx(20.0, 3.0, 4.0, 2.0, 0.2)),
        ];
        let mut d = vec![
            det(Class::Car, bx(10.1, 0.0, 4.0, 2.0, 0.0), 0.9),
            det(Class::Car, bx(20.0, 3.1, 4.0, 2.0, 0.2), 0.8),
            det(Class::Car, bx(40.0, 0.0, 4.0, 2.0, 0.0), 0.7),
        ];
        let canon = |r: &MatchResult| {
            let mut pairs: Vec<(usize, usize)> =
                r.pairs.iter().map(|p| (p.gt_index, p.det_index)).collect();
            pairs.sort_unstable();
            pairs
        };
        let base = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        let base_scores: Vec<(usize, String)> = base
            .pairs
            .iter()
            .map(|p| (p.gt_index, format!("{:.3}", p.score)))
            .collect();
        d.reverse();
        let rev = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        let rev_scores: Vec<(usize, String)> = rev
            .pairs
            .iter()
            .map(|p| (p.gt_index, format!("{:.3}", p.score)))
            .collect();
        assert_eq!(base_scores.len(), rev_scores.len());
        assert_eq!(canon(&base).len(), canon(&rev).len());
        assert_eq!(base_scores, rev_scores);
    }

    #[test]
    fn ap_perfect_and_empty() {
        let g = vec![gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0))];
        let d = vec![det(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0), 0.9)];
        let r = match_frame(&d, &g, 0.7, Class::Car, None).unwrap();
        assert_eq!(average_precision(&[r]), Some(1.0));

        let none = match_frame(&[], &g, 0.7, Class::Car, None).unwrap();
        assert_eq!(average_precision(&[none]), Some(0.0));

        let no_gt = match_frame(&d, &[], 0.7, Class::Car, None).unwrap();
        assert_eq!(average_precision(&[no_gt]), None);
    }

    #[test]
    fn ap_hand_computed_case() {
        // 2 GTs; detections: score .9 TP, score .8 FP, score .7 TP
        let r = MatchResult {
            pairs: vec![
                MatchPair {
                    det_index: 0,
                    gt_index: 0,
                    iou: 0.9,
                    score: 0.9,
                },
                MatchPair {
                    det_index: 2,
                    gt_index: 1,
                    iou: 0.8,
                    score: 0.7,
                },
            ],
            false_positives: vec![(1, 0.8)],
            false_negatives: vec![],
            absorbed: vec![],
        };
        let ap = average_precision(&[r]).unwrap();
        let expected = (6.0 + 5.0 * (2.0 / 3.0)) / 11.0;
        assert!((ap - expected).abs() < 1e-9, "{ap} vs {expected}");
    }

    #[test]
    fn removing_false_positives_never_decreases_ap() {
        let base = MatchResult {
            pairs: vec![
                MatchPair {
                    det_index: 0,
                    gt_index: 0,
                    iou: 0.9,
                    score: 0.95,
                },
                MatchPair {
                    det_index: 1,
                    gt_index: 1,
                    iou: 0.8,
                    score: 0.6,
                },
            ],
            false_positives: vec![(2, 0.9), (3, 0.7), (4, 0.5)],
            false_negatives: vec![2],
            absorbed: vec![],
        };
        let ap_base = average_precision(std::slice::from_ref(&base)).unwrap();
        for drop in 0..base.false_positives.len() {
            let mut fewer = base.clone();
            fewer.false_positives.remove(drop);
            let ap = average_precision(&[fewer]).unwrap();
            assert!(ap >= ap_base - 1e-12, "dropping FP {drop} decreased AP");
        }
    }

    #[test]
    fn difficulty_gate_thresholds() {
        assert!(Difficulty::Easy.admits(0.1, 0, 45.0));
        assert!(!Difficulty::Easy.admits(0.1, 1, 45.0));
        assert!(Difficulty::Moderate.admits(0.25, 1, 30.0));
        assert!(!Difficulty::Moderate.admits(0.25, 1, 20.0));
        assert!(Difficulty::Hard.admits(0.45, 2, 26.0));
    }

    #[test]
    fn out_of_difficulty_gt_absorbs_instead_of_counting() {
        let mut far_gt = gt(Class::Car, bx(55.0, 0.0, 4.0, 2.0, 0.0));
        far_gt.bbox_height_px = 18.0; // below every difficulty gate
        let g = vec![gt(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0)), far_gt];
        let d = vec![
            det(Class::Car, bx(10.0, 0.0, 4.0, 2.0, 0.0), 0.9),
            det(Class::Car, bx(55.0, 0.0, 4.0, 2.0, 0.0), 0.8),
        ];
        let r = match_frame(&d, &g, 0.7, Class::Car, Some(Difficulty::Moderate)).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.absorbed, vec![1]);
        assert!(r.false_positives.is_empty());
        assert!(r.false_negatives.is_empty());
        assert_eq!(average_precision(&[r]), Some(1.0));
    }

    #[test]
    fn tv_and_mult_std_values() {
        let u = UncertainBox::new(
            BoxParams::from_array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            BoxParams::from_array([1e-4; 6]),
            vec![],
        )
        .unwrap();
        assert!((total_variance(&u) - 6e-4).abs() < 1e-18);
        assert_eq!(format_tv_e4(total_variance(&u)), "6e-4");

        assert_eq!(multiplicative_std(0.0), 1.0);
        assert!((multiplicative_std(2.0f64.ln()) - 2.0).abs() < 1e-12);
        // monotone
        assert!(multiplicative_std(0.3) < multiplicative_std(0.4));
    }

    #[test]
    fn log_normal_mass_inside_multiplicative_band() {
        // p(median/exp(s) <= X <= median*exp(s)) for log-normal X
        let mut rng = CounterRng::new(68, 0);
        let (mu, sigma) = (0.8, 0.35);
        let n = 1_000_000;
        let lo = mu - sigma;
        let hi = mu + sigma;
        let mut hits = 0u64;
        for _ in 0..n {
            let log_x = rng.normal_scaled(mu, sigma);
            if log_x >= lo && log_x <= hi {
                hits += 1;
            }
        }
        let mass = hits as f64 / n as f64;
        assert!((mass - 0.683).abs() < 0.005, "mass {mass}");
    }

    #[test]
    fn base_angle_examples() {
        assert_eq!(diff_to_base_angle(0.0), 0.0);
        assert!((diff_to_base_angle(100.0f64.to_radians()) - 10.0).abs() < 1e-9);
        assert!((diff_to_base_angle(135.0f64.to_radians()) - 45.0).abs() < 1e-9);
        assert!((diff_to_base_angle(-30.0f64.to_radians()) - 30.0).abs() < 1e-9);
    }

    #[test]
    fn max_differential_angle_behaviour() {
        let mean = BoxParams::from_array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let zero = UncertainBox::new(mean, BoxParams::default(), vec![]).unwrap();
        assert_eq!(max_differential_angle(&zero, 0.95).unwrap(), 0.0);

        // with sin-only variance the bounds are symmetric about the
        // median, so the maximum deviation is half the interval
        let mean_mid = BoxParams::from_array([0.0, 0.0, 0.0, 0.0, 0.0, 0.6]);
        let var = BoxParams {
            sin2phi: 0.05 * 0.05,
            ..BoxParams::default()
        };
        let u = UncertainBox::new(mean_mid, var, vec![]).unwrap();
        let (lo, hi) = phi_bounds(&u, 0.95).unwrap();
        let angle = max_differential_angle(&u, 0.95).unwrap();
        assert!((angle - ((hi - lo) / 2.0).to_degrees()).abs() < 1e-9);

        let mut previous = 0.0;
        for i in 0..10 {
            let s = 0.02 * i as f64;
            let var = BoxParams {
                sin2phi: s * s,
                cos2phi: s * s,
                ..BoxParams::default()
            };
            let u = UncertainBox::new(mean, var, vec![]).unwrap();
            let angle = max_differential_angle(&u, 0.95).unwrap();
            assert!(angle >= previous - 1e-9, "not monotone at step {i}");
            previous = angle;
        }
    }

    #[test]
    fn binning_partitions_and_averages() {
        let mk = |tv: f64, d: f64| BinSample {
            u: UncertainBox::new(
                BoxParams::from_array([d, 0.0, 1.0, 0.5, 0.0, 1.0]),
                BoxParams::from_array([tv / 6.0; 6]),
                vec![],
            )
            .unwrap(),
            iou: 0.5,
            distance: d,
        };
        let samples = vec![mk(0.06, 1.0), mk(0.12, 2.0), mk(0.30, 10.0)];
        let bins = bin_uncertainties(&samples, BinAxis::Distance, 2.5).unwrap();
        assert_eq!(bins.counts.iter().sum::<usize>(), 3);
        assert_eq!(bins.counts[0], 2);
        assert_eq!(bins.counts[4], 1);
        let first = bins.means[0].unwrap();
        assert!((first.total_variance - 0.09).abs() < 1e-12);
        assert!(bins.means[1].is_none());

        // single sample occupies exactly one bin with its own values
        let single = bin_uncertainties(&samples[2..], BinAxis::Distance, 2.5).unwrap();
        assert_eq!(single.counts.iter().sum::<usize>(), 1);
        let m = single.means[4].unwrap();
        assert!((m.total_variance - 0.30).abs() < 1e-12);
    }

    #[test]
    fn binning_rejects_bad_width() {
        assert!(bin_uncertainties(&[], BinAxis::Iou, 0.0).is_err());
    }
}
