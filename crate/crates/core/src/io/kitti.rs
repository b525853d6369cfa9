//! KITTI object label parsing and the camera-frame/BEV conversion.
//!
//! One object per line, 15 whitespace-separated fields plus an optional
//! detection score:
//!
//! ```text
//! type truncated occluded alpha bbox_l bbox_t bbox_r bbox_b h w l x y z rotation_y [score]
//! ```
//!
//! Camera frame: x right, y down, z forward; `rotation_y` turns around
//! the camera y-axis with the object length axis at `(cos ry, 0, -sin ry)`.
//! The BEV frame puts x forward and y left, so `bev_x = z`, `bev_y = -x`
//! and the heading is `-rotation_y - pi/2`, folded into `(-pi/2, pi/2]`
//! (the fold moves the heading by a multiple of pi, which leaves the box
//! axis unchanged, so dimensions are not swapped).
//!
//! Worked example: a box at camera location `(0, 1.6, 10)` with
//! `rotation_y = -pi/2` points along the camera z-axis; it lands at BEV
//! center `(10, 0)` with heading 0.
//!
//! The transform assumes the nominal camera/lidar alignment; parsing the
//! full per-sequence calibration chain is out of scope, and the
//! convention is isolated here so it can be swapped.

use crate::error::{Error, Result};
use crate::eval::{Class, LabeledObject};
use crate::geom::Vec2;
use crate::sim::fold_phi;
use crate::uncert::OrientedBox;

/// One parsed label line.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiLabelRecord {
    pub object_type: String,
    pub truncated: f64,
    pub occluded: i32,
    pub alpha: f64,
    /// Image bbox `[left, top, right, bottom]` in pixels.
    pub bbox: [f64; 4],
    /// 3-D dimensions `(height, width, length)` in meters.
    pub dimensions: (f64, f64, f64),
    /// Camera-frame location `(x, y, z)` of the box bottom center.
    pub location: (f64, f64, f64),
    pub rotation_y: f64,
    pub score: Option<f64>,
}

impl KittiLabelRecord {
    /// The benchmark class, or `None` for type strings outside the
    /// evaluated set (those are preserved verbatim in `object_type`).
    pub fn known_class(&self) -> Option<Class> {
        match self.object_type.as_str() {
            "Car" => Some(Class::Car),
            "Pedestrian" => Some(Class::Pedestrian),
            "Cyclist" => Some(Class::Cyclist),
            "DontCare" => Some(Class::DontCare),
            _ => None,
        }
    }
}

/// Parse a KITTI label file; one record per non-empty line.
pub fn parse_labels(text: &str) -> Result<Vec<KittiLabelRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 15 && fields.len() != 16 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 15 or 16 fields, got {}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            let v: f64 = fields[idx].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("field {} is not numeric: '{}'", idx + 1, fields[idx]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("field {} is not finite", idx + 1),
                });
            }
            Ok(v)
        };
        let bbox = [num(4)?, num(5)?, num(6)?, num(7)?];
        if bbox[0] > bbox[2] || bbox[1] > bbox[3] {
            return Err(Error::Parse {
                line: line_no,
                msg: "bbox must satisfy left <= right and top <= bottom".into(),
            });
        }
        records.push(KittiLabelRecord {
            object_type: fields[0].to_string(),
            truncated: num(1)?,
            occluded: num(2)? as i32,
            alpha: num(3)?,
            bbox,
            dimensions: (num(8)?, num(9)?, num(10)?),
            location: (num(11)?, num(12)?, num(13)?),
            rotation_y: num(14)?,
            score: if fields.len() == 16 {
                Some(num(15)?)
            } else {
                None
            },
        });
    }
    Ok(records)
}

/// Serialize records back to the label format.
pub fn write_labels(records: &[KittiLabelRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{} {:?} {} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
            r.object_type,
            r.truncated,
            r.occluded,
            r.alpha,
            r.bbox[0],
            r.bbox[1],
            r.bbox[2],
            r.bbox[3],
            r.dimensions.0,
            r.dimensions.1,
            r.dimensions.2,
            r.location.0,
            r.location.1,
            r.location.2,
            r.rotation_y,
        ));
        if let Some(score) = r.score {
            out.push_str(&format!(" {score:?}"));
        }
        out.push('\n');
    }
    out
}

/// The camera-frame residue of a record that the BEV representation does
/// not carry; keeping it makes `to_bev`/`from_bev` a lossless pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraAux {
    pub object_type: String,
    pub alpha: f64,
    pub bbox: [f64; 4],
    pub height_3d: f64,
    pub y_cam: f64,
    /// Multiple of pi removed when folding the heading.
    pub phi_offset: f64,
}

impl CameraAux {
    /// Synthesize plausible camera-frame attributes for a generated
    /// object (fixed camera 1.65 m above ground, bbox centered on a
    /// nominal image row).
    pub fn synthetic(object_type: &str, height_3d: f64, bev_box: &OrientedBox, bbox_height_px: f64) -> Self {
        let x_cam = -bev_box.center.y;
        let z_cam = bev_box.center.x;
        let ry = fold_ry(-bev_box.phi - std::f64::consts::FRAC_PI_2);
        let half_w = 0.35 * bbox_height_px;
        Self {
            object_type: object_type.to_string(),
            alpha: fold_ry(ry - x_cam.atan2(z_cam)),
            bbox: [
                620.0 - half_w,
                180.0,
                620.0 + half_w,
                180.0 + bbox_height_px,
            ],
            height_3d,
            y_cam: 1.65,
            phi_offset: 0.0,
        }
    }
}

fn fold_ry(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    (angle + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI
}

/// Convert a record into a BEV object plus its camera residue.
///
/// DontCare regions (and unknown type strings, which are treated as
/// ignore regions) may carry the placeholder `-1` dimensions; those are
/// clamped to a small positive footprint so the box stays usable as an
/// absorption region.
pub fn to_bev(record: &KittiLabelRecord) -> Result<(LabeledObject, CameraAux)> {
    let class = record.known_class().unwrap_or(Class::DontCare);
    let raw_phi = -record.rotation_y - std::f64::consts::FRAC_PI_2;
    let phi = fold_phi(raw_phi);
    let (h, w, l) = record.dimensions;
    let (length, width) = if class == Class::DontCare {
        (l.max(0.1), w.max(0.1))
    } else {
        (l, w)
    };
    let bev_box = OrientedBox::new(
        Vec2::new(record.location.2, -record.location.0),
        length,
        width,
        phi,
    )?;
    let object = LabeledObject {
        class,
        bev_box,
        score: record.score,
        truncation: record.truncated.max(0.0),
        occlusion: record.occluded.clamp(0, 3) as u8,
        bbox_height_px: record.bbox[3] - record.bbox[1],
    };
    let aux = CameraAux {
        object_type: record.object_type.clone(),
        alpha: record.alpha,
        bbox: record.bbox,
        height_3d: h,
        y_cam: record.location.1,
        phi_offset: raw_phi - phi,
    };
    Ok((object, aux))
}

/// Inverse of [`to_bev`]: rebuild the record from the BEV object and its
/// camera residue.
pub fn from_bev(object: &LabeledObject, aux: &CameraAux) -> KittiLabelRecord {
    let raw_phi = object.bev_box.phi + aux.phi_offset;
    KittiLabelRecord {
        object_type: aux.object_type.clone(),
        truncated: object.truncation,
        occluded: i32::from(object.occlusion),
        alpha: aux.alpha,
        bbox: aux.bbox,
        dimensions: (aux.height_3d, object.bev_box.width, object.bev_box.length),
        location: (
            -object.bev_box.center.y,
            aux.y_cam,
            object.bev_box.center.x,
        ),
        rotation_y: -raw_phi - std::f64::consts::FRAC_PI_2,
        score: object.score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn empty_file_parses_to_empty_list() {
        assert!(parse_labels("").unwrap().is_empty());
        assert!(parse_labels("\n\n").unwrap().is_empty());
    }

    #[test]
    fn score_arity_rule() {
        let line15 = "Car 0.0 0 -1.58 587.0 173.0 614.0 200.0 1.5 1.7 4.1 2.0 1.6 30.0 -1.6";
        let recs = parse_labels(line15).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].score.is_none());

        let line16 = format!("{line15} 0.93");
        let recs = parse_labels(&line16).unwrap();
        assert_eq!(recs[0].score, Some(0.93));
    }

    #[test]
    fn malformed_lines_are_positioned_errors() {
        let err = parse_labels("Car 1 2 3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");

        let two_lines =
            "Car 0.0 0 -1.58 587.0 173.0 614.0 200.0 1.5 1.7 4.1 2.0 1.6 30.0 -1.6\nCar 0.0 0 x 587.0 173.0 614.0 200.0 1.5 1.7 4.1 2.0 1.6 30.0 -1.6";
        let err = parse_labels(two_lines).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_types_are_preserved_and_flagged() {
        let line = "Van 0.0 0 -1.58 587.0 173.0 614.0 200.0 2.0 1.9 5.1 2.0 1.6 30.0 -1.6";
        let recs = parse_labels(line).unwrap();
        assert_eq!(recs[0].object_type, "Van");
        assert!(recs[0].known_class().is_none());
        let (obj, aux) = to_bev(&recs[0]).unwrap();
        assert_eq!(obj.class, Class::DontCare);
        assert_eq!(aux.object_type, "Van");
    }

    #[test]
    fn worked_bev_transform_example() {
        let line = "Car 0.0 0 0.0 587.0 173.0 614.0 200.0 1.5 1.7 4.1 0.0 1.6 10.0 -1.5707963267948966";
        let recs = parse_labels(line).unwrap();
        let (obj, _) = to_bev(&recs[0]).unwrap();
        assert!((obj.bev_box.center.x - 10.0).abs() < 1e-12);
        assert!(obj.bev_box.center.y.abs() < 1e-12);
        assert!(obj.bev_box.phi.abs() < 1e-12);
        assert!((obj.bev_box.length - 4.1).abs() < 1e-12);
        assert!((obj.bev_box.width - 1.7).abs() < 1e-12);
    }

    #[test]
    fn dontcare_records_become_ignore_regions() {
        let line = "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10";
        let recs = parse_labels(line).unwrap();
        let (obj, _) = to_bev(&recs[0]).unwrap();
        assert_eq!(obj.class, Class::DontCare);
        assert!(obj.bev_box.length > 0.0 && obj.bev_box.width > 0.0);
    }

    #[test]
    fn bev_round_trip_is_lossless() {
        let mut rng = CounterRng::new(606, 0);
        for case in 0..1000 {
            let class = ["Car", "Pedestrian", "Cyclist"][rng.pick_index(3)];
            let record = KittiLabelRecord {
                object_type: class.to_string(),
                truncated: rng.uniform_range(0.0, 0.5),
                occluded: rng.pick_index(3) as i32,
                alpha: rng.uniform_range(-3.1, 3.1),
                bbox: [100.0, 120.0, 180.0, 190.0],
                dimensions: (
                    rng.uniform_range(1.2, 2.0),
                    rng.uniform_range(0.4, 2.1),
                    rng.uniform_range(0.5, 5.2),
                ),
                location: (
                    rng.uniform_range(-30.0, 30.0),
                    rng.uniform_range(1.0, 2.5),
                    rng.uniform_range(2.0, 60.0),
                ),
                rotation_y: rng.uniform_range(-std::f64::consts::PI, std::f64::consts::PI),
                score: if case % 2 == 0 {
                    Some(rng.uniform())
                } else {
                    None
                },
            };
            let (obj, aux) = to_bev(&record).unwrap();
            let back = from_bev(&obj, &aux);
            assert_eq!(back.object_type, record.object_type);
            assert!((back.truncated - record.truncated).abs() < 1e-9);
            assert_eq!(back.occluded, record.occluded);
            assert!((back.alpha - record.alpha).abs() < 1e-9);
            assert!((back.rotation_y - record.rotation_y).abs() < 1e-9);
            for k in 0..3 {
                let (a, b) = match k {
                    0 => (back.location.0, record.location.0),
                    1 => (back.location.1, record.location.1),
                    _ => (back.location.2, record.location.2),
                };
                assert!((a - b).abs() < 1e-9);
            }
            assert!((back.dimensions.0 - record.dimensions.0).abs() < 1e-9);
            assert!((back.dimensions.1 - record.dimensions.1).abs() < 1e-9);
            assert!((back.dimensions.2 - record.dimensions.2).abs() < 1e-9);
            assert_eq!(back.score.is_some(), record.score.is_some());
        }
    }

    #[test]
    fn label_text_round_trip() {
        let line = "Car 0.1 1 -1.58 587.5 173.25 614.0 200.0 1.5 1.7 4.1 2.0 1.6 30.0 -1.6 0.87";
        let recs = parse_labels(line).unwrap();
        let text = write_labels(&recs);
        let again = parse_labels(&text).unwrap();
        assert_eq!(recs, again);
    }
}
