//! Point-cloud readers and writers.
//!
//! The binary format is the KITTI velodyne layout: consecutive
//! little-endian `f32` quadruples `(x, y, z, intensity)` with no header.
//! The ASCII variant holds one `x y z intensity` line per point.

use crate::error::{Error, Result};
use crate::gridmap::{PointCloud, PointXyzi};

/// Parse a binary cloud. The byte length must be a multiple of 16.
pub fn read_point_cloud(bytes: &[u8], sensor_origin: [f64; 3]) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Length(format!(
            "cloud byte length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    let mut points = Vec::with_capacity(bytes.len() / 16);
    for chunk in bytes.chunks_exact(16) {
        let f = |i: usize| {
            f32::from_le_bytes([chunk[i], chunk[i + 1], chunk[i + 2], chunk[i + 3]]) as f64
        };
        points.push(PointXyzi {
            x: f(0),
            y: f(4),
            z: f(8),
            intensity: f(12),
        });
    }
    PointCloud::new(points, sensor_origin)
}

pub fn write_point_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.points.len() * 16);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Parse the ASCII `x y z intensity` per-line format.
pub fn parse_point_cloud_ascii(text: &str, sensor_origin: [f64; 3]) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 4];
        for (k, f) in fields.iter().enumerate() {
            vals[k] = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("field {} is not numeric: '{f}'", k + 1),
            })?;
        }
        points.push(PointXyzi {
            x: vals[0],
            y: vals[1],
            z: vals[2],
            intensity: vals[3],
        });
    }
    PointCloud::new(points, sensor_origin)
}

pub fn write_point_cloud_ascii(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in &cloud.points {
        out.push_str(&format!("{:?} {:?} {:?} {:?}\n", p.x, p.y, p.z, p.intensity));
    }
    out
}
