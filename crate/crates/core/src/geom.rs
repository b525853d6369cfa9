//! 2-D geometry primitives: vectors, polygon areas, convex hulls and
//! convex polygon clipping.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A 2-D point or vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the cross product `self × other`.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotate counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Cross product of `(a - o)` and `(b - o)`; positive when `o -> a -> b`
/// turns counter-clockwise.
pub fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a - o).cross(b - o)
}

/// Signed polygon area via the shoelace formula; positive for
/// counter-clockwise vertex order.
pub fn polygon_area(vertices: &[Vec2]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, &p) in vertices.iter().enumerate() {
        let q = vertices[(i + 1) % vertices.len()];
        acc += p.cross(q);
    }
    acc / 2.0
}

/// Convex hull of a point set by Andrew's monotone chain.
///
/// Returns the hull vertices in counter-clockwise order with collinear
/// points pruned. Fails for fewer than three distinct points or a fully
/// collinear input.
pub fn convex_hull(points: &[Vec2]) -> Result<Vec<Vec2>> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);

    if pts.len() < 3 {
        return Err(Error::DegenerateHull(format!(
            "need at least 3 distinct points, got {}",
            pts.len()
        )));
    }

    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() < 3 {
        return Err(Error::DegenerateHull("all points are collinear".into()));
    }
    Ok(lower)
}

/// Clip `subject` against a convex counter-clockwise `clip` polygon
/// (Sutherland–Hodgman). Returns the clipped polygon, possibly empty.
pub fn clip_polygon(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output = subject.to_vec();
    for (i, &a) in clip.iter().enumerate() {
        if output.is_empty() {
            break;
        }
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for (j, &p) in input.iter().enumerate() {
            let q = input[(j + 1) % input.len()];
            let p_in = cross(a, b, p) >= 0.0;
            let q_in = cross(a, b, q) >= 0.0;
            if p_in {
                output.push(p);
            }
            if p_in != q_in {
                if let Some(x) = segment_line_intersection(p, q, a, b) {
                    output.push(x);
                }
            }
        }
    }
    output
}

/// Intersection of segment `p..q` with the infinite line through `a`, `b`.
fn segment_line_intersection(p: Vec2, q: Vec2, a: Vec2, b: Vec2) -> Option<Vec2> {
    let d = q - p;
    let e = b - a;
    let denom = d.cross(e);
    if denom == 0.0 {
        return None;
    }
    let t = (a - p).cross(e) / denom;
    Some(p + d * t)
}

/// Whether `p` lies inside (or within `tol` of the boundary of) a convex
/// counter-clockwise polygon.
pub fn point_in_convex(p: Vec2, polygon: &[Vec2], tol: f64) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    for (i, &a) in polygon.iter().enumerate() {
        let b = polygon[(i + 1) % polygon.len()];
        if cross(a, b, p) < -tol {
            return false;
        }
    }
    true
}

/// Whether every vertex of `inner` lies inside the convex CCW `outer`.
pub fn polygon_contains(outer: &[Vec2], inner: &[Vec2], tol: f64) -> bool {
    inner.iter().all(|&p| point_in_convex(p, outer, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn hull_drops_interior_point() {
        let pts = [v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0), v(0.5, 0.5)];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        assert!(polygon_area(&hull) > 0.0);
        assert!((polygon_area(&hull) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_of_triangle_is_triangle() {
        let pts = [v(0.0, 0.0), v(2.0, 0.0), v(1.0, 1.5)];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 3);
    }

    #[test]
    fn hull_rejects_degenerate_input() {
        assert!(convex_hull(&[v(0.0, 0.0), v(1.0, 1.0)]).is_err());
        assert!(convex_hull(&[v(0.0, 0.0), v(1.0, 1.0), v(2.0, 2.0), v(3.0, 3.0)]).is_err());
    }

    #[test]
    fn hull_area_dominates_input_triangles() {
        // brute-force triangle sweep on a subsample
        let mut rng = crate::rng::CounterRng::new(7, 0);
        let pts: Vec<Vec2> = (0..10_000)
            .map(|_| v(rng.uniform_range(-5.0, 5.0), rng.uniform_range(-5.0, 5.0)))
            .collect();
        let hull = convex_hull(&pts).unwrap();
        let hull_area = polygon_area(&hull);
        let sub: Vec<Vec2> = pts.iter().step_by(200).copied().collect();
        assert_eq!(sub.len(), 50);
        for i in 0..sub.len() {
            for j in (i + 1)..sub.len() {
                for k in (j + 1)..sub.len() {
                    let tri = cross(sub[i], sub[j], sub[k]).abs() / 2.0;
                    assert!(hull_area >= tri - 1e-12);
                }
            }
        }
    }

    #[test]
    fn clip_axis_aligned_overlap() {
        let a = [v(0.0, 0.0), v(2.0, 0.0), v(2.0, 2.0), v(0.0, 2.0)];
        let b = [v(1.0, 0.0), v(3.0, 0.0), v(3.0, 2.0), v(1.0, 2.0)];
        let inter = clip_polygon(&a, &b);
        assert!((polygon_area(&inter) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_containment() {
        let square = [v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)];
        assert!(point_in_convex(v(0.5, 0.5), &square, 1e-12));
        assert!(point_in_convex(v(0.0, 0.0), &square, 1e-9));
        assert!(!point_in_convex(v(1.5, 0.5), &square, 1e-12));
    }
}
