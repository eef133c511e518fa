//! Planar primitives: points, segment intersection, polygon predicates.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Rotation by `theta` about the origin.
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Intersection of segments `p0 p1` and `q0 q1`, returned as the parameters
/// `(t, u)` with `p0 + t (p1 - p0) = q0 + u (q1 - q0)`, both in `[0, 1]`.
/// Collinear overlaps report the earliest overlapping `t`.
pub fn segment_intersection(p0: Point, p1: Point, q0: Point, q1: Point) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    let qp = q0 - p0;
    let scale = r.norm() * s.norm();
    if denom.abs() <= 1e-14 * scale {
        // parallel
        if qp.cross(r).abs() > 1e-14 * r.norm() * qp.norm().max(1e-300) {
            return None;
        }
        let rr = r.dot(r);
        if rr == 0.0 {
            return None;
        }
        let t0 = qp.dot(r) / rr;
        let t1 = (q1 - p0).dot(r) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        if hi < 0.0 || lo > 1.0 {
            return None;
        }
        let t = lo.max(0.0);
        let u = if s.dot(s) > 0.0 { ((p0 + r * t) - q0).dot(s) / s.dot(s) } else { 0.0 };
        return Some((t, u.clamp(0.0, 1.0)));
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let eps = 1e-12;
    if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
        Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// Where segment `p -> q` meets the ray `{y = 0, x <= 0}`: the x coordinate
/// of the linearly interpolated crossing of `y = 0`, if it is `<= 0`.
pub fn negative_axis_crossing(p: Point, q: Point) -> Option<f64> {
    if p.y == 0.0 && q.y == 0.0 {
        return if p.x <= 0.0 {
            Some(p.x)
        } else if q.x <= 0.0 {
            Some(0.0)
        } else {
            None
        };
    }
    if (p.y > 0.0 && q.y > 0.0) || (p.y < 0.0 && q.y < 0.0) {
        return None;
    }
    let frac = p.y / (p.y - q.y);
    let x = p.x + frac * (q.x - p.x);
    (x <= 0.0).then_some(x)
}

/// Twice the signed area (positive for counterclockwise order).
pub fn signed_area2(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum()
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Distance from `p` to segment `a b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments() {
        let (t, u) = segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(2.0, 0.0),
        )
        .unwrap();
        assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disjoint_and_parallel() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert!(segment_intersection(a, b, Point::new(0.0, 1.0), Point::new(1.0, 1.0)).is_none());
        assert!(segment_intersection(a, b, Point::new(2.0, -1.0), Point::new(2.0, 1.0)).is_none());
        let (t, _) = segment_intersection(a, b, Point::new(0.5, 0.0), Point::new(3.0, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn axis_crossing() {
        assert_eq!(negative_axis_crossing(Point::new(1.0, 1.0), Point::new(-1.0, -1.0)), Some(0.0));
        assert_eq!(negative_axis_crossing(Point::new(-2.0, 1.0), Point::new(-2.0, -3.0)), Some(-2.0));
        assert_eq!(negative_axis_crossing(Point::new(2.0, 1.0), Point::new(1.0, -1.0)), None);
        assert_eq!(negative_axis_crossing(Point::new(-1.0, 1.0), Point::new(-1.0, 2.0)), None);
        // start on the positive axis
        assert_eq!(negative_axis_crossing(Point::new(1.0, 0.0), Point::new(1.1, 0.3)), None);
    }

    #[test]
    fn polygon_predicates() {
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert_eq!(signed_area2(&sq), 2.0);
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point::new(1.5, 0.5), &sq));
        assert!((point_segment_distance(Point::new(0.5, 2.0), sq[2], sq[3]) - 1.0).abs() < 1e-15);
    }
}
