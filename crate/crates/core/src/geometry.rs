//! Planar primitives: points, angle arithmetic on the circle, segment/circle
//! intersection and the exact open-segment crossing predicate.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use robust::{orient2d, Coord};
use serde::{Deserialize, Serialize};

/// Discriminants below this fraction of `|q - p|^2 r^2` are treated as tangency.
pub const TANGENCY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// `r e^{i theta}`.
    #[inline]
    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(r * c, r * s)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Argument in `[0, 2π)`.
    #[inline]
    pub fn arg(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
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
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Maps any finite angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Length of the counterclockwise arc from `from` to `to`, in `[0, 2π)`.
#[inline]
pub fn ccw_gap(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

/// Point bisecting the counterclockwise arc from `from` to `to`.
#[inline]
pub fn ccw_midpoint(from: f64, to: f64) -> f64 {
    normalize_angle(from + ccw_gap(from, to) / 2.0)
}

/// Smallest absolute angular distance between two directions, in `[0, π]`.
#[inline]
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = ccw_gap(a, b);
    d.min(TAU - d)
}

/// Maps an angle into `(-π, π]`.
#[inline]
pub fn signed_angle(a: f64) -> f64 {
    let n = normalize_angle(a);
    if n > std::f64::consts::PI {
        n - TAU
    } else {
        n
    }
}

/// Calls `f(t, point)` for each crossing of the open segment `(p, q)` with the
/// circle `S(O, r)`, in increasing order of the segment parameter `t`.
#[inline]
pub(crate) fn for_each_circle_crossing(p: Point, q: Point, r: f64, mut f: impl FnMut(f64, Point)) {
    let d = q - p;
    let a = d.norm_sq();
    if a == 0.0 {
        return;
    }
    let b = p.dot(d);
    let r2 = r * r;
    let c = p.norm_sq() - r2;
    let disc = b * b - a * c;
    if disc <= TANGENCY_TOLERANCE * a * r2 {
        return;
    }
    let s = disc.sqrt();
    // numerically stable pair of roots
    let qq = -(b + s.copysign(b));
    let (mut t0, mut t1) = (qq / a, c / qq);
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    for t in [t0, t1] {
        if t > 0.0 && t < 1.0 {
            let x = p + d * t;
            let n = x.norm();
            f(t, if n > 0.0 { x * (r / n) } else { x });
        }
    }
}

/// Crossings of `S(O, r)` by the tree edge from `child` to its ancestor.
///
/// The edge is taken half-open, child end included, so a path through a vertex
/// lying exactly on the circle meets it once. Requires `|ancestor| < |child|`.
#[inline]
pub(crate) fn for_each_edge_crossing(
    child: Point,
    ancestor: Point,
    r: f64,
    mut f: impl FnMut(Point),
) {
    let (n2, r2) = (child.norm_sq(), r * r);
    if n2 < r2 {
        return;
    }
    if n2 == r2 {
        f(child);
        return;
    }
    for_each_circle_crossing(child, ancestor, r, |_, p| f(p));
}

/// Intersections of the open segment `(p, q)` with the circle of radius `r`
/// centred at the origin. Tangent contacts are not reported.
pub fn segment_circle_intersections(p: Point, q: Point, r: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(2);
    if r > 0.0 {
        for_each_circle_crossing(p, q, r, |_, x| out.push(x));
    }
    out
}

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    orient2d(
        Coord { x: a.x, y: a.y },
        Coord { x: b.x, y: b.y },
        Coord { x: c.x, y: c.y },
    )
}

/// Exact test for a common point of the open segments `(a, b)` and `(c, d)`.
///
/// Shared endpoints and T-junctions (an endpoint of one segment lying inside
/// the other) do not count; collinear segments count only when their
/// interiors overlap on a set of positive length.
pub fn open_segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    if o1 == 0.0 && o2 == 0.0 {
        let (u0, u1, v0, v1) = if (b.x - a.x).abs() >= (b.y - a.y).abs() {
            (a.x, b.x, c.x, d.x)
        } else {
            (a.y, b.y, c.y, d.y)
        };
        let lo = u0.min(u1).max(v0.min(v1));
        let hi = u0.max(u1).min(v0.max(v1));
        return lo < hi;
    }
    if !((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) {
        return false;
    }
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)
}
