//! Small helpers for planar points stored as `[f64; 2]`.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(s: f64, a: Point) -> Point {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Twice the signed area of the triangle `(a, b, c)`; positive when counterclockwise.
#[inline]
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

#[inline]
pub fn centroid(p: &[Point; 3]) -> Point {
    [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ]
}

/// Point with barycentric coordinates `lambda` in triangle `p`.
#[inline]
pub fn from_barycentric(p: &[Point; 3], lambda: [f64; 3]) -> Point {
    [
        lambda[0] * p[0][0] + lambda[1] * p[1][0] + lambda[2] * p[2][0],
        lambda[0] * p[0][1] + lambda[1] * p[1][1] + lambda[2] * p[2][1],
    ]
}
