//! Fixed-degree quadrature on the reference triangle and the unit segment.

use crate::error::{Error, Result};
use crate::geometry::{self, Point};

/// Rule on the reference triangle `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.
///
/// Points are barycentric `(1 - ξ - η, ξ, η)`; weights sum to `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// Rule on `[0, 1]`; weights sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

pub const MAX_TRIANGLE_DEGREE: usize = 10;
pub const MAX_SEGMENT_DEGREE: usize = 11;

/// Triangle rule exact for polynomials of total degree `min_degree` (1 ≤ degree ≤ 10).
pub fn triangle_rule(min_degree: usize) -> Result<TriangleRule> {
    match min_degree {
        1 => Ok(TriangleRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![0.5],
            exact_degree: 1,
        }),
        2 => Ok(TriangleRule {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 6.0; 3],
            exact_degree: 2,
        }),
        3..=5 => Ok(radon_seven_point()),
        6..=MAX_TRIANGLE_DEGREE => collapsed_triangle_rule(min_degree),
        _ => Err(Error::UnsupportedQuadrature {
            kind: "triangle",
            degree: min_degree,
        }),
    }
}

/// Seven-point degree-5 rule.
fn radon_seven_point() -> TriangleRule {
    let s15 = 15f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (6.0 + s15) / 21.0;
    let wa = (155.0 - s15) / 2400.0;
    let wb = (155.0 + s15) / 2400.0;
    let orbit = |t: f64| [[t, t, 1.0 - 2.0 * t], [t, 1.0 - 2.0 * t, t], [1.0 - 2.0 * t, t, t]];
    let mut points = vec![[1.0 / 3.0; 3]];
    points.extend(orbit(a));
    points.extend(orbit(b));
    let mut weights = vec![9.0 / 80.0];
    weights.extend([wa; 3]);
    weights.extend([wb; 3]);
    TriangleRule {
        points,
        weights,
        exact_degree: 5,
    }
}

/// Conical-product rule from Gauss-Legendre factors, exact to any requested degree.
///
/// Maps the unit square onto the triangle by `ξ = u`, `η = (1 - u) v`; the extra
/// `(1 - u)` Jacobian raises the degree in `u` by one.
pub fn collapsed_triangle_rule(min_degree: usize) -> Result<TriangleRule> {
    if min_degree == 0 || min_degree > 41 {
        return Err(Error::UnsupportedQuadrature {
            kind: "collapsed triangle",
            degree: min_degree,
        });
    }
    let n = (min_degree + 3) / 2;
    let (x, w) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            let xi = u;
            let eta = (1.0 - u) * v;
            points.push([1.0 - xi - eta, xi, eta]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        exact_degree: 2 * n - 2,
    })
}

/// Gauss-Legendre rule on `[0, 1]` with `2n - 1 ≥ min_degree` (1 ≤ degree ≤ 11).
pub fn segment_rule(min_degree: usize) -> Result<SegmentRule> {
    if min_degree == 0 || min_degree > MAX_SEGMENT_DEGREE {
        return Err(Error::UnsupportedQuadrature {
            kind: "segment",
            degree: min_degree,
        });
    }
    let n = min_degree / 2 + 1;
    let (points, weights) = gauss_legendre_unit(n);
    Ok(SegmentRule {
        points,
        weights,
        exact_degree: 2 * n - 1,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        // Ascending order on [0, 1].
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_K f` by affine mapping of `rule` onto triangle `tri`.
pub fn integrate_on_triangle(f: impl Fn(Point) -> f64, tri: &[Point; 3], rule: &TriangleRule) -> Result<f64> {
    let jac = geometry::signed_area2(tri[0], tri[1], tri[2]).abs();
    if jac <= 0.0 {
        return Err(Error::DegenerateElement { measure: 0.0 });
    }
    let sum: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(lambda, w)| w * f(geometry::from_barycentric(tri, *lambda)))
        .sum();
    Ok(jac * sum)
}

/// `∫_e f ds` on the segment `edge[0] → edge[1]`.
pub fn integrate_on_segment(f: impl Fn(Point) -> f64, edge: &[Point; 2], rule: &SegmentRule) -> Result<f64> {
    let len = geometry::norm(geometry::sub(edge[1], edge[0]));
    if len <= 0.0 {
        return Err(Error::DegenerateElement { measure: 0.0 });
    }
    let sum: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&t, w)| w * f(segment_point(edge, t)))
        .sum();
    Ok(len * sum)
}

#[inline]
pub fn segment_point(edge: &[Point; 2], t: f64) -> Point {
    [
        (1.0 - t) * edge[0][0] + t * edge[1][0],
        (1.0 - t) * edge[0][1] + t * edge[1][1],
    ]
}
