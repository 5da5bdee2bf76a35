//! Manufactured solutions on the four-quadrant domain.
//!
//! Every case is a pressure given in closed form per quadrant, a region-constant
//! flow resistance `a`, a constant interface storage rate `β`, and the data
//! `F = ∇·u`, `u = -(∇p + g)/a` derived from it. Interface data is either
//! derived from the exact fields through the exchange conditions
//!
//! ```text
//! f_stress = p₂ - p₁,     f_n = u₁·n̂ - u₂·n̂ - β p₂
//! ```
//!
//! (one-sided limits, `n̂` pointing from Ω₁ into Ω₂), taken verbatim from
//! published formulas, or replaced by a constant.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::assembly::CoefficientSet;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::mesh::{Quadrant, Region};

/// Closed-form pressure, evaluated with the formula of a given quadrant so that
/// one-sided limits on the axes are available.
pub trait ExactSolution: Send + Sync + fmt::Debug {
    fn pressure(&self, q: Quadrant, x: Point) -> f64;
    fn pressure_gradient(&self, q: Quadrant, x: Point) -> Point;
    fn pressure_laplacian(&self, q: Quadrant, x: Point) -> f64;

    /// Body force `g` of the Darcy law `a u + ∇p + g = 0`.
    fn body_force(&self, _q: Quadrant, _x: Point) -> Point {
        [0.0, 0.0]
    }

    fn body_force_divergence(&self, _q: Quadrant, _x: Point) -> f64 {
        0.0
    }
}

/// `t (t² - 1)²` and its first two derivatives.
fn bubble(t: f64) -> (f64, f64, f64) {
    let s = t * t - 1.0;
    (t * s * s, s * (5.0 * t * t - 1.0), 20.0 * t * t * t - 12.0 * t)
}

/// `p = x y (x-1)² (y-1)² (x+1)² (y+1)²` on the whole square.
#[derive(Clone, Copy, Debug, Default)]
pub struct Polynomial;

impl ExactSolution for Polynomial {
    fn pressure(&self, _q: Quadrant, [x, y]: Point) -> f64 {
        bubble(x).0 * bubble(y).0
    }

    fn pressure_gradient(&self, _q: Quadrant, [x, y]: Point) -> Point {
        let (bx, dx, _) = bubble(x);
        let (by, dy, _) = bubble(y);
        [dx * by, bx * dy]
    }

    fn pressure_laplacian(&self, _q: Quadrant, [x, y]: Point) -> f64 {
        let (bx, _, ddx) = bubble(x);
        let (by, _, ddy) = bubble(y);
        ddx * by + bx * ddy
    }
}

/// [`Polynomial`] plus the harmonic `((x-1)² - (y+1)²)/20` on the fourth quadrant.
#[derive(Clone, Copy, Debug, Default)]
pub struct PerturbedPolynomial;

impl ExactSolution for PerturbedPolynomial {
    fn pressure(&self, q: Quadrant, x: Point) -> f64 {
        let base = Polynomial.pressure(q, x);
        if q == Quadrant::Q4 {
            base + ((x[0] - 1.0).powi(2) - (x[1] + 1.0).powi(2)) / 20.0
        } else {
            base
        }
    }

    fn pressure_gradient(&self, q: Quadrant, x: Point) -> Point {
        let g = Polynomial.pressure_gradient(q, x);
        if q == Quadrant::Q4 {
            [g[0] + (x[0] - 1.0) / 10.0, g[1] - (x[1] + 1.0) / 10.0]
        } else {
            g
        }
    }

    fn pressure_laplacian(&self, q: Quadrant, x: Point) -> f64 {
        Polynomial.pressure_laplacian(q, x)
    }
}

/// `p = sin²(π(x-1)/2) sin²(π(y-1)/2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SineSquared;

fn sine_factor(t: f64) -> (f64, f64, f64) {
    let s = (0.5 * PI * (t - 1.0)).sin();
    (s * s, 0.5 * PI * (PI * (t - 1.0)).sin(), 0.5 * PI * PI * (PI * (t - 1.0)).cos())
}

impl ExactSolution for SineSquared {
    fn pressure(&self, _q: Quadrant, [x, y]: Point) -> f64 {
        sine_factor(x).0 * sine_factor(y).0
    }

    fn pressure_gradient(&self, _q: Quadrant, [x, y]: Point) -> Point {
        let (sx, dx, _) = sine_factor(x);
        let (sy, dy, _) = sine_factor(y);
        [dx * sy, sx * dy]
    }

    fn pressure_laplacian(&self, _q: Quadrant, [x, y]: Point) -> f64 {
        let (sx, _, ddx) = sine_factor(x);
        let (sy, _, ddy) = sine_factor(y);
        ddx * sy + sx * ddy
    }
}

/// Fields reproduced exactly by the discrete spaces: constant `u₁` with `p₁ = 0`
/// on Ω₁, linear `p₂` with `u₂ = 0` on Ω₂, held in place by a body force.
#[derive(Clone, Copy, Debug)]
pub struct PatchSolution {
    pub velocity_one: Point,
    /// `p₂ = c₀ + c₁ x + c₂ y`.
    pub pressure_two: [f64; 3],
    pub a_one: f64,
}

impl ExactSolution for PatchSolution {
    fn pressure(&self, q: Quadrant, [x, y]: Point) -> f64 {
        match q.region() {
            Region::One => 0.0,
            Region::Two => self.pressure_two[0] + self.pressure_two[1] * x + self.pressure_two[2] * y,
        }
    }

    fn pressure_gradient(&self, q: Quadrant, _x: Point) -> Point {
        match q.region() {
            Region::One => [0.0, 0.0],
            Region::Two => [self.pressure_two[1], self.pressure_two[2]],
        }
    }

    fn pressure_laplacian(&self, _q: Quadrant, _x: Point) -> f64 {
        0.0
    }

    fn body_force(&self, q: Quadrant, _x: Point) -> Point {
        match q.region() {
            Region::One => geometry::scale(-self.a_one, self.velocity_one),
            Region::Two => [-self.pressure_two[1], -self.pressure_two[2]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InterfaceMode {
    /// Exchange data computed from the exact fields.
    Derived,
    /// Published interface formulas (examples 2 and 3 only).
    PaperLiteral,
    /// `f_n ≡ -1/√2`, the constant projection of `-p|_Γ` (example 4 only).
    ConstantProjection,
}

impl InterfaceMode {
    pub fn name(self) -> &'static str {
        match self {
            InterfaceMode::Derived => "derived",
            InterfaceMode::PaperLiteral => "paper_literal",
            InterfaceMode::ConstantProjection => "constant_projection",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LiteralFormulas {
    PerturbedJump,
    ResistanceJump,
}

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub exact: Arc<dyn ExactSolution>,
    /// Flow resistance on Ω₁ and Ω₂.
    pub a: [f64; 2],
    pub beta: f64,
    pub interface_mode: InterfaceMode,
    literal: Option<LiteralFormulas>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("exact", &self.exact)
            .field("a", &self.a)
            .field("beta", &self.beta)
            .field("interface_mode", &self.interface_mode)
            .finish()
    }
}

pub const CONSTANT_PROJECTION_FLUX: f64 = -FRAC_1_SQRT_2;

/// Smooth continuous solution, `a ≡ 1`, `β ≡ 1`.
pub fn example1() -> ManufacturedCase {
    ManufacturedCase::new("example1", Arc::new(Polynomial), [1.0, 1.0], 1.0)
}

/// Pressure and flux jumps on the fourth-quadrant interface.
pub fn example2(mode: InterfaceMode) -> Result<ManufacturedCase> {
    let mut case = ManufacturedCase::new("example2", Arc::new(PerturbedPolynomial), [1.0, 1.0], 1.0);
    case.set_mode(mode, Some(LiteralFormulas::PerturbedJump), false)?;
    Ok(case)
}

/// Continuous pressure with a resistance jump `a = 1` on Ω₁, `5` on Ω₂.
pub fn example3(mode: InterfaceMode) -> Result<ManufacturedCase> {
    let mut case = ManufacturedCase::new("example3", Arc::new(Polynomial), [1.0, 5.0], 1.0);
    case.set_mode(mode, Some(LiteralFormulas::ResistanceJump), false)?;
    Ok(case)
}

/// Trigonometric pressure with the resistance jump; `f_n = -p|_Γ` when derived.
pub fn example4(mode: InterfaceMode) -> Result<ManufacturedCase> {
    let mut case = ManufacturedCase::new("example4", Arc::new(SineSquared), [1.0, 5.0], 1.0);
    case.set_mode(mode, None, true)?;
    Ok(case)
}

impl ManufacturedCase {
    pub fn new(name: &str, exact: Arc<dyn ExactSolution>, a: [f64; 2], beta: f64) -> Self {
        ManufacturedCase {
            name: name.to_string(),
            exact,
            a,
            beta,
            interface_mode: InterfaceMode::Derived,
            literal: None,
        }
    }

    /// Case by example number (1–4).
    pub fn example(number: usize, mode: InterfaceMode) -> Result<Self> {
        match number {
            1 => {
                let mut case = example1();
                case.set_mode(mode, None, false)?;
                Ok(case)
            }
            2 => example2(mode),
            3 => example3(mode),
            4 => example4(mode),
            n => Err(Error::Inadmissible(format!("no example {n}; choose 1 to 4"))),
        }
    }

    /// Patch-test case whose exact solution lies in the discrete spaces.
    pub fn patch(velocity_one: Point, pressure_two: [f64; 3], a: [f64; 2], beta: f64) -> Self {
        let exact = PatchSolution {
            velocity_one,
            pressure_two,
            a_one: a[0],
        };
        ManufacturedCase::new("patch", Arc::new(exact), a, beta)
    }

    fn set_mode(&mut self, mode: InterfaceMode, literal: Option<LiteralFormulas>, projection: bool) -> Result<()> {
        match mode {
            InterfaceMode::Derived => {}
            InterfaceMode::PaperLiteral if literal.is_some() => self.literal = literal,
            InterfaceMode::ConstantProjection if projection => {}
            _ => {
                return Err(Error::Inadmissible(format!(
                    "interface mode {} is not available for {}",
                    mode.name(),
                    self.name
                )))
            }
        }
        self.interface_mode = mode;
        Ok(())
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Multiplies every datum (and hence the solution) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut case = self.clone();
        case.name = format!("{} x {factor}", self.name);
        case.exact = Arc::new(Scaled {
            inner: self.exact.clone(),
            factor,
        });
        case
    }

    pub fn coefficients(&self) -> CoefficientSet {
        CoefficientSet::piecewise(self.a[0], self.a[1], self.beta)
    }

    pub fn resistance(&self, q: Quadrant) -> f64 {
        match q.region() {
            Region::One => self.a[0],
            Region::Two => self.a[1],
        }
    }

    pub fn pressure(&self, q: Quadrant, x: Point) -> f64 {
        self.exact.pressure(q, x)
    }

    /// `u = -(∇p + g) / a`.
    pub fn velocity(&self, q: Quadrant, x: Point) -> Point {
        let g = geometry::add(self.exact.pressure_gradient(q, x), self.exact.body_force(q, x));
        geometry::scale(-1.0 / self.resistance(q), g)
    }

    /// `F = ∇·u = -(Δp + ∇·g) / a`.
    pub fn source(&self, q: Quadrant, x: Point) -> f64 {
        -(self.exact.pressure_laplacian(q, x) + self.exact.body_force_divergence(q, x)) / self.resistance(q)
    }

    pub fn body_force(&self, q: Quadrant, x: Point) -> Point {
        self.exact.body_force(q, x)
    }

    /// `(f_stress, f_n)` at interface point `s`, given the unit normal from Ω₁
    /// into Ω₂ and the quadrants on either side.
    pub fn interface_forcing(&self, s: Point, normal: Point, one: Quadrant, two: Quadrant) -> Result<(f64, f64)> {
        if !on_interface(s) {
            return Err(Error::NotOnInterface(s));
        }
        match self.interface_mode {
            InterfaceMode::Derived => derive_interface_data(self, s, normal, one, two),
            InterfaceMode::PaperLiteral => Ok(self.literal.expect("literal formulas").eval(s)),
            InterfaceMode::ConstantProjection => {
                let (stress, _) = derive_interface_data(self, s, normal, one, two)?;
                Ok((stress, CONSTANT_PROJECTION_FLUX))
            }
        }
    }
}

#[derive(Debug)]
struct Scaled {
    inner: Arc<dyn ExactSolution>,
    factor: f64,
}

impl ExactSolution for Scaled {
    fn pressure(&self, q: Quadrant, x: Point) -> f64 {
        self.factor * self.inner.pressure(q, x)
    }

    fn pressure_gradient(&self, q: Quadrant, x: Point) -> Point {
        geometry::scale(self.factor, self.inner.pressure_gradient(q, x))
    }

    fn pressure_laplacian(&self, q: Quadrant, x: Point) -> f64 {
        self.factor * self.inner.pressure_laplacian(q, x)
    }

    fn body_force(&self, q: Quadrant, x: Point) -> Point {
        geometry::scale(self.factor, self.inner.body_force(q, x))
    }

    fn body_force_divergence(&self, q: Quadrant, x: Point) -> f64 {
        self.factor * self.inner.body_force_divergence(q, x)
    }
}

const AXIS_TOL: f64 = 1e-12;

fn on_interface([x, y]: Point) -> bool {
    (y.abs() <= AXIS_TOL && x.abs() < 1.0) || (x.abs() <= AXIS_TOL && y.abs() < 1.0)
}

impl LiteralFormulas {
    fn eval(self, [x, y]: Point) -> (f64, f64) {
        let horizontal = y.abs() <= AXIS_TOL;
        match self {
            LiteralFormulas::PerturbedJump => {
                if horizontal && x > 0.0 {
                    (((x - 1.0).powi(2) - 1.0) / 20.0, (x - 4.0) / 20.0)
                } else if !horizontal && y < 0.0 {
                    ((1.0 - (y + 1.0).powi(2)) / 20.0, (4.0 - y) / 20.0)
                } else {
                    (0.0, 0.0)
                }
            }
            LiteralFormulas::ResistanceJump => {
                let t = if horizontal { x } else { y };
                (0.0, 0.8 * t * (t * t - 1.0).powi(2))
            }
        }
    }
}

/// Interface data satisfying both exchange conditions for the exact fields.
pub fn derive_interface_data(
    case: &ManufacturedCase,
    s: Point,
    normal: Point,
    one: Quadrant,
    two: Quadrant,
) -> Result<(f64, f64)> {
    if !on_interface(s) {
        return Err(Error::NotOnInterface(s));
    }
    let p1 = case.pressure(one, s);
    let p2 = case.pressure(two, s);
    let flux1 = geometry::dot(case.velocity(one, s), normal);
    let flux2 = geometry::dot(case.velocity(two, s), normal);
    Ok((p2 - p1, flux1 - flux2 - case.beta * p2))
}

/// Deterministic interior sample points of quadrant `q`, kept `margin` away from the axes and boundary.
fn quadrant_samples(q: Quadrant, count: usize, margin: f64) -> Vec<Point> {
    let (sx, sy) = match q {
        Quadrant::Q1 => (1.0, 1.0),
        Quadrant::Q2 => (-1.0, 1.0),
        Quadrant::Q3 => (-1.0, -1.0),
        Quadrant::Q4 => (1.0, -1.0),
    };
    // Additive recurrence with the plastic-number constants.
    let g = 1.324_717_957_244_746_f64;
    let (ax, ay) = (1.0 / g, 1.0 / (g * g));
    (0..count)
        .map(|i| {
            let u = (0.5 + ax * i as f64).fract();
            let v = (0.5 + ay * i as f64).fract();
            let span = 1.0 - 2.0 * margin;
            [sx * (margin + span * u), sy * (margin + span * v)]
        })
        .collect()
}

/// Worst discrepancy between the closed-form calculus and central differences
/// (step `1e-5`) over 200 interior points per region, measured relative to
/// `1 + |exact|`.
pub fn finite_difference_check(case: &ManufacturedCase) -> f64 {
    const STEP: f64 = 1e-5;
    let mut worst: f64 = 0.0;
    let mut record = |exact: f64, approx: f64| {
        worst = worst.max((exact - approx).abs() / (1.0 + exact.abs()));
    };
    for q in [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4] {
        for x in quadrant_samples(q, 100, 0.01) {
            let shift = |dx: f64, dy: f64| [x[0] + dx, x[1] + dy];
            let p = |y: Point| case.pressure(q, y);
            let g = case.exact.pressure_gradient(q, x);
            record(g[0], (p(shift(STEP, 0.0)) - p(shift(-STEP, 0.0))) / (2.0 * STEP));
            record(g[1], (p(shift(0.0, STEP)) - p(shift(0.0, -STEP))) / (2.0 * STEP));

            let grad = |y: Point| case.exact.pressure_gradient(q, y);
            let lap = (grad(shift(STEP, 0.0))[0] - grad(shift(-STEP, 0.0))[0]
                + grad(shift(0.0, STEP))[1]
                - grad(shift(0.0, -STEP))[1])
                / (2.0 * STEP);
            record(case.exact.pressure_laplacian(q, x), lap);

            let u = |y: Point| case.velocity(q, y);
            let div = (u(shift(STEP, 0.0))[0] - u(shift(-STEP, 0.0))[0] + u(shift(0.0, STEP))[1]
                - u(shift(0.0, -STEP))[1])
                / (2.0 * STEP);
            record(case.source(q, x), div);
        }
    }
    worst
}

/// Largest violation of `p = 0` on the outer boundary of Ω₁ and `u·n = 0` on the
/// outer boundary of Ω₂, sampled at 101 points per boundary side.
pub fn boundary_compatibility(case: &ManufacturedCase) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let t = i as f64 / 100.0;
        // (quadrant, point, outward normal)
        let sides = [
            (Quadrant::Q1, [1.0, t], [1.0, 0.0]),
            (Quadrant::Q1, [t, 1.0], [0.0, 1.0]),
            (Quadrant::Q3, [-1.0, -t], [-1.0, 0.0]),
            (Quadrant::Q3, [-t, -1.0], [0.0, -1.0]),
            (Quadrant::Q2, [-1.0, t], [-1.0, 0.0]),
            (Quadrant::Q2, [-t, 1.0], [0.0, 1.0]),
            (Quadrant::Q4, [1.0, -t], [1.0, 0.0]),
            (Quadrant::Q4, [t, -1.0], [0.0, -1.0]),
        ];
        for (q, x, n) in sides {
            let v = match q.region() {
                Region::One => case.pressure(q, x),
                Region::Two => geometry::dot(case.velocity(q, x), n),
            };
            worst = worst.max(v.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const H_POS: (Point, Quadrant, Quadrant) = ([0.0, -1.0], Quadrant::Q1, Quadrant::Q4);
    const H_NEG: (Point, Quadrant, Quadrant) = ([0.0, 1.0], Quadrant::Q3, Quadrant::Q2);
    const V_POS: (Point, Quadrant, Quadrant) = ([-1.0, 0.0], Quadrant::Q1, Quadrant::Q2);
    const V_NEG: (Point, Quadrant, Quadrant) = ([1.0, 0.0], Quadrant::Q3, Quadrant::Q4);

    #[test]
    fn example1_values() {
        let case = example1();
        assert_relative_eq!(case.pressure(Quadrant::Q1, [0.5, 0.5]), 0.0791015625, epsilon = 1e-15);
        for t in [-0.9f64, -0.3, 0.2, 0.75] {
            for (n, one, two) in [H_POS, H_NEG, V_POS, V_NEG] {
                let s = if n[0] == 0.0 { [t.abs() * -n[1], 0.0] } else { [0.0, t.abs() * -n[0]] };
                assert_eq!(case.pressure(one, s), 0.0);
                let (fs, fnn) = case.interface_forcing(s, n, one, two).unwrap();
                assert!(fs.abs() <= 1e-14 && fnn.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn example2_derived_data_on_positive_x_axis() {
        let case = example2(InterfaceMode::Derived).unwrap();
        let (n, one, two) = H_POS;
        for x in [0.1, 0.5, 0.9] {
            let (fs, fnn) = case.interface_forcing([x, 0.0], n, one, two).unwrap();
            assert_relative_eq!(fs, (x * x - 2.0 * x) / 20.0, epsilon = 1e-14);
            assert_relative_eq!(fnn, 0.1 - (x * x - 2.0 * x) / 20.0, epsilon = 1e-14);
        }
        assert_eq!(PerturbedPolynomial.pressure_laplacian(Quadrant::Q4, [0.3, -0.4]), Polynomial.pressure_laplacian(Quadrant::Q4, [0.3, -0.4]));
    }

    #[test]
    fn example2_literal_formulas() {
        let case = example2(InterfaceMode::PaperLiteral).unwrap();
        let (fs, fnn) = case.interface_forcing([0.5, 0.0], [0.0, -1.0], Quadrant::Q1, Quadrant::Q4).unwrap();
        assert_relative_eq!(fs, (0.25 - 1.0) / 20.0, epsilon = 1e-15);
        assert_relative_eq!(fnn, (0.5 - 4.0) / 20.0, epsilon = 1e-15);
        let (fs, fnn) = case.interface_forcing([0.0, -0.5], [1.0, 0.0], Quadrant::Q3, Quadrant::Q4).unwrap();
        assert_relative_eq!(fs, (1.0 - 0.25) / 20.0, epsilon = 1e-15);
        assert_relative_eq!(fnn, (4.0 + 0.5) / 20.0, epsilon = 1e-15);
        let (fs, fnn) = case.interface_forcing([-0.5, 0.0], [0.0, 1.0], Quadrant::Q3, Quadrant::Q2).unwrap();
        assert_eq!((fs, fnn), (0.0, 0.0));
    }

    #[test]
    fn example3_flux_jump_changes_sign_between_half_axes() {
        let case = example3(InterfaceMode::Derived).unwrap();
        for x in [0.2, 0.6] {
            let (fs, fnn) = case.interface_forcing([x, 0.0], [0.0, -1.0], Quadrant::Q1, Quadrant::Q4).unwrap();
            assert!(fs.abs() < 1e-15);
            assert_relative_eq!(fnn, 0.8 * x * (x * x - 1.0).powi(2), epsilon = 1e-14);
            let xn = -x;
            let (_, fnn) = case.interface_forcing([xn, 0.0], [0.0, 1.0], Quadrant::Q3, Quadrant::Q2).unwrap();
            assert_relative_eq!(fnn, -0.8 * xn * (xn * xn - 1.0).powi(2), epsilon = 1e-14);
        }
        // Tangential velocity jumps by the resistance ratio across the y-axis.
        let x = [1e-3, 0.4];
        let (v1, v2) = (case.velocity(Quadrant::Q1, x), case.velocity(Quadrant::Q2, x));
        assert_relative_eq!(v1[1] / v2[1], 5.0, max_relative = 1e-12);

        let literal = example3(InterfaceMode::PaperLiteral).unwrap();
        let (_, fnn) = literal.interface_forcing([-0.5, 0.0], [0.0, 1.0], Quadrant::Q3, Quadrant::Q2).unwrap();
        assert_relative_eq!(fnn, 0.8 * -0.5 * 0.5625, epsilon = 1e-15);
    }

    #[test]
    fn example4_interface_data() {
        let case = example4(InterfaceMode::Derived).unwrap();
        for y in [-0.7, 0.3] {
            let (q1, q2, n) = if y > 0.0 {
                (Quadrant::Q1, Quadrant::Q2, [-1.0, 0.0])
            } else {
                (Quadrant::Q3, Quadrant::Q4, [1.0, 0.0])
            };
            let expected = (0.5 * PI * (y - 1.0)).sin().powi(2);
            assert_relative_eq!(case.pressure(q2, [0.0, y]), expected, epsilon = 1e-15);
            let (fs, fnn) = case.interface_forcing([0.0, y], n, q1, q2).unwrap();
            assert!(fs.abs() < 1e-15);
            assert_relative_eq!(fnn, -expected, epsilon = 1e-14);
            // Normal derivative vanishes on the axis.
            assert!(SineSquared.pressure_gradient(q1, [0.0, y])[0].abs() < 1e-15);
        }
        let constant = example4(InterfaceMode::ConstantProjection).unwrap();
        let (_, fnn) = constant.interface_forcing([0.0, 0.5], [-1.0, 0.0], Quadrant::Q1, Quadrant::Q2).unwrap();
        assert_eq!(fnn, -std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn mode_restrictions() {
        assert!(example2(InterfaceMode::ConstantProjection).is_err());
        assert!(example3(InterfaceMode::ConstantProjection).is_err());
        assert!(example4(InterfaceMode::PaperLiteral).is_err());
        assert!(ManufacturedCase::example(1, InterfaceMode::PaperLiteral).is_err());
        assert!(ManufacturedCase::example(5, InterfaceMode::Derived).is_err());
    }

    #[test]
    fn off_interface_points_are_rejected() {
        let case = example1();
        assert!(matches!(
            derive_interface_data(&case, [0.3, 0.2], [0.0, 1.0], Quadrant::Q3, Quadrant::Q2),
            Err(Error::NotOnInterface(_))
        ));
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        for n in 1..=4 {
            let case = ManufacturedCase::example(n, InterfaceMode::Derived).unwrap();
            let worst = finite_difference_check(&case);
            assert!(worst <= 1e-6, "example {n}: {worst:e}");
        }
        let flat = ManufacturedCase::patch([0.0, 0.0], [2.5, 0.0, 0.0], [1.0, 1.0], 1.0);
        assert!(finite_difference_check(&flat) <= 1e-9);
    }

    #[test]
    fn boundary_conditions_are_compatible() {
        for n in 1..=4 {
            let case = ManufacturedCase::example(n, InterfaceMode::Derived).unwrap();
            assert!(boundary_compatibility(&case) <= 1e-10, "example {n}");
        }
    }

    #[test]
    fn patch_solution_is_balanced() {
        let case = ManufacturedCase::patch([0.3, -0.2], [0.5, 0.25, -0.75], [2.0, 3.0], 1.5);
        assert_eq!(case.velocity(Quadrant::Q1, [0.4, 0.4]), [0.3, -0.2]);
        assert_eq!(case.velocity(Quadrant::Q2, [-0.4, 0.4]), [0.0, 0.0]);
        assert_eq!(case.source(Quadrant::Q4, [0.4, -0.4]), 0.0);
        assert!(boundary_compatibility(&case) <= 1e-15);
    }
}
