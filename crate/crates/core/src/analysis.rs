//! Error norms against the manufactured solution, convergence rates, and tables.

use std::fmt::Write as _;

use faer::prelude::*;
use faer::sparse::Triplet;
use faer::Col;
use rayon::prelude::*;

use crate::assembly::{assemble_system, from_entries, mul_add, SaddleSystem};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::manufactured::ManufacturedCase;
use crate::mesh::{build_cartesian_mesh, BipartiteMesh, Quadrant, Region};
use crate::quadrature::{integrate_on_segment, segment_point, segment_rule, triangle_rule, TriangleRule};
use crate::solver::{solve, SolutionFields};
use crate::spaces::{build_dof_layout, DofLayout, P1Element, Rt0Element};

/// Quadrature degree of the error integrals.
pub const ERROR_QUADRATURE_DEGREE: usize = 10;

pub const COLUMN_NAMES: [&str; 6] = ["p1", "p2_L2", "p2_H1", "u1_L2", "u1_Hdiv", "u2"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub level_inv: usize,
    pub e_p1_l2: f64,
    pub e_p2_l2: f64,
    pub e_p2_h1: f64,
    pub e_u1_l2: f64,
    pub e_u1_hdiv: f64,
    pub e_u2_l2: f64,
    /// `‖p₁ʰ - Π₀p‖`, the distance to the cell means of `p` (not a CSV column).
    pub e_p1_projected: f64,
    /// `100 e / ‖exact‖` per column; `None` when an exact norm vanishes.
    pub relative: Option<[f64; 6]>,
}

impl ErrorReport {
    /// Errors in [`COLUMN_NAMES`] order.
    pub fn columns(&self) -> [f64; 6] {
        [self.e_p1_l2, self.e_p2_l2, self.e_p2_h1, self.e_u1_l2, self.e_u1_hdiv, self.e_u2_l2]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub errors: ErrorReport,
    /// Rates against the previous row; `None` on the first row.
    pub rates: Option<[f64; 6]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub case_name: String,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Default)]
struct Squares {
    p1: f64,
    p1_mean: f64,
    p2: f64,
    p2_grad: f64,
    u1: f64,
    div: f64,
    u2: f64,
}

impl Squares {
    fn add(mut self, o: Squares) -> Squares {
        self.p1 += o.p1;
        self.p1_mean += o.p1_mean;
        self.p2 += o.p2;
        self.p2_grad += o.p2_grad;
        self.u1 += o.u1;
        self.div += o.div;
        self.u2 += o.u2;
        self
    }
}

fn quadrant(mesh: &BipartiteMesh, t: usize) -> Result<Quadrant> {
    mesh.triangle_quadrant(t)
        .ok_or_else(|| Error::MeshMismatch(format!("triangle {t} does not lie in a single quadrant")))
}

fn check_solution(sol: &SolutionFields, mesh: &BipartiteMesh) -> Result<()> {
    let l = &sol.layout;
    if l.u1_of_edge.len() != mesh.edges.len()
        || l.p1_of_triangle.len() != mesh.triangles.len()
        || l.p2_of_vertex.len() != mesh.vertices.len()
        || sol.u1.len() != l.n_u1
        || sol.p2.len() != l.n_p2
        || sol.p1.len() != l.n_p1
        || sol.u2.len() != l.omega2_triangles.len()
    {
        return Err(Error::MeshMismatch("solution was computed on a different mesh".into()));
    }
    Ok(())
}

/// Squared errors (with `sign = 1`) or squared exact norms (`sign = 0`).
fn squares(sol: &SolutionFields, case: &ManufacturedCase, mesh: &BipartiteMesh, rule: &TriangleRule, sign: f64) -> Result<Squares> {
    let l = &sol.layout;
    let jac_points = |t: usize| {
        let pts = mesh.triangle_points(t);
        let jac = 2.0 * mesh.triangle_area(t);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(move |(b, w)| (geometry::from_barycentric(&pts, *b), w * jac))
    };

    let one = l
        .omega1_triangles
        .par_iter()
        .map(|&t| -> Result<Squares> {
            let q = quadrant(mesh, t)?;
            let el = Rt0Element::new(mesh, t);
            let coef = el.edges.map(|e| sign * sol.u1[l.u1_of_edge[e].expect("Ω₁ edge")]);
            let ph = sign * sol.p1[l.p1_of_triangle[t].expect("Ω₁ triangle")];
            let div_h: f64 = (0..3).map(|k| coef[k] * el.div_unchecked(k)).sum();
            let mut s = Squares::default();
            let mut mean = 0.0;
            for (x, w) in jac_points(t) {
                mean += w * case.pressure(q, x);
                let mut uh = [0.0; 2];
                for (k, c) in coef.iter().enumerate() {
                    uh = geometry::add(uh, geometry::scale(*c, el.eval_unchecked(k, x)));
                }
                let du = geometry::sub(uh, case.velocity(q, x));
                s.u1 += w * geometry::dot(du, du);
                s.div += w * (div_h - case.source(q, x)).powi(2);
                s.p1 += w * (ph - case.pressure(q, x)).powi(2);
            }
            s.p1_mean = (ph * el.area - sign * mean).powi(2) / el.area;
            Ok(s)
        })
        .try_reduce(Squares::default, |a, b| Ok(a.add(b)))?;

    let two = l
        .omega2_triangles
        .par_iter()
        .enumerate()
        .map(|(k, &t)| -> Result<Squares> {
            let q = quadrant(mesh, t)?;
            let el = P1Element::new(mesh, t);
            let nodal = mesh.triangles[t]
                .vertices
                .map(|v| sign * sol.p2[l.p2_of_vertex[v].expect("Ω₂ vertex")]);
            let mut grad = [0.0; 2];
            for i in 0..3 {
                grad = geometry::add(grad, geometry::scale(nodal[i], el.gradients[i]));
            }
            let u2h = geometry::scale(sign, sol.u2[k]);
            let mut s = Squares::default();
            for (x, w) in jac_points(t) {
                let lam = el.barycentric(x);
                let ph: f64 = (0..3).map(|i| nodal[i] * lam[i]).sum();
                s.p2 += w * (ph - case.pressure(q, x)).powi(2);
                let dg = geometry::sub(grad, case.exact.pressure_gradient(q, x));
                s.p2_grad += w * geometry::dot(dg, dg);
                let du = geometry::sub(u2h, case.velocity(q, x));
                s.u2 += w * geometry::dot(du, du);
            }
            Ok(s)
        })
        .try_reduce(Squares::default, |a, b| Ok(a.add(b)))?;

    Ok(one.add(two))
}

/// The six error norms at the default quadrature degree.
pub fn error_norms(sol: &SolutionFields, case: &ManufacturedCase, mesh: &BipartiteMesh) -> Result<ErrorReport> {
    error_norms_with_degree(sol, case, mesh, ERROR_QUADRATURE_DEGREE)
}

pub fn error_norms_with_degree(sol: &SolutionFields, case: &ManufacturedCase, mesh: &BipartiteMesh, degree: usize) -> Result<ErrorReport> {
    check_solution(sol, mesh)?;
    let rule = if degree <= 10 {
        triangle_rule(degree)?
    } else {
        crate::quadrature::collapsed_triangle_rule(degree)?
    };
    let e = squares(sol, case, mesh, &rule, 1.0)?;
    let x = squares(sol, case, mesh, &rule, 0.0)?;
    let errors = [
        e.p1.sqrt(),
        e.p2.sqrt(),
        (e.p2 + e.p2_grad).sqrt(),
        e.u1.sqrt(),
        (e.u1 + e.div).sqrt(),
        e.u2.sqrt(),
    ];
    let exact = [
        x.p1.sqrt(),
        x.p2.sqrt(),
        (x.p2 + x.p2_grad).sqrt(),
        x.u1.sqrt(),
        (x.u1 + x.div).sqrt(),
        x.u2.sqrt(),
    ];
    let relative = if exact.iter().all(|n| *n > 0.0) {
        Some([0, 1, 2, 3, 4, 5].map(|i| 100.0 * errors[i] / exact[i]))
    } else {
        None
    };
    Ok(ErrorReport {
        level_inv: mesh.level_inv,
        e_p1_l2: errors[0],
        e_p2_l2: errors[1],
        e_p2_h1: errors[2],
        e_u1_l2: errors[3],
        e_u1_hdiv: errors[4],
        e_u2_l2: errors[5],
        e_p1_projected: e.p1_mean.sqrt(),
        relative,
    })
}

/// Observed order between two successive halvings of `h`.
pub fn rate(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(Error::NonPositiveError {
            coarse: e_coarse,
            fine: e_fine,
        });
    }
    Ok((e_coarse.ln() - e_fine.ln()) / std::f64::consts::LN_2)
}

fn rate_or_nan(e_coarse: f64, e_fine: f64) -> f64 {
    rate(e_coarse, e_fine).unwrap_or(f64::NAN)
}

/// Mesh, layout, assembly, solve and norms at one level.
pub fn run_level(case: &ManufacturedCase, level_inv: usize) -> Result<(BipartiteMesh, SolutionFields, ErrorReport)> {
    let annotate = |source| Error::AtLevel {
        level: level_inv,
        source: Box::new(source),
    };
    let mesh = build_cartesian_mesh(level_inv).map_err(annotate)?;
    let layout = build_dof_layout(&mesh);
    let sys = assemble_system(&mesh, &layout, case).map_err(annotate)?;
    let sol = solve(&mesh, &sys).map_err(annotate)?;
    let report = error_norms(&sol, case, &mesh).map_err(annotate)?;
    Ok((mesh, sol, report))
}

/// Levels must double from row to row.
pub fn validate_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidLevels("no levels given".into()));
    }
    for &l in levels {
        if l == 0 || !l.is_power_of_two() {
            return Err(Error::InvalidLevels(format!("{l} is not a power of two")));
        }
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidLevels(format!("{} does not follow {} by one halving of h", w[1], w[0])));
        }
    }
    Ok(())
}

/// `[1, 2, 4, ..., max_level_inv]`.
pub fn levels_up_to(max_level_inv: usize) -> Vec<usize> {
    std::iter::successors(Some(1), |l| Some(l * 2)).take_while(|l| *l <= max_level_inv).collect()
}

/// Errors and rates over a sequence of levels (solved concurrently).
pub fn convergence_study(case: &ManufacturedCase, levels: &[usize]) -> Result<ConvergenceReport> {
    validate_levels(levels)?;
    let reports = levels
        .par_iter()
        .map(|&l| run_level(case, l).map(|(_, _, r)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_reports(&case.name, reports))
}

impl ConvergenceReport {
    pub fn from_reports(case_name: &str, reports: Vec<ErrorReport>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(reports.len());
        for (i, r) in reports.iter().enumerate() {
            let rates = (i > 0).then(|| {
                let (c, f) = (reports[i - 1].columns(), r.columns());
                [0, 1, 2, 3, 4, 5].map(|k| rate_or_nan(c[k], f[k]))
            });
            rows.push(ConvergenceRow { errors: *r, rates });
        }
        ConvergenceReport {
            case_name: case_name.to_string(),
            rows,
        }
    }

    pub fn row(&self, level_inv: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.errors.level_inv == level_inv)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h_inv,e_p1,r_p1,e_p2_L2,r_p2_L2,e_p2_H1,r_p2_H1,e_u1_L2,r_u1_L2,e_u1_Hdiv,r_u1_Hdiv,e_u2,r_u2\n");
        for row in &self.rows {
            write!(out, "{}", row.errors.level_inv).unwrap();
            let e = row.errors.columns();
            for k in 0..6 {
                let r = row.rates.map(|r| format_g(r[k])).unwrap_or_default();
                write!(out, ",{},{}", format_g(e[k]), r).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width table of absolute errors, rates, and relative errors (percent).
    pub fn to_table(&self) -> String {
        let mut out = format!("{}\n{:>6}", self.case_name, "h_inv");
        for name in COLUMN_NAMES {
            write!(out, " {:>11} {:>7}", name, "rate").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{:>6}", row.errors.level_inv).unwrap();
            for (k, e) in row.errors.columns().iter().enumerate() {
                let r = row.rates.map(|r| format!("{:.4}", r[k])).unwrap_or_default();
                write!(out, " {:>11.4e} {:>7}", e, r).unwrap();
            }
            out.push('\n');
        }
        out.push_str("relative errors (%)\n");
        write!(out, "{:>6}", "h_inv").unwrap();
        for name in COLUMN_NAMES {
            write!(out, " {:>11}", name).unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{:>6}", row.errors.level_inv).unwrap();
            match row.errors.relative {
                Some(rel) => rel.iter().for_each(|v| write!(out, " {:>11.4}", v).unwrap()),
                None => (0..6).for_each(|_| write!(out, " {:>11}", "-").unwrap()),
            }
            out.push('\n');
        }
        out
    }
}

/// Six significant digits, shortest of fixed and exponent form, trailing zeros
/// removed (the C `%g` conversion).
pub fn format_g(v: f64) -> String {
    const DIGITS: i32 = 6;
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (DIGITS - 1 - exp) as usize, v))
    }
}

/// Discrete representation of the exact solution: edge-mean normal velocity,
/// nodal `p₂`, cell-mean `p₁`, and the `a`-weighted projection of `u₂` onto the
/// discrete gradients.
pub fn interpolate(case: &ManufacturedCase, mesh: &BipartiteMesh, sys: &SaddleSystem) -> Result<SolutionFields> {
    let l = &sys.layout;
    let seg = segment_rule(11)?;
    let mut x = vec![0.0; l.total()];
    for (k, &e) in l.edge_of_u1.iter().enumerate() {
        let edge = &mesh.edges[e];
        let t = match edge.triangles {
            (t, _) if mesh.triangles[t].region == Region::One => t,
            (_, Some(t)) => t,
            (t, None) => t,
        };
        let q = quadrant(mesh, t)?;
        let n = mesh.edge_normal(e);
        let ends = mesh.edge_points(e);
        x[k] = integrate_on_segment(|s| geometry::dot(case.velocity(q, s), n), &ends, &seg)? / mesh.edge_length(e);
    }
    for (j, &v) in l.vertex_of_p2.iter().enumerate() {
        let t = l
            .omega2_triangles
            .iter()
            .copied()
            .find(|&t| mesh.triangles[t].vertices.contains(&v))
            .expect("Ω₂ vertex belongs to an Ω₂ triangle");
        x[l.p2_offset() + j] = case.pressure(quadrant(mesh, t)?, mesh.vertices[v]);
    }
    let rule = triangle_rule(ERROR_QUADRATURE_DEGREE)?;
    for (k, &t) in l.omega1_triangles.iter().enumerate() {
        let q = quadrant(mesh, t)?;
        let mean = crate::quadrature::integrate_on_triangle(|y| case.pressure(q, y), &mesh.triangle_points(t), &rule)?
            / mesh.triangle_area(t);
        x[l.p1_offset() + k] = mean;
    }

    // C_φφ φ = F₂,φ - B_φ [u₁, p₂]
    let n_phi = l.n_phi;
    let mut rhs = sys.f2[..n_phi].to_vec();
    let mut bx = vec![0.0; l.n_y()];
    mul_add(&sys.b, &x[..l.n_x()], &mut bx, 1.0);
    for i in 0..n_phi {
        rhs[i] -= bx[i];
    }
    let mut entries = Vec::new();
    for j in 0..n_phi {
        for (i, v) in sys.c.row_idx_of_col(j).zip(sys.c.val_of_col(j)) {
            if i < n_phi {
                entries.push(Triplet::new(i, j, *v));
            }
        }
    }
    let c = from_entries(n_phi, n_phi, &entries);
    let lu = c
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("potential block: {e:?}")))?;
    let phi = lu.solve(&Col::<f64>::from_fn(n_phi, |i| rhs[i]));
    for i in 0..n_phi {
        x[l.phi_offset() + i] = phi[i];
    }
    SolutionFields::from_coefficients(mesh, l, &x, 0.0)
}

/// Euclidean norm of `K x_I - b` for the interpolant `x_I` of the exact solution.
pub fn galerkin_residual(case: &ManufacturedCase, mesh: &BipartiteMesh, sys: &SaddleSystem) -> Result<f64> {
    let interp = interpolate(case, mesh, sys)?;
    let r = sys.residual(&interp.coefficients())?;
    Ok(r.iter().map(|v| v * v).sum::<f64>().sqrt())
}

fn omega2_index(layout: &DofLayout) -> Vec<Option<usize>> {
    let mut index = vec![None; layout.p1_of_triangle.len()];
    for (k, &t) in layout.omega2_triangles.iter().enumerate() {
        index[t] = Some(k);
    }
    index
}

/// Per-edge weak residuals `∫_e (u₁ʰ·n̂ - u₂ʰ·n̂ - β p₂ʰ - f_n) ds` of the flux
/// exchange condition; returns their Euclidean norm.
pub fn interface_flux_residual(sol: &SolutionFields, case: &ManufacturedCase, mesh: &BipartiteMesh) -> Result<f64> {
    check_solution(sol, mesh)?;
    let l = &sol.layout;
    let seg = segment_rule(11)?;
    let tri2 = omega2_index(l);
    let mut total = 0.0;
    for ie in &mesh.interface {
        let e = ie.edge;
        let one = quadrant(mesh, ie.region_one_triangle)?;
        let two = quadrant(mesh, ie.region_two_triangle)?;
        let u1n = sol.u1[l.u1_of_edge[e].expect("interface flux")] * geometry::dot(mesh.edge_normal(e), ie.normal);
        let u2n = geometry::dot(sol.u2[tri2[ie.region_two_triangle].expect("Ω₂ triangle")], ie.normal);
        let ends = mesh.edge_points(e);
        let p = mesh.edges[e].vertices.map(|v| sol.p2[l.p2_of_vertex[v].expect("Ω₂ vertex")]);
        let mut r = 0.0;
        for (t, w) in seg.points.iter().zip(&seg.weights) {
            let s = segment_point(&ends, *t);
            let (_, fnn) = case.interface_forcing(s, ie.normal, one, two)?;
            let p2 = p[0] * (1.0 - t) + p[1] * t;
            r += w * mesh.edge_length(e) * (u1n - u2n - case.beta * p2 - fnn);
        }
        total += r * r;
    }
    Ok(total.sqrt())
}

/// Largest discrete pressure jump `|p₂ʰ - p₁ʰ|` and largest `|f_stress|` over
/// the interface quadrature points.
pub fn interface_pressure_jump(sol: &SolutionFields, case: &ManufacturedCase, mesh: &BipartiteMesh) -> Result<(f64, f64)> {
    check_solution(sol, mesh)?;
    let l = &sol.layout;
    let seg = segment_rule(11)?;
    let (mut jump, mut stress) = (0.0f64, 0.0f64);
    for ie in &mesh.interface {
        let e = ie.edge;
        let one = quadrant(mesh, ie.region_one_triangle)?;
        let two = quadrant(mesh, ie.region_two_triangle)?;
        let p1 = sol.p1[l.p1_of_triangle[ie.region_one_triangle].expect("Ω₁ triangle")];
        let p = mesh.edges[e].vertices.map(|v| sol.p2[l.p2_of_vertex[v].expect("Ω₂ vertex")]);
        let ends = mesh.edge_points(e);
        for t in &seg.points {
            let (fs, _) = case.interface_forcing(segment_point(&ends, *t), ie.normal, one, two)?;
            jump = jump.max((p[0] * (1.0 - t) + p[1] * t - p1).abs());
            stress = stress.max(fs.abs());
        }
    }
    Ok((jump, stress))
}

/// Best-approximation errors of the exact solution in the discrete spaces,
/// measured in the same norms as [`ErrorReport`]. No discrete solution can do
/// better than these.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionErrors {
    /// `‖p - Π₀p‖_{0,Ω₁}`.
    pub p1: f64,
    /// `min ‖u - v‖_{0,Ω₁}` over RT₀.
    pub u1: f64,
    /// `min ‖u - ∇ψ‖_{0,Ω₂}` over continuous P₁ potentials.
    pub u2: f64,
}

fn solve_dense_free(n: usize, entries: &[Triplet<usize, usize, f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = from_entries(n, n, entries);
    let lu = m
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("projection: {e:?}")))?;
    let x = lu.solve(&Col::<f64>::from_fn(n, |i| rhs[i]));
    Ok((0..n).map(|i| x[i]).collect())
}

pub fn projection_errors(case: &ManufacturedCase, mesh: &BipartiteMesh) -> Result<ProjectionErrors> {
    use crate::assembly::{p1_entries, rt0_mass_entries, to_phi};
    use crate::quadrature::integrate_on_triangle;

    let l = build_dof_layout(mesh);
    let rule = triangle_rule(ERROR_QUADRATURE_DEGREE)?;

    let mut p1 = 0.0;
    let mut load = vec![0.0; l.n_u1];
    for &t in &l.omega1_triangles {
        let q = quadrant(mesh, t)?;
        let el = Rt0Element::new(mesh, t);
        let mean = integrate_on_triangle(|x| case.pressure(q, x), &el.points, &rule)? / el.area;
        p1 += integrate_on_triangle(|x| (case.pressure(q, x) - mean).powi(2), &el.points, &rule)?;
        for k in 0..3 {
            load[l.u1_of_edge[el.edges[k]].expect("Ω₁ edge")] +=
                integrate_on_triangle(|x| geometry::dot(case.velocity(q, x), el.eval_unchecked(k, x)), &el.points, &rule)?;
        }
    }
    let coef = solve_dense_free(l.n_u1, &rt0_mass_entries(mesh, &l, &|_| 1.0, false)?, &load)?;
    let mut u1 = 0.0;
    for &t in &l.omega1_triangles {
        let q = quadrant(mesh, t)?;
        let el = Rt0Element::new(mesh, t);
        let c = el.edges.map(|e| coef[l.u1_of_edge[e].expect("Ω₁ edge")]);
        u1 += integrate_on_triangle(
            |x| {
                let mut v = [0.0; 2];
                for k in 0..3 {
                    v = geometry::add(v, geometry::scale(c[k], el.eval_unchecked(k, x)));
                }
                let d = geometry::sub(v, case.velocity(q, x));
                geometry::dot(d, d)
            },
            &el.points,
            &rule,
        )?;
    }

    let mut load = vec![0.0; l.n_phi];
    for &t in &l.omega2_triangles {
        let q = quadrant(mesh, t)?;
        let el = P1Element::new(mesh, t);
        let mean = [
            integrate_on_triangle(|x| case.velocity(q, x)[0], &el.points, &rule)?,
            integrate_on_triangle(|x| case.velocity(q, x)[1], &el.points, &rule)?,
        ];
        for (k, &v) in mesh.triangles[t].vertices.iter().enumerate() {
            if let Some(j) = l.phi_of_p2[l.p2_of_vertex[v].expect("Ω₂ vertex")] {
                load[j] += geometry::dot(mean, el.gradients[k]);
            }
        }
    }
    let stiff = to_phi(&l, &p1_entries(mesh, &l, &|_| 1.0, true, false)?, true, true);
    let phi = solve_dense_free(l.n_phi, &stiff, &load)?;
    let grads = crate::spaces::potential_to_velocity(&phi, mesh, &l)?;
    let mut u2 = 0.0;
    for (k, &t) in l.omega2_triangles.iter().enumerate() {
        let q = quadrant(mesh, t)?;
        u2 += integrate_on_triangle(
            |x| {
                let d = geometry::sub(grads[k], case.velocity(q, x));
                geometry::dot(d, d)
            },
            &mesh.triangle_points(t),
            &rule,
        )?;
    }
    Ok(ProjectionErrors {
        p1: p1.sqrt(),
        u1: u1.sqrt(),
        u2: u2.sqrt(),
    })
}

/// Cell values for output: `p₁` and centroid `u₁` per Ω₁ triangle.
pub fn region_one_cell_fields(sol: &SolutionFields, mesh: &BipartiteMesh) -> Vec<(f64, Point)> {
    let l = &sol.layout;
    l.omega1_triangles
        .iter()
        .map(|&t| {
            let el = Rt0Element::new(mesh, t);
            let c = geometry::centroid(&el.points);
            let mut u = [0.0; 2];
            for k in 0..3 {
                let coef = sol.u1[l.u1_of_edge[el.edges[k]].expect("Ω₁ edge")];
                u = geometry::add(u, geometry::scale(coef, el.eval_unchecked(k, c)));
            }
            (sol.p1[l.p1_of_triangle[t].expect("Ω₁ triangle")], u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::example1;
    use approx::assert_relative_eq;

    #[test]
    fn rate_examples() {
        assert_relative_eq!(rate(0.0261, 0.0091).unwrap(), 1.5201, epsilon = 1e-4);
        assert_eq!(rate(0.37, 0.37).unwrap(), 0.0);
        assert_relative_eq!(rate(0.8, 0.2).unwrap(), 2.0, epsilon = 1e-15);
        assert!(rate(0.0, 0.1).is_err());
        assert!(rate(0.1, -0.1).is_err());
    }

    #[test]
    fn g_format() {
        assert_eq!(format_g(0.0302), "0.0302");
        assert_eq!(format_g(0.123456789), "0.123457");
        assert_eq!(format_g(1.0), "1");
        assert_eq!(format_g(1.99999999), "2");
        assert_eq!(format_g(2.81362), "2.81362");
        assert_eq!(format_g(123456.7), "123457");
        assert_eq!(format_g(1234567.0), "1.23457e+06");
        assert_eq!(format_g(0.0001), "0.0001");
        assert_eq!(format_g(0.00001234), "1.234e-05");
        assert_eq!(format_g(-0.5), "-0.5");
    }

    #[test]
    fn level_validation() {
        assert!(validate_levels(&[1, 2, 4]).is_ok());
        assert!(validate_levels(&[1, 4]).is_err());
        assert!(validate_levels(&[3]).is_err());
        assert!(validate_levels(&[4, 2]).is_err());
        assert!(validate_levels(&[]).is_err());
        assert_eq!(levels_up_to(32), vec![1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn csv_layout() {
        let report = convergence_study(&example1(), &[1, 2]).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 13);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "1");
        assert!(first[2].is_empty() && first[12].is_empty());
        assert!(lines[2].split(',').all(|c| !c.is_empty()));
    }

    #[test]
    fn patch_case_has_zero_error() {
        let case = ManufacturedCase::patch([0.3, -0.2], [0.5, 0.25, -0.75], [2.0, 3.0], 1.5);
        let (_, _, r) = run_level(&case, 4).unwrap();
        for e in r.columns() {
            assert!(e <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn interpolant_is_closer_than_galerkin_solution() {
        let case = example1();
        let (mesh, sol, galerkin) = run_level(&case, 4).unwrap();
        let layout = build_dof_layout(&mesh);
        let sys = assemble_system(&mesh, &layout, &case).unwrap();
        let interp = error_norms(&interpolate(&case, &mesh, &sys).unwrap(), &case, &mesh).unwrap();
        for (i, g) in interp.columns().iter().zip(galerkin.columns()) {
            assert!(i.is_finite() && *i > 0.0);
            assert!(*i < 2.0 * g, "{interp:?} vs {galerkin:?}");
        }
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn projections_bound_the_galerkin_errors() {
        let case = example1();
        let (mesh, _, r) = run_level(&case, 8).unwrap();
        let best = projection_errors(&case, &mesh).unwrap();
        assert!(best.p1 <= r.e_p1_l2 && best.u1 <= r.e_u1_l2 && best.u2 <= r.e_u2_l2 * (1.0 + 1e-12));
        assert!(r.e_p1_projected < r.e_p1_l2);
    }

    #[test]
    fn norm_ordering() {
        let (_, _, r) = run_level(&example1(), 2).unwrap();
        assert!(r.e_u1_hdiv >= r.e_u1_l2);
        assert!(r.e_p2_h1 >= r.e_p2_l2);
    }
}
