//! Sparse assembly of the block system
//!
//! ```text
//! [ A  -Bᵀ ] [u₁, p₂]ᵀ   [F₁]
//! [ B   C  ] [φ,  p₁]ᵀ = [F₂]
//! ```
//!
//! Rows of the first block row are tested with `(v₁, q₂)`, rows of the second
//! with `(∇ψ, q₁)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::manufactured::ManufacturedCase;
use crate::mesh::{BipartiteMesh, Quadrant, Region};
use crate::quadrature::{segment_point, segment_rule, triangle_rule, SegmentRule, TriangleRule};
use crate::spaces::{DofLayout, P1Element, Rt0Element};

pub type SparseMatrix = SparseColMat<usize, f64>;
type Entry = Triplet<usize, usize, f64>;

pub type RegionField = Arc<dyn Fn(Region, Point) -> f64 + Send + Sync>;
pub type InterfaceField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Flow resistance `a` on Ω and interface storage rate `β` on Γ.
#[derive(Clone)]
pub struct CoefficientSet {
    pub a: RegionField,
    pub beta: InterfaceField,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientSet { .. }")
    }
}

impl CoefficientSet {
    pub fn new(a: RegionField, beta: InterfaceField) -> Self {
        CoefficientSet { a, beta }
    }

    /// `a = a1` on Ω₁, `a2` on Ω₂, constant `β`.
    pub fn piecewise(a1: f64, a2: f64, beta: f64) -> Self {
        CoefficientSet {
            a: Arc::new(move |r, _| match r {
                Region::One => a1,
                Region::Two => a2,
            }),
            beta: Arc::new(move |_| beta),
        }
    }

    pub fn a(&self, region: Region, x: Point) -> f64 {
        (self.a)(region, x)
    }

    pub fn beta(&self, x: Point) -> f64 {
        (self.beta)(x)
    }

    /// Positivity of `a` and nonnegativity of `β` at the assembly quadrature
    /// points, and `∫_Γ β > 0`.
    pub fn check_admissible(&self, mesh: &BipartiteMesh) -> Result<()> {
        let rule = triangle_rule(2)?;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let pts = mesh.triangle_points(t);
            for b in &rule.points {
                let x = geometry::from_barycentric(&pts, *b);
                let a = self.a(tri.region, x);
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::Inadmissible(format!("flow resistance {a} at {x:?}")));
                }
            }
        }
        let seg = segment_rule(3)?;
        let mut total = 0.0;
        for ie in &mesh.interface {
            let ends = mesh.edge_points(ie.edge);
            let len = mesh.edge_length(ie.edge);
            for (t, w) in seg.points.iter().zip(&seg.weights) {
                let x = segment_point(&ends, *t);
                let b = self.beta(x);
                if !(b.is_finite() && b >= 0.0) {
                    return Err(Error::Inadmissible(format!("storage rate {b} at {x:?}")));
                }
                total += w * len * b;
            }
        }
        if total <= 0.0 {
            return Err(Error::Inadmissible("storage rate integrates to zero over the interface".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub parallel: bool,
    pub check_admissibility: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            parallel: true,
            check_admissibility: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymmetryDiagnostics {
    /// `max |A_{u₁p₂} + A_{p₂u₁}ᵀ|`.
    pub coupling_skew_defect: f64,
    /// `max |C - Cᵀ|`.
    pub c_asymmetry: f64,
    /// `max |A_{u₁u₁} - A_{u₁u₁}ᵀ|`.
    pub mass_asymmetry: f64,
}

#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a: SparseMatrix,
    pub bt: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub layout: DofLayout,
    pub symmetry: SymmetryDiagnostics,
}

impl SaddleSystem {
    pub fn dimension(&self) -> usize {
        self.layout.total()
    }

    /// `[[A, -Bᵀ], [B, C]]`.
    pub fn global_matrix(&self) -> SparseMatrix {
        let nx = self.layout.n_x();
        let n = self.dimension();
        let mut entries = Vec::new();
        push_block(&mut entries, &self.a, 0, 0, 1.0);
        push_block(&mut entries, &self.bt, 0, nx, -1.0);
        push_block(&mut entries, &self.b, nx, 0, 1.0);
        push_block(&mut entries, &self.c, nx, nx, 1.0);
        from_entries(n, n, &entries)
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.f1.iter().chain(&self.f2).copied().collect()
    }

    /// `K x - rhs`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        let mut r: Vec<f64> = self.rhs().iter().map(|v| -v).collect();
        let nx = self.layout.n_x();
        let (xx, xy) = x.split_at(nx);
        let (rx, ry) = r.split_at_mut(nx);
        mul_add(&self.a, xx, rx, 1.0);
        mul_add(&self.bt, xy, rx, -1.0);
        mul_add(&self.b, xx, ry, 1.0);
        mul_add(&self.c, xy, ry, 1.0);
        Ok(r)
    }
}

/// `y += s M x`.
pub(crate) fn mul_add(m: &SparseMatrix, x: &[f64], y: &mut [f64], s: f64) {
    for (j, xj) in x.iter().enumerate().take(m.ncols()) {
        if *xj == 0.0 {
            continue;
        }
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            y[i] += s * v * xj;
        }
    }
}

fn push_block(out: &mut Vec<Entry>, m: &SparseMatrix, r0: usize, c0: usize, s: f64) {
    for j in 0..m.ncols() {
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            out.push(Triplet::new(r0 + i, c0 + j, s * v));
        }
    }
}

pub(crate) fn from_entries(nrows: usize, ncols: usize, entries: &[Entry]) -> SparseMatrix {
    SparseColMat::try_new_from_triplets(nrows, ncols, entries).expect("entries lie inside the block")
}

/// Dense copy, for small diagnostics.
pub fn to_dense(m: &SparseMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
    for j in 0..m.ncols() {
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            d[i][j] += v;
        }
    }
    d
}

fn entry_map(m: &SparseMatrix) -> HashMap<(usize, usize), f64> {
    let mut map = HashMap::new();
    for j in 0..m.ncols() {
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            *map.entry((i, j)).or_insert(0.0) += v;
        }
    }
    map
}

fn gather<F>(items: &[usize], parallel: bool, kernel: F) -> Vec<Entry>
where
    F: Fn(usize, &mut Vec<Entry>) + Sync + Send,
{
    let run = |&t: &usize| {
        let mut local = Vec::with_capacity(16);
        kernel(t, &mut local);
        local
    };
    if parallel {
        items.par_iter().map(run).collect::<Vec<_>>().concat()
    } else {
        items.iter().map(run).collect::<Vec<_>>().concat()
    }
}

fn quadrature_points<'a>(mesh: &BipartiteMesh, t: usize, rule: &'a TriangleRule) -> impl Iterator<Item = (Point, f64)> + 'a {
    let pts = mesh.triangle_points(t);
    let jac = 2.0 * mesh.triangle_area(t);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(move |(b, w)| (geometry::from_barycentric(&pts, *b), w * jac))
}

fn check_layout(mesh: &BipartiteMesh, layout: &DofLayout) -> Result<()> {
    if layout.u1_of_edge.len() != mesh.edges.len()
        || layout.p2_of_vertex.len() != mesh.vertices.len()
        || layout.p1_of_triangle.len() != mesh.triangles.len()
    {
        return Err(Error::MeshMismatch("layout was built for a different mesh".into()));
    }
    Ok(())
}

/// `σ` with `φ_e·n̂ = σ` on interface edge `e` (global normal against the Ω₁→Ω₂ normal).
fn interface_sign(mesh: &BipartiteMesh, edge: usize, normal: Point) -> f64 {
    geometry::dot(mesh.edge_normal(edge), normal).signum()
}

/// Weighted RT₀ mass on Ω₁ in u₁ numbering.
pub(crate) fn rt0_mass_entries(
    mesh: &BipartiteMesh,
    layout: &DofLayout,
    weight: &(dyn Fn(Point) -> f64 + Sync),
    parallel: bool,
) -> Result<Vec<Entry>> {
    let rule = triangle_rule(2)?;
    Ok(gather(&layout.omega1_triangles, parallel, |t, out| {
        let el = Rt0Element::new(mesh, t);
        let dofs = el.edges.map(|e| layout.u1_of_edge[e].expect("Ω₁ edge"));
        let mut local = [[0.0; 3]; 3];
        for (x, w) in quadrature_points(mesh, t, &rule) {
            let wa = w * weight(x);
            let phi = [0, 1, 2].map(|k| el.eval_unchecked(k, x));
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += wa * geometry::dot(phi[i], phi[j]);
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                out.push(Triplet::new(dofs[i], dofs[j], local[i][j]));
            }
        }
    }))
}

/// `∫ div φ_i div φ_j` on Ω₁ in u₁ numbering.
pub(crate) fn rt0_div_entries(mesh: &BipartiteMesh, layout: &DofLayout) -> Vec<Entry> {
    gather(&layout.omega1_triangles, false, |t, out| {
        let el = Rt0Element::new(mesh, t);
        let dofs = el.edges.map(|e| layout.u1_of_edge[e].expect("Ω₁ edge"));
        for i in 0..3 {
            for j in 0..3 {
                out.push(Triplet::new(dofs[i], dofs[j], el.area * el.div_unchecked(i) * el.div_unchecked(j)));
            }
        }
    })
}

/// Weighted P₁ stiffness (`stiffness = true`) or mass on Ω₂ in p₂ numbering.
pub(crate) fn p1_entries(
    mesh: &BipartiteMesh,
    layout: &DofLayout,
    weight: &(dyn Fn(Point) -> f64 + Sync),
    stiffness: bool,
    parallel: bool,
) -> Result<Vec<Entry>> {
    let rule = triangle_rule(2)?;
    Ok(gather(&layout.omega2_triangles, parallel, |t, out| {
        let el = P1Element::new(mesh, t);
        let dofs = mesh.triangles[t].vertices.map(|v| layout.p2_of_vertex[v].expect("Ω₂ vertex"));
        let mut local = [[0.0; 3]; 3];
        for (x, w) in quadrature_points(mesh, t, &rule) {
            let wa = w * weight(x);
            let lam = el.barycentric(x);
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += wa
                        * if stiffness {
                            geometry::dot(el.gradients[i], el.gradients[j])
                        } else {
                            lam[i] * lam[j]
                        };
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                out.push(Triplet::new(dofs[i], dofs[j], local[i][j]));
            }
        }
    }))
}

/// Restricts p₂-numbered entries to φ numbering (drops the pinned row and column).
pub(crate) fn to_phi(layout: &DofLayout, entries: &[Entry], rows: bool, cols: bool) -> Vec<Entry> {
    entries
        .iter()
        .filter_map(|e| {
            let r = if rows { layout.phi_of_p2[e.row]? } else { e.row };
            let c = if cols { layout.phi_of_p2[e.col]? } else { e.col };
            Some(Triplet::new(r, c, e.val))
        })
        .collect()
}

fn assemble_a_with(mesh: &BipartiteMesh, layout: &DofLayout, coeffs: &CoefficientSet, options: AssemblyOptions) -> Result<SparseMatrix> {
    check_layout(mesh, layout)?;
    if options.check_admissibility {
        coeffs.check_admissible(mesh)?;
    }
    let a1 = |x: Point| coeffs.a(Region::One, x);
    let mut entries = rt0_mass_entries(mesh, layout, &a1, options.parallel)?;

    let seg = segment_rule(3)?;
    let off = layout.p2_offset();
    for ie in &mesh.interface {
        let e = ie.edge;
        let u = layout.u1_of_edge[e].expect("interface edge carries a flux");
        let verts = mesh.edges[e].vertices;
        let q = verts.map(|v| layout.p2_of_vertex[v].expect("interface vertex in Ω₂") + off);
        let ends = mesh.edge_points(e);
        let len = mesh.edge_length(e);
        let sign = interface_sign(mesh, e, ie.normal);
        let mut mass = [[0.0; 2]; 2];
        let mut trace = [0.0; 2];
        for (t, w) in seg.points.iter().zip(&seg.weights) {
            let wl = w * len;
            let hat = [1.0 - t, *t];
            let beta = coeffs.beta(segment_point(&ends, *t));
            for i in 0..2 {
                trace[i] += wl * hat[i];
                for j in 0..2 {
                    mass[i][j] += wl * beta * hat[i] * hat[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                entries.push(Triplet::new(q[i], q[j], mass[i][j]));
            }
            entries.push(Triplet::new(u, q[i], sign * trace[i]));
            entries.push(Triplet::new(q[i], u, -sign * trace[i]));
        }
    }
    Ok(from_entries(layout.n_x(), layout.n_x(), &entries))
}

/// `∫_{Ω₁} a w₁·v₁ + ∫_Γ β r₂ q₂ + ∫_Γ r₂ (v₁·n̂) - ∫_Γ (w₁·n̂) q₂`.
pub fn assemble_a(mesh: &BipartiteMesh, layout: &DofLayout, coeffs: &CoefficientSet) -> Result<SparseMatrix> {
    assemble_a_with(mesh, layout, coeffs, AssemblyOptions::default())
}

fn assemble_b_with(mesh: &BipartiteMesh, layout: &DofLayout, parallel: bool) -> Result<SparseMatrix> {
    check_layout(mesh, layout)?;
    let p1_off = layout.n_phi;
    let mut entries = gather(&layout.omega1_triangles, parallel, |t, out| {
        let el = Rt0Element::new(mesh, t);
        let row = layout.p1_of_triangle[t].expect("Ω₁ triangle") + p1_off;
        for k in 0..3 {
            let col = layout.u1_of_edge[el.edges[k]].expect("Ω₁ edge");
            out.push(Triplet::new(row, col, el.area * el.div_unchecked(k)));
        }
    });
    let stiff = p1_entries(mesh, layout, &|_| 1.0, true, parallel)?;
    let off = layout.p2_offset();
    entries.extend(
        to_phi(layout, &stiff, true, false)
            .into_iter()
            .map(|e| Triplet::new(e.row, e.col + off, e.val)),
    );
    Ok(from_entries(layout.n_y(), layout.n_x(), &entries))
}

/// `∫_{Ω₁} div w₁ q₁ + ∫_{Ω₂} ∇r₂·∇ψ`.
pub fn assemble_b(mesh: &BipartiteMesh, layout: &DofLayout) -> Result<SparseMatrix> {
    assemble_b_with(mesh, layout, true)
}

fn assemble_c_with(mesh: &BipartiteMesh, layout: &DofLayout, coeffs: &CoefficientSet, parallel: bool) -> Result<SparseMatrix> {
    check_layout(mesh, layout)?;
    let a2 = |x: Point| coeffs.a(Region::Two, x);
    let stiff = p1_entries(mesh, layout, &a2, true, parallel)?;
    Ok(from_entries(layout.n_y(), layout.n_y(), &to_phi(layout, &stiff, true, true)))
}

/// `∫_{Ω₂} a ∇φ·∇ψ` on the unpinned potential DOFs, zero on p₁.
pub fn assemble_c(mesh: &BipartiteMesh, layout: &DofLayout, coeffs: &CoefficientSet) -> Result<SparseMatrix> {
    assemble_c_with(mesh, layout, coeffs, true)
}

fn quadrant_of(mesh: &BipartiteMesh, t: usize) -> Result<Quadrant> {
    mesh.triangle_quadrant(t)
        .ok_or_else(|| Error::MeshMismatch(format!("triangle {t} does not lie in a single quadrant")))
}

/// Load vectors `(F₁, F₂)`.
///
/// `F₁`: `∫_{Ω₂} F q₂ - ∫_{Ω₁} g·v₁ + ∫_Γ f_stress (v₁·n̂) - ∫_Γ f_n q₂`;
/// `F₂`: `∫_{Ω₁} F q₁ - ∫_{Ω₂} g·∇ψ`.
pub fn assemble_rhs(mesh: &BipartiteMesh, layout: &DofLayout, case: &ManufacturedCase) -> Result<(Vec<f64>, Vec<f64>)> {
    check_layout(mesh, layout)?;
    let rule = triangle_rule(10)?;
    let seg = segment_rule(11)?;
    let mut f1 = vec![0.0; layout.n_x()];
    let mut f2 = vec![0.0; layout.n_y()];
    let off = layout.p2_offset();

    for &t in &layout.omega1_triangles {
        let q = quadrant_of(mesh, t)?;
        let el = Rt0Element::new(mesh, t);
        let mut load = 0.0;
        let mut body = [0.0; 3];
        for (x, w) in quadrature_points(mesh, t, &rule) {
            load += w * case.source(q, x);
            let g = case.body_force(q, x);
            if g != [0.0, 0.0] {
                for (k, b) in body.iter_mut().enumerate() {
                    *b -= w * geometry::dot(g, el.eval_unchecked(k, x));
                }
            }
        }
        f2[layout.n_phi + layout.p1_of_triangle[t].expect("Ω₁ triangle")] += load;
        for k in 0..3 {
            f1[layout.u1_of_edge[el.edges[k]].expect("Ω₁ edge")] += body[k];
        }
    }

    for &t in &layout.omega2_triangles {
        let q = quadrant_of(mesh, t)?;
        let el = P1Element::new(mesh, t);
        let dofs = mesh.triangles[t].vertices.map(|v| layout.p2_of_vertex[v].expect("Ω₂ vertex"));
        let mut load = [0.0; 3];
        let mut body = [0.0; 3];
        for (x, w) in quadrature_points(mesh, t, &rule) {
            let lam = el.barycentric(x);
            let f = case.source(q, x);
            let g = case.body_force(q, x);
            for k in 0..3 {
                load[k] += w * f * lam[k];
                body[k] -= w * geometry::dot(g, el.gradients[k]);
            }
        }
        for k in 0..3 {
            f1[off + dofs[k]] += load[k];
            if let Some(j) = layout.phi_of_p2[dofs[k]] {
                f2[j] += body[k];
            }
        }
    }

    interface_rhs(mesh, layout, case, &seg, &mut f1)?;
    Ok((f1, f2))
}

fn interface_rhs(mesh: &BipartiteMesh, layout: &DofLayout, case: &ManufacturedCase, seg: &SegmentRule, f1: &mut [f64]) -> Result<()> {
    let off = layout.p2_offset();
    for ie in &mesh.interface {
        let e = ie.edge;
        let one = quadrant_of(mesh, ie.region_one_triangle)?;
        let two = quadrant_of(mesh, ie.region_two_triangle)?;
        let ends = mesh.edge_points(e);
        let len = mesh.edge_length(e);
        let sign = interface_sign(mesh, e, ie.normal);
        let verts = mesh.edges[e].vertices;
        let mut stress = 0.0;
        let mut flux = [0.0; 2];
        for (t, w) in seg.points.iter().zip(&seg.weights) {
            let (fs, fnn) = case.interface_forcing(segment_point(&ends, *t), ie.normal, one, two)?;
            stress += w * len * fs;
            flux[0] -= w * len * fnn * (1.0 - t);
            flux[1] -= w * len * fnn * t;
        }
        f1[layout.u1_of_edge[e].expect("interface edge carries a flux")] += sign * stress;
        for k in 0..2 {
            f1[off + layout.p2_of_vertex[verts[k]].expect("interface vertex in Ω₂")] += flux[k];
        }
    }
    Ok(())
}

fn symmetry(layout: &DofLayout, a: &SparseMatrix, c: &SparseMatrix) -> SymmetryDiagnostics {
    let n_u1 = layout.n_u1;
    let am = entry_map(a);
    let get = |m: &HashMap<(usize, usize), f64>, i, j| m.get(&(i, j)).copied().unwrap_or(0.0);
    let mut diag = SymmetryDiagnostics::default();
    for (&(i, j), &v) in &am {
        let vt = get(&am, j, i);
        if i < n_u1 && j < n_u1 {
            diag.mass_asymmetry = diag.mass_asymmetry.max((v - vt).abs());
        } else if (i < n_u1) != (j < n_u1) {
            diag.coupling_skew_defect = diag.coupling_skew_defect.max((v + vt).abs());
        }
    }
    let cm = entry_map(c);
    for (&(i, j), &v) in &cm {
        diag.c_asymmetry = diag.c_asymmetry.max((v - get(&cm, j, i)).abs());
    }
    diag
}

pub fn assemble_system(mesh: &BipartiteMesh, layout: &DofLayout, case: &ManufacturedCase) -> Result<SaddleSystem> {
    assemble_system_with(mesh, layout, case, &case.coefficients(), AssemblyOptions::default())
}

/// Assembly with explicit coefficients (which need not match the case) and options.
pub fn assemble_system_with(
    mesh: &BipartiteMesh,
    layout: &DofLayout,
    case: &ManufacturedCase,
    coeffs: &CoefficientSet,
    options: AssemblyOptions,
) -> Result<SaddleSystem> {
    let a = assemble_a_with(mesh, layout, coeffs, options)?;
    let b = assemble_b_with(mesh, layout, options.parallel)?;
    let c = assemble_c_with(mesh, layout, coeffs, options.parallel)?;
    let bt = b.as_ref().transpose().to_col_major().expect("transpose fits in memory");
    let (f1, f2) = assemble_rhs(mesh, layout, case)?;
    let symmetry = symmetry(layout, &a, &c);
    Ok(SaddleSystem {
        a,
        bt,
        b,
        c,
        f1,
        f2,
        layout: layout.clone(),
        symmetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::{example1, example3};
    use crate::mesh::build_cartesian_mesh;
    use crate::spaces::build_dof_layout;
    use approx::assert_relative_eq;

    fn setup(n: usize) -> (BipartiteMesh, DofLayout) {
        let m = build_cartesian_mesh(n).unwrap();
        let l = build_dof_layout(&m);
        (m, l)
    }

    fn dense_of(m: &SparseMatrix) -> Vec<Vec<f64>> {
        to_dense(m)
    }

    #[test]
    fn interface_trace_mass_and_coupling() {
        let (m, l) = setup(2);
        let a = dense_of(&assemble_a(&m, &l, &CoefficientSet::piecewise(1.0, 1.0, 1.0)).unwrap());
        let off = l.p2_offset();
        let ie = &m.interface[0];
        let e = ie.edge;
        let h = m.edge_length(e);
        let verts = m.edges[e].vertices.map(|v| l.p2_of_vertex[v].unwrap() + off);
        let u = l.u1_of_edge[e].unwrap();
        // Off-diagonal trace mass of the two endpoints gets only this edge.
        assert_relative_eq!(a[verts[0]][verts[1]], h / 6.0, epsilon = 1e-15);
        let sign = geometry::dot(m.edge_normal(e), ie.normal);
        for &q in &verts {
            assert_relative_eq!(a[u][q], sign * h / 2.0, epsilon = 1e-15);
            assert_relative_eq!(a[q][u], -sign * h / 2.0, epsilon = 1e-15);
        }
        // Interior p₂ vertex: no diagonal entry.
        let far = l.p2_of_vertex[m.vertices.iter().position(|&p| p == [-0.5, 0.5]).unwrap()].unwrap();
        assert_eq!(a[off + far][off + far], 0.0);
    }

    #[test]
    fn reference_triangle_rt0_mass() {
        // Right triangle (0,0),(1,0),(0,1): closed-form mass of (x - p_k)/... scaled bases.
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let tris = vec![
            crate::mesh::Triangle {
                vertices: [0, 1, 2],
                region: Region::One,
                component: 1,
            },
            crate::mesh::Triangle {
                vertices: [1, 3, 2],
                region: Region::Two,
                component: 2,
            },
        ];
        let m = BipartiteMesh::from_parts(verts, tris).unwrap();
        let l = build_dof_layout(&m);
        let a = dense_of(&assemble_a(&m, &l, &CoefficientSet::piecewise(1.0, 1.0, 1.0)).unwrap());
        // Oracle: symbolic integration of c_i c_j (x - p_i)·(x - p_j) over the triangle,
        // c_i = |e_i|/(2|K|), via ∫x² = ∫y² = 1/12, ∫xy = 1/24, ∫x = ∫y = 1/6, |K| = 1/2.
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let len = [2f64.sqrt(), 1.0, 1.0];
        let moment = |pi: Point, pj: Point| {
            let (xx, yy, x, y, one) = (1.0 / 12.0, 1.0 / 12.0, 1.0 / 6.0, 1.0 / 6.0, 0.5);
            xx + yy - (pi[0] + pj[0]) * x - (pi[1] + pj[1]) * y + (pi[0] * pj[0] + pi[1] * pj[1]) * one
        };
        let el = Rt0Element::new(&m, 0);
        for i in 0..3 {
            for j in 0..3 {
                let ci = el.signs[i] * len[i];
                let cj = el.signs[j] * len[j];
                let expected = ci * cj * moment(p[i], p[j]);
                let (ui, uj) = (l.u1_of_edge[el.edges[i]].unwrap(), l.u1_of_edge[el.edges[j]].unwrap());
                assert_relative_eq!(a[ui][uj], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn b_block_structure() {
        let (m, l) = setup(1);
        let b = dense_of(&assemble_b(&m, &l).unwrap());
        assert_eq!((b.len(), b[0].len()), (10, 17));
        for row in &b[l.n_phi..] {
            assert_eq!(row[..l.n_u1].iter().filter(|v| **v != 0.0).count(), 3);
        }
        // Interior Ω₁ edges: divergence contributions cancel.
        for (e, edge) in m.edges.iter().enumerate() {
            if edge.kind == crate::mesh::EdgeKind::InteriorOne {
                let col = l.u1_of_edge[e].unwrap();
                let sum: f64 = b[l.n_phi..].iter().map(|r| r[col]).sum();
                assert!(sum.abs() < 1e-14);
            }
        }
        // Constants on p₂ are in the kernel of the potential rows.
        for row in &b[..l.n_phi] {
            let s: f64 = row[l.n_u1..].iter().sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn c_block_scales_with_resistance() {
        let (m, l) = setup(2);
        let c1 = dense_of(&assemble_c(&m, &l, &CoefficientSet::piecewise(1.0, 1.0, 1.0)).unwrap());
        let c5 = dense_of(&assemble_c(&m, &l, &example3(crate::InterfaceMode::Derived).unwrap().coefficients()).unwrap());
        for i in 0..l.n_y() {
            for j in 0..l.n_y() {
                assert_relative_eq!(c5[i][j], 5.0 * c1[i][j], epsilon = 1e-14);
            }
        }
        // φ = x: quadratic form gives a |Ω₂| = 10.
        let mut x = vec![0.0; l.n_y()];
        let pin_x = m.vertices[l.vertex_of_p2[l.pinned_p2]][0];
        for (j, k) in l.phi_of_p2.iter().enumerate() {
            if let Some(k) = k {
                x[*k] = m.vertices[l.vertex_of_p2[j]][0] - pin_x;
            }
        }
        let q: f64 = (0..l.n_y()).map(|i| (0..l.n_y()).map(|j| x[i] * c5[i][j] * x[j]).sum::<f64>()).sum();
        assert_relative_eq!(q, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn system_dimension_and_symmetry() {
        let (m, l) = setup(1);
        let sys = assemble_system(&m, &l, &example1()).unwrap();
        let k = sys.global_matrix();
        assert_eq!((k.nrows(), k.ncols()), (27, 27));
        assert!(sys.symmetry.coupling_skew_defect <= 1e-14);
        assert!(sys.symmetry.c_asymmetry <= 1e-14);
        assert!(sys.symmetry.mass_asymmetry <= 1e-14);
    }

    #[test]
    fn example1_interface_load_vanishes() {
        let (m, l) = setup(4);
        let (f1, _) = assemble_rhs(&m, &l, &example1()).unwrap();
        for ie in &m.interface {
            assert!(f1[l.u1_of_edge[ie.edge].unwrap()].abs() < 1e-15);
        }
    }

    #[test]
    fn unit_source_on_region_one() {
        let (m, l) = setup(2);
        let unit = crate::manufactured::ManufacturedCase::new("unit", Arc::new(UnitSource), [1.0, 1.0], 1.0);
        let (_, f2) = assemble_rhs(&m, &l, &unit).unwrap();
        let h = m.h();
        for v in &f2[l.n_phi..] {
            assert_relative_eq!(*v, h * h / 2.0, epsilon = 1e-14);
        }
    }

    /// `p = -(x² + y²)/4`, so `F = 1` with `a = 1`.
    #[derive(Debug)]
    struct UnitSource;

    impl crate::manufactured::ExactSolution for UnitSource {
        fn pressure(&self, _q: Quadrant, x: Point) -> f64 {
            -(x[0] * x[0] + x[1] * x[1]) / 4.0
        }
        fn pressure_gradient(&self, _q: Quadrant, x: Point) -> Point {
            [-x[0] / 2.0, -x[1] / 2.0]
        }
        fn pressure_laplacian(&self, _q: Quadrant, _x: Point) -> f64 {
            -1.0
        }
    }

    #[test]
    fn admissibility() {
        let (m, l) = setup(1);
        assert!(assemble_a(&m, &l, &CoefficientSet::piecewise(1.0, 1.0, 0.0)).is_err());
        assert!(assemble_a(&m, &l, &CoefficientSet::piecewise(0.0, 1.0, 1.0)).is_err());
        assert!(assemble_a(&m, &l, &CoefficientSet::piecewise(1.0, 1.0, -1.0)).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let (m, l) = setup(8);
        let case = example3(crate::InterfaceMode::Derived).unwrap();
        let seq = AssemblyOptions {
            parallel: false,
            check_admissibility: true,
        };
        let s1 = assemble_system_with(&m, &l, &case, &case.coefficients(), seq).unwrap();
        let s2 = assemble_system(&m, &l, &case).unwrap();
        let (k1, k2) = (s1.global_matrix(), s2.global_matrix());
        for j in 0..k1.ncols() {
            assert!(k1.row_idx_of_col(j).eq(k2.row_idx_of_col(j)));
            for (a, b) in k1.val_of_col(j).iter().zip(k2.val_of_col(j)) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
