//! Discrete fields: RT₀ velocity on Ω₁, continuous P₁ pressure on Ω₂, the
//! gradient space on Ω₂ through a pinned P₁ potential, and P₀ pressure on Ω₁.
//!
//! Global unknown vector layout: `[u₁ | p₂ | φ | p₁]`. The first two blocks form
//! the "velocity-like" space X, the last two the "pressure-like" space Y.

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::mesh::{BipartiteMesh, EdgeKind, Region};

#[derive(Clone, Debug, PartialEq)]
pub struct DofLayout {
    pub n_u1: usize,
    pub n_p2: usize,
    pub n_phi: usize,
    pub n_p1: usize,
    /// u₁ index of each mesh edge (edges of Ω₁ triangles only).
    pub u1_of_edge: Vec<Option<usize>>,
    pub edge_of_u1: Vec<usize>,
    /// p₂ index of each mesh vertex (vertices of Ω₂ triangles only).
    pub p2_of_vertex: Vec<Option<usize>>,
    pub vertex_of_p2: Vec<usize>,
    /// φ index of each p₂ index; `None` for the pinned one.
    pub phi_of_p2: Vec<Option<usize>>,
    /// p₂ index whose potential value is fixed to zero.
    pub pinned_p2: usize,
    /// p₁ index of each mesh triangle (Ω₁ triangles only).
    pub p1_of_triangle: Vec<Option<usize>>,
    pub omega1_triangles: Vec<usize>,
    pub omega2_triangles: Vec<usize>,
}

impl DofLayout {
    pub fn n_x(&self) -> usize {
        self.n_u1 + self.n_p2
    }

    pub fn n_y(&self) -> usize {
        self.n_phi + self.n_p1
    }

    pub fn total(&self) -> usize {
        self.n_x() + self.n_y()
    }

    pub fn p2_offset(&self) -> usize {
        self.n_u1
    }

    pub fn phi_offset(&self) -> usize {
        self.n_x()
    }

    pub fn p1_offset(&self) -> usize {
        self.n_x() + self.n_phi
    }

    /// Expands a φ vector to full nodal values on the Ω₂ vertices (pinned entry 0).
    pub fn expand_potential(&self, phi: &[f64]) -> Result<Vec<f64>> {
        if phi.len() != self.n_phi {
            return Err(Error::LengthMismatch {
                expected: self.n_phi,
                found: phi.len(),
            });
        }
        Ok(self
            .phi_of_p2
            .iter()
            .map(|k| k.map_or(0.0, |k| phi[k]))
            .collect())
    }
}

/// Numbering with the potential pinned at the lowest-index Ω₂ vertex.
pub fn build_dof_layout(mesh: &BipartiteMesh) -> DofLayout {
    build_dof_layout_pinned(mesh, 0).expect("Ω₂ has at least one vertex")
}

/// Numbering with the potential pinned at p₂ index `pinned_p2`.
pub fn build_dof_layout_pinned(mesh: &BipartiteMesh, pinned_p2: usize) -> Result<DofLayout> {
    let mut u1_of_edge = vec![None; mesh.edges.len()];
    let mut edge_of_u1 = Vec::new();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if matches!(edge.kind, EdgeKind::InteriorOne | EdgeKind::BoundaryOne | EdgeKind::Interface) {
            u1_of_edge[e] = Some(edge_of_u1.len());
            edge_of_u1.push(e);
        }
    }

    let mut in_omega2 = vec![false; mesh.vertices.len()];
    let mut omega1_triangles = Vec::new();
    let mut omega2_triangles = Vec::new();
    let mut p1_of_triangle = vec![None; mesh.triangles.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        match tri.region {
            Region::One => {
                p1_of_triangle[t] = Some(omega1_triangles.len());
                omega1_triangles.push(t);
            }
            Region::Two => {
                omega2_triangles.push(t);
                for &v in &tri.vertices {
                    in_omega2[v] = true;
                }
            }
        }
    }

    let mut p2_of_vertex = vec![None; mesh.vertices.len()];
    let mut vertex_of_p2 = Vec::new();
    for (v, inside) in in_omega2.iter().enumerate() {
        if *inside {
            p2_of_vertex[v] = Some(vertex_of_p2.len());
            vertex_of_p2.push(v);
        }
    }
    let n_p2 = vertex_of_p2.len();
    if pinned_p2 >= n_p2 {
        return Err(Error::InvalidLocalIndex {
            kind: "pinned p2 vertex",
            index: pinned_p2,
        });
    }
    let mut phi_of_p2 = vec![None; n_p2];
    let mut next = 0;
    for (j, slot) in phi_of_p2.iter_mut().enumerate() {
        if j != pinned_p2 {
            *slot = Some(next);
            next += 1;
        }
    }

    Ok(DofLayout {
        n_u1: edge_of_u1.len(),
        n_p2,
        n_phi: n_p2 - 1,
        n_p1: omega1_triangles.len(),
        u1_of_edge,
        edge_of_u1,
        p2_of_vertex,
        vertex_of_p2,
        phi_of_p2,
        pinned_p2,
        p1_of_triangle,
        omega1_triangles,
        omega2_triangles,
    })
}

/// Lowest-order Raviart-Thomas element on one triangle.
///
/// The basis attached to local edge `k` (opposite vertex `p_k`) is
/// `σ_k |e_k| / (2|K|) (x - p_k)`, with `σ_k = ±1` aligning the element's outward
/// normal with the global edge normal. Its normal component along the global
/// normal is 1 on `e_k` and 0 on the other edges, so the coefficient of a
/// field is its normal velocity; the flux through `e_k` is coefficient × `|e_k|`.
#[derive(Clone, Debug)]
pub struct Rt0Element {
    pub points: [Point; 3],
    pub area: f64,
    pub edge_lengths: [f64; 3],
    pub signs: [f64; 3],
    pub edges: [usize; 3],
}

impl Rt0Element {
    pub fn new(mesh: &BipartiteMesh, t: usize) -> Self {
        let points = mesh.triangle_points(t);
        let edges = mesh.triangle_edges[t];
        let area = mesh.triangle_area(t);
        let mut edge_lengths = [0.0; 3];
        let mut signs = [0.0; 3];
        for k in 0..3 {
            let e = edges[k];
            edge_lengths[k] = mesh.edge_length(e);
            let [a, b] = mesh.edge_points(e);
            let outward = geometry::sub(geometry::midpoint(a, b), points[k]);
            signs[k] = if geometry::dot(mesh.edge_normal(e), outward) > 0.0 { 1.0 } else { -1.0 };
        }
        Rt0Element {
            points,
            area,
            edge_lengths,
            signs,
            edges,
        }
    }

    fn check(local: usize) -> Result<()> {
        if local < 3 {
            Ok(())
        } else {
            Err(Error::InvalidLocalIndex {
                kind: "RT0 local edge",
                index: local,
            })
        }
    }

    pub fn eval(&self, local: usize, x: Point) -> Result<Point> {
        Self::check(local)?;
        Ok(self.eval_unchecked(local, x))
    }

    #[inline]
    pub fn eval_unchecked(&self, local: usize, x: Point) -> Point {
        let c = self.signs[local] * self.edge_lengths[local] / (2.0 * self.area);
        geometry::scale(c, geometry::sub(x, self.points[local]))
    }

    pub fn div(&self, local: usize) -> Result<f64> {
        Self::check(local)?;
        Ok(self.div_unchecked(local))
    }

    #[inline]
    pub fn div_unchecked(&self, local: usize) -> f64 {
        self.signs[local] * self.edge_lengths[local] / self.area
    }
}

pub fn rt0_eval(mesh: &BipartiteMesh, t: usize, local_edge: usize, x: Point) -> Result<Point> {
    Rt0Element::new(mesh, t).eval(local_edge, x)
}

pub fn rt0_div(mesh: &BipartiteMesh, t: usize, local_edge: usize) -> Result<f64> {
    Rt0Element::new(mesh, t).div(local_edge)
}

/// Linear Lagrange element on one triangle.
#[derive(Clone, Debug)]
pub struct P1Element {
    pub points: [Point; 3],
    pub area: f64,
    pub gradients: [Point; 3],
}

impl P1Element {
    pub fn new(mesh: &BipartiteMesh, t: usize) -> Self {
        Self::from_points(mesh.triangle_points(t))
    }

    pub fn from_points(points: [Point; 3]) -> Self {
        let area2 = geometry::signed_area2(points[0], points[1], points[2]);
        let mut gradients = [[0.0; 2]; 3];
        for (i, g) in gradients.iter_mut().enumerate() {
            let p = points[(i + 1) % 3];
            let q = points[(i + 2) % 3];
            *g = [(p[1] - q[1]) / area2, (q[0] - p[0]) / area2];
        }
        P1Element {
            points,
            area: 0.5 * area2,
            gradients,
        }
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p = self.points;
        let area2 = 2.0 * self.area;
        [
            geometry::signed_area2(x, p[1], p[2]) / area2,
            geometry::signed_area2(p[0], x, p[2]) / area2,
            geometry::signed_area2(p[0], p[1], x) / area2,
        ]
    }

    pub fn eval(&self, local: usize, x: Point) -> Result<f64> {
        if local >= 3 {
            return Err(Error::InvalidLocalIndex {
                kind: "P1 local vertex",
                index: local,
            });
        }
        Ok(self.barycentric(x)[local])
    }

    pub fn grad(&self, local: usize) -> Result<Point> {
        self.gradients.get(local).copied().ok_or(Error::InvalidLocalIndex {
            kind: "P1 local vertex",
            index: local,
        })
    }
}

pub fn p1_eval(mesh: &BipartiteMesh, t: usize, local_vertex: usize, x: Point) -> Result<f64> {
    P1Element::new(mesh, t).eval(local_vertex, x)
}

pub fn p1_grad(mesh: &BipartiteMesh, t: usize, local_vertex: usize) -> Result<Point> {
    P1Element::new(mesh, t).grad(local_vertex)
}

/// Gradient of a P₁ nodal field (indexed by p₂ numbering) on every Ω₂ triangle,
/// in the order of `layout.omega2_triangles`.
pub fn nodal_gradient(nodal: &[f64], mesh: &BipartiteMesh, layout: &DofLayout) -> Result<Vec<Point>> {
    if nodal.len() != layout.n_p2 {
        return Err(Error::LengthMismatch {
            expected: layout.n_p2,
            found: nodal.len(),
        });
    }
    Ok(layout
        .omega2_triangles
        .iter()
        .map(|&t| {
            let el = P1Element::new(mesh, t);
            let mut g = [0.0; 2];
            for (k, &v) in mesh.triangles[t].vertices.iter().enumerate() {
                let j = layout.p2_of_vertex[v].expect("Ω₂ vertex");
                g = geometry::add(g, geometry::scale(nodal[j], el.gradients[k]));
            }
            g
        })
        .collect())
}

/// `u₂ = ∇φ` on each Ω₂ triangle from potential coefficients (pinned value implicit 0).
pub fn potential_to_velocity(phi: &[f64], mesh: &BipartiteMesh, layout: &DofLayout) -> Result<Vec<Point>> {
    let nodal = layout.expand_potential(phi)?;
    nodal_gradient(&nodal, mesh, layout)
}
