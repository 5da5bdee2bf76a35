//! Consistent triangulations of a two-colored (bipartite) domain.
//!
//! The builder covers the four-quadrant square `(-1,1)^2` where the first and
//! third quadrants form region 1 and the second and fourth form region 2. The
//! data model itself is general: [`BipartiteMesh::from_parts`] accepts any
//! triangle soup with region tags and derives edges, classifications and
//! interface normals from it.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{self, Point};

/// The two colors of the bipartite map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn other(self) -> Region {
        match self {
            Region::One => Region::Two,
            Region::Two => Region::One,
        }
    }
}

/// Open quadrants of the reference square, numbered counterclockwise from `x > 0, y > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    /// Quadrant containing `p`, or `None` when `p` lies on a coordinate axis.
    pub fn of_point(p: Point) -> Option<Quadrant> {
        let [x, y] = p;
        match (x.partial_cmp(&0.0)?, y.partial_cmp(&0.0)?) {
            (std::cmp::Ordering::Greater, std::cmp::Ordering::Greater) => Some(Quadrant::Q1),
            (std::cmp::Ordering::Less, std::cmp::Ordering::Greater) => Some(Quadrant::Q2),
            (std::cmp::Ordering::Less, std::cmp::Ordering::Less) => Some(Quadrant::Q3),
            (std::cmp::Ordering::Greater, std::cmp::Ordering::Less) => Some(Quadrant::Q4),
            _ => None,
        }
    }

    pub fn region(self) -> Region {
        match self {
            Quadrant::Q1 | Quadrant::Q3 => Region::One,
            Quadrant::Q2 | Quadrant::Q4 => Region::Two,
        }
    }

    /// 1-based quadrant number, used as the component id by the builder.
    pub fn number(self) -> usize {
        match self {
            Quadrant::Q1 => 1,
            Quadrant::Q2 => 2,
            Quadrant::Q3 => 3,
            Quadrant::Q4 => 4,
        }
    }
}

/// Assigns a region to points off the interface.
pub trait BipartiteMap {
    /// `None` on the interface or outside the domain.
    fn region_at(&self, p: Point) -> Option<Region>;
}

/// The map `Ω₁ = Q1 ∪ Q3`, `Ω₂ = Q2 ∪ Q4` on `(-1,1)^2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FourQuadrantMap;

impl BipartiteMap for FourQuadrantMap {
    fn region_at(&self, p: Point) -> Option<Region> {
        if p[0].abs() >= 1.0 || p[1].abs() >= 1.0 {
            return None;
        }
        Quadrant::of_point(p).map(Quadrant::region)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    pub region: Region,
    pub component: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    InteriorOne,
    InteriorTwo,
    Interface,
    BoundaryOne,
    BoundaryTwo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Vertex indices, lower global index first.
    pub vertices: [usize; 2],
    /// First adjacent triangle and, for non-boundary edges, the second one.
    pub triangles: (usize, Option<usize>),
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceEdge {
    pub edge: usize,
    /// Unit outer normal of the region-1 triangle, i.e. pointing from Ω₁ into Ω₂.
    pub normal: Point,
    pub region_one_triangle: usize,
    pub region_two_triangle: usize,
}

#[derive(Clone, Debug)]
pub struct BipartiteMesh {
    /// Number of cells per unit length for builder meshes (`h = 1 / level_inv`).
    pub level_inv: usize,
    pub vertices: Vec<Point>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// Global edge ids of each triangle; local edge `k` is opposite local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
    pub interface: Vec<InterfaceEdge>,
}

/// Uniform Cartesian mesh of `(-1,1)^2` with `2·level_inv` cells per side.
///
/// Every square cell is cut along its lower-left to upper-right diagonal.
pub fn build_cartesian_mesh(level_inv: usize) -> Result<BipartiteMesh> {
    if level_inv == 0 {
        return Err(Error::InvalidLevel(level_inv));
    }
    let cells = 2 * level_inv;
    let h = 1.0 / level_inv as f64;
    let stride = cells + 1;

    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..stride {
        for i in 0..stride {
            // Integer-based coordinates keep the axes exactly at 0.0.
            let x = (i as f64 - level_inv as f64) * h;
            let y = (j as f64 - level_inv as f64) * h;
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for j in 0..cells {
        for i in 0..cells {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            let center = [
                (i as f64 + 0.5 - level_inv as f64) * h,
                (j as f64 + 0.5 - level_inv as f64) * h,
            ];
            let quadrant = Quadrant::of_point(center).expect("cell centers are off the axes");
            for verts in [[v00, v10, v11], [v00, v11, v01]] {
                triangles.push(Triangle {
                    vertices: verts,
                    region: quadrant.region(),
                    component: quadrant.number(),
                });
            }
        }
    }

    let mut mesh = BipartiteMesh::from_parts(vertices, triangles)?;
    mesh.level_inv = level_inv;
    Ok(mesh)
}

/// Uniform refinement: the builder mesh at twice the resolution.
pub fn refine(mesh: &BipartiteMesh) -> Result<BipartiteMesh> {
    build_cartesian_mesh(2 * mesh.level_inv)
}

impl BipartiteMesh {
    /// Derives edges, their classification and interface normals from tagged triangles.
    ///
    /// Triangles are reoriented counterclockwise if needed. `level_inv` is left at 0;
    /// set it when the mesh has a meaningful uniform size.
    pub fn from_parts(vertices: Vec<Point>, mut triangles: Vec<Triangle>) -> Result<Self> {
        for tri in &mut triangles {
            let [a, b, c] = tri.vertices.map(|v| vertices[v]);
            let area2 = geometry::signed_area2(a, b, c);
            if area2.abs() <= f64::EPSILON * 16.0 {
                return Err(Error::DegenerateElement { measure: 0.5 * area2.abs() });
            }
            if area2 < 0.0 {
                tri.vertices.swap(1, 2);
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let a = tri.vertices[(k + 1) % 3];
                let b = tri.vertices[(k + 2) % 3];
                let key = [a.min(b), a.max(b)];
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        triangles: (t, None),
                        kind: EdgeKind::BoundaryOne,
                    });
                    edges.len() - 1
                });
                if edges[id].triangles.0 != t {
                    edges[id].triangles.1 = Some(t);
                }
                *slot = id;
            }
            triangle_edges.push(local);
        }

        let mut interface = Vec::new();
        for (id, edge) in edges.iter_mut().enumerate() {
            let first = &triangles[edge.triangles.0];
            edge.kind = match edge.triangles.1 {
                None => match first.region {
                    Region::One => EdgeKind::BoundaryOne,
                    Region::Two => EdgeKind::BoundaryTwo,
                },
                Some(second) => {
                    let second_region = triangles[second].region;
                    if first.region != second_region {
                        let (one, two) = if first.region == Region::One {
                            (edge.triangles.0, second)
                        } else {
                            (second, edge.triangles.0)
                        };
                        let normal = outward_normal(&vertices, &triangles[one], edge.vertices);
                        interface.push(InterfaceEdge {
                            edge: id,
                            normal,
                            region_one_triangle: one,
                            region_two_triangle: two,
                        });
                        EdgeKind::Interface
                    } else if second_region == Region::One {
                        EdgeKind::InteriorOne
                    } else {
                        EdgeKind::InteriorTwo
                    }
                }
            };
        }

        Ok(BipartiteMesh {
            level_inv: 0,
            vertices,
            triangles,
            edges,
            triangle_edges,
            interface,
        })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.level_inv as f64
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * geometry::signed_area2(a, b, c)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        geometry::norm(geometry::sub(b, a))
    }

    /// Global normal of edge `e`: the tangent from the lower- to the higher-index
    /// vertex rotated clockwise by 90°.
    pub fn edge_normal(&self, e: usize) -> Point {
        let [a, b] = self.edge_points(e);
        let t = geometry::sub(b, a);
        let len = geometry::norm(t);
        [t[1] / len, -t[0] / len]
    }

    pub fn triangles_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        self.triangles
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.region == region)
            .map(|(i, _)| i)
    }

    /// Quadrant of the triangle interior (by centroid).
    pub fn triangle_quadrant(&self, t: usize) -> Option<Quadrant> {
        Quadrant::of_point(geometry::centroid(&self.triangle_points(t)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }
}

fn outward_normal(vertices: &[Point], tri: &Triangle, edge: [usize; 2]) -> Point {
    let a = vertices[edge[0]];
    let b = vertices[edge[1]];
    let opposite = tri
        .vertices
        .iter()
        .copied()
        .find(|v| *v != edge[0] && *v != edge[1])
        .expect("edge belongs to triangle");
    let t = geometry::sub(b, a);
    let len = geometry::norm(t);
    let n = [t[1] / len, -t[0] / len];
    let to_edge = geometry::sub(geometry::midpoint(a, b), vertices[opposite]);
    if geometry::dot(n, to_edge) >= 0.0 {
        n
    } else {
        [-n[0], -n[1]]
    }
}

/// Triangles whose tag disagrees with the map or which straddle the interface.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConsistencyReport {
    pub offending: Vec<usize>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.offending.is_empty()
    }
}

/// Checks the mesh against the four-quadrant map.
pub fn validate_consistency(mesh: &BipartiteMesh) -> ConsistencyReport {
    validate_consistency_with(mesh, &FourQuadrantMap)
}

/// A triangle is consistent when its centroid and a lattice of interior sample
/// points all fall in the region it is tagged with.
pub fn validate_consistency_with(mesh: &BipartiteMesh, map: &impl BipartiteMap) -> ConsistencyReport {
    const N: usize = 6;
    let mut offending = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let mut ok = map.region_at(geometry::centroid(&p)) == Some(tri.region);
        'samples: for i in 1..N {
            for j in 1..N - i {
                if !ok {
                    break 'samples;
                }
                let k = N - i - j;
                let lambda = [i as f64 / N as f64, j as f64 / N as f64, k as f64 / N as f64];
                let q = geometry::from_barycentric(&p, lambda);
                if let Some(r) = map.region_at(q) {
                    ok = r == tri.region;
                }
            }
        }
        if !ok {
            offending.push(t);
        }
    }
    ConsistencyReport { offending }
}
