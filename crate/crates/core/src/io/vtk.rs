//! Legacy VTK 3.0 ASCII unstructured grids (cell type 5, triangles).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::region_one_cell_fields;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{BipartiteMesh, Region};
use crate::solver::SolutionFields;

const TRIANGLE: u8 = 5;

fn header(w: &mut impl Write, title: &str, points: &[Point], cells: &[[usize; 3]]) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {} {}", cells.len(), 4 * cells.len())?;
    for c in cells {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "{TRIANGLE}")?;
    }
    Ok(())
}

/// Whole mesh with the region tag (1 or 2) as cell data.
pub fn write_mesh(mesh: &BipartiteMesh, w: &mut impl Write) -> Result<()> {
    let cells: Vec<[usize; 3]> = mesh.triangles.iter().map(|t| t.vertices).collect();
    header(w, &format!("bipartite mesh h_inv={}", mesh.level_inv), &mesh.vertices, &cells)?;
    writeln!(w, "CELL_DATA {}", cells.len())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for t in &mesh.triangles {
        writeln!(w, "{}", if t.region == Region::One { 1 } else { 2 })?;
    }
    Ok(())
}

/// Ω₁ triangles with cell data `p1` and the centroid value of `u1`.
pub fn write_region_one(mesh: &BipartiteMesh, sol: &SolutionFields, w: &mut impl Write) -> Result<()> {
    let l = &sol.layout;
    let mut local = vec![None; mesh.vertices.len()];
    let mut points = Vec::new();
    let mut cells = Vec::with_capacity(l.omega1_triangles.len());
    for &t in &l.omega1_triangles {
        cells.push(mesh.triangles[t].vertices.map(|v| {
            *local[v].get_or_insert_with(|| {
                points.push(mesh.vertices[v]);
                points.len() - 1
            })
        }));
    }
    header(w, &format!("region 1 h_inv={}", mesh.level_inv), &points, &cells)?;
    let fields = region_one_cell_fields(sol, mesh);
    writeln!(w, "CELL_DATA {}", cells.len())?;
    writeln!(w, "SCALARS p1 double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (p, _) in &fields {
        writeln!(w, "{p}")?;
    }
    writeln!(w, "VECTORS u1 double")?;
    for (_, u) in &fields {
        writeln!(w, "{} {} 0", u[0], u[1])?;
    }
    Ok(())
}

/// Ω₂ triangles with point data `p2` and cell data `u2`.
pub fn write_region_two(mesh: &BipartiteMesh, sol: &SolutionFields, w: &mut impl Write) -> Result<()> {
    let l = &sol.layout;
    let points: Vec<Point> = l.vertex_of_p2.iter().map(|&v| mesh.vertices[v]).collect();
    let cells: Vec<[usize; 3]> = l
        .omega2_triangles
        .iter()
        .map(|&t| mesh.triangles[t].vertices.map(|v| l.p2_of_vertex[v].expect("Ω₂ vertex")))
        .collect();
    header(w, &format!("region 2 h_inv={}", mesh.level_inv), &points, &cells)?;
    writeln!(w, "POINT_DATA {}", points.len())?;
    writeln!(w, "SCALARS p2 double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &sol.p2 {
        writeln!(w, "{p}")?;
    }
    writeln!(w, "CELL_DATA {}", cells.len())?;
    writeln!(w, "VECTORS u2 double")?;
    for u in &sol.u2 {
        writeln!(w, "{} {} 0", u[0], u[1])?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `region1_<h_inv>.vtk` and `region2_<h_inv>.vtk` into `dir`.
pub fn write_fields(dir: &Path, mesh: &BipartiteMesh, sol: &SolutionFields) -> Result<[PathBuf; 2]> {
    if sol.layout.p1_of_triangle.len() != mesh.triangles.len() {
        return Err(Error::MeshMismatch("solution was computed on a different mesh".into()));
    }
    std::fs::create_dir_all(dir)?;
    let one = dir.join(format!("region1_{}.vtk", mesh.level_inv));
    let two = dir.join(format!("region2_{}.vtk", mesh.level_inv));
    let mut w = create(&one)?;
    write_region_one(mesh, sol, &mut w)?;
    w.flush()?;
    let mut w = create(&two)?;
    write_region_two(mesh, sol, &mut w)?;
    w.flush()?;
    Ok([one, two])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::run_level;
    use crate::manufactured::example1;
    use crate::mesh::build_cartesian_mesh;

    #[test]
    fn mesh_file_layout() {
        let m = build_cartesian_mesh(1).unwrap();
        let mut out = Vec::new();
        write_mesh(&m, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 8 32"));
        assert!(text.contains("CELL_TYPES 8"));
        assert_eq!(text.lines().filter(|l| *l == "5").count(), 8);
        let tags: Vec<&str> = lines[lines.len() - 8..].to_vec();
        assert_eq!(tags.iter().filter(|t| **t == "1").count(), 4);
    }

    #[test]
    fn field_files() {
        let (m, sol, _) = run_level(&example1(), 2).unwrap();
        let dir = std::env::temp_dir().join(format!("pdmix-vtk-{}", std::process::id()));
        let [one, two] = write_fields(&dir, &m, &sol).unwrap();
        let a = std::fs::read_to_string(&one).unwrap();
        let b = std::fs::read_to_string(&two).unwrap();
        assert!(one.ends_with("region1_2.vtk") && two.ends_with("region2_2.vtk"));
        assert!(a.contains("CELL_DATA 16") && a.contains("SCALARS p1 double 1") && a.contains("VECTORS u1 double"));
        assert!(!a.contains("POINT_DATA"));
        assert!(b.contains("POINT_DATA 17") && b.contains("VECTORS u2 double"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
