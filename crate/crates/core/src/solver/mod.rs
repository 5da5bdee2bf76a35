//! Direct sparse solve of the assembled block system.

mod wellposedness;

pub use wellposedness::{check_wellposedness, WellposednessDiagnostics, DENSE_DIMENSION_LIMIT};

use faer::prelude::*;
use faer::Col;

use crate::assembly::{mul_add, SaddleSystem};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::BipartiteMesh;
use crate::spaces::{potential_to_velocity, DofLayout};

/// Relative max-norm residual accepted from [`solve`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SolutionFields {
    /// Normal velocity per u₁ DOF (flux divided by edge length).
    pub u1: Vec<f64>,
    /// Nodal pressure per p₂ DOF.
    pub p2: Vec<f64>,
    /// Potential per p₂ DOF, zero at the pinned vertex.
    pub phi: Vec<f64>,
    /// `∇φ` per Ω₂ triangle, in `layout.omega2_triangles` order.
    pub u2: Vec<Point>,
    /// Pressure per p₁ DOF.
    pub p1: Vec<f64>,
    /// `‖K x - b‖∞ / (‖K‖∞ ‖x‖∞ + ‖b‖∞)`.
    pub residual: f64,
    pub layout: DofLayout,
}

impl SolutionFields {
    /// Coefficients in global `[u₁ | p₂ | φ | p₁]` order.
    pub fn coefficients(&self) -> Vec<f64> {
        let phi = self.layout.phi_of_p2.iter().zip(&self.phi).filter(|(k, _)| k.is_some()).map(|(_, v)| *v);
        self.u1.iter().chain(&self.p2).copied().chain(phi).chain(self.p1.iter().copied()).collect()
    }

    /// Unpacks a global coefficient vector.
    pub fn from_coefficients(mesh: &BipartiteMesh, layout: &DofLayout, x: &[f64], residual: f64) -> Result<Self> {
        if x.len() != layout.total() {
            return Err(Error::LengthMismatch {
                expected: layout.total(),
                found: x.len(),
            });
        }
        let u1 = x[..layout.n_u1].to_vec();
        let p2 = x[layout.p2_offset()..layout.phi_offset()].to_vec();
        let phi_raw = &x[layout.phi_offset()..layout.p1_offset()];
        let p1 = x[layout.p1_offset()..].to_vec();
        let u2 = potential_to_velocity(phi_raw, mesh, layout)?;
        Ok(SolutionFields {
            u1,
            p2,
            phi: layout.expand_potential(phi_raw)?,
            u2,
            p1,
            residual,
            layout: layout.clone(),
        })
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn relative_residual(sys: &SaddleSystem, x: &[f64], rhs: &[f64], row_norm: f64) -> Result<f64> {
    let r = sys.residual(x)?;
    let scale = row_norm * max_abs(x) + max_abs(rhs);
    Ok(if scale == 0.0 { 0.0 } else { max_abs(&r) / scale })
}

/// Largest absolute row sum of the global matrix.
fn infinity_norm(sys: &SaddleSystem) -> f64 {
    let n = sys.dimension();
    let nx = sys.layout.n_x();
    let mut rows = vec![0.0; n];
    let mut add = |m: &crate::assembly::SparseMatrix, r0: usize| {
        for j in 0..m.ncols() {
            for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
                rows[r0 + i] += v.abs();
            }
        }
    };
    add(&sys.a, 0);
    add(&sys.bt, 0);
    add(&sys.b, nx);
    add(&sys.c, nx);
    max_abs(&rows)
}

/// Sparse LU with one step of iterative refinement.
pub fn solve_coefficients(sys: &SaddleSystem) -> Result<(Vec<f64>, f64)> {
    let k = sys.global_matrix();
    let rhs = sys.rhs();
    let lu = k
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let b = Col::<f64>::from_fn(rhs.len(), |i| rhs[i]);
    let x = lu.solve(&b);
    let mut x: Vec<f64> = (0..x.nrows()).map(|i| x[i]).collect();

    let mut r = vec![0.0; x.len()];
    let nx = sys.layout.n_x();
    {
        let (xx, xy) = x.split_at(nx);
        let (rx, ry) = r.split_at_mut(nx);
        mul_add(&sys.a, xx, rx, 1.0);
        mul_add(&sys.bt, xy, rx, -1.0);
        mul_add(&sys.b, xx, ry, 1.0);
        mul_add(&sys.c, xy, ry, 1.0);
    }
    let r = Col::<f64>::from_fn(rhs.len(), |i| rhs[i] - r[i]);
    let dx = lu.solve(&r);
    for (i, xi) in x.iter_mut().enumerate() {
        *xi += dx[i];
    }

    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("factorization produced non-finite values".into()));
    }
    let residual = relative_residual(sys, &x, &rhs, infinity_norm(sys))?;
    if residual > RESIDUAL_TOLERANCE {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok((x, residual))
}

pub fn solve(mesh: &BipartiteMesh, sys: &SaddleSystem) -> Result<SolutionFields> {
    let (x, residual) = solve_coefficients(sys)?;
    SolutionFields::from_coefficients(mesh, &sys.layout, &x, residual)
}
