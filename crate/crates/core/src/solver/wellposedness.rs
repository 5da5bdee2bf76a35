//! Dense Babuška–Brezzi diagnostics for small systems.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::{p1_entries, rt0_div_entries, rt0_mass_entries, to_dense, to_phi, SaddleSystem};
use crate::error::{Error, Result};
use crate::mesh::BipartiteMesh;
use crate::spaces::DofLayout;

pub const DENSE_DIMENSION_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellposednessDiagnostics {
    /// Smallest singular value of B in the X = H(div) × H¹ and Y = H¹ × L² norms.
    pub inf_sup: f64,
    /// Smallest eigenvalue of sym(A) on ker B, relative to the X norm.
    pub kernel_coercivity: f64,
    /// Smallest eigenvalue of the potential block of C.
    pub c_min_eigenvalue: f64,
    /// Smallest singular value of B in the Euclidean norm.
    pub b_sigma_min: f64,
}

impl WellposednessDiagnostics {
    pub fn all_positive(&self) -> bool {
        self.inf_sup > 0.0 && self.kernel_coercivity > 0.0 && self.c_min_eigenvalue > 0.0
    }
}

fn dense(rows: usize, cols: usize, entries: &[faer::sparse::Triplet<usize, usize, f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for e in entries {
        m[(e.row, e.col)] += e.val;
    }
    m
}

fn from_sparse(m: &crate::assembly::SparseMatrix) -> DMatrix<f64> {
    let d = to_dense(m);
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i][j])
}

fn gram_x(mesh: &BipartiteMesh, layout: &DofLayout) -> Result<DMatrix<f64>> {
    let n_u1 = layout.n_u1;
    let mut g = dense(layout.n_x(), layout.n_x(), &rt0_mass_entries(mesh, layout, &|_| 1.0, false)?);
    g += dense(layout.n_x(), layout.n_x(), &rt0_div_entries(mesh, layout));
    let shift = |entries: Vec<faer::sparse::Triplet<usize, usize, f64>>| {
        entries
            .into_iter()
            .map(|e| faer::sparse::Triplet::new(e.row + n_u1, e.col + n_u1, e.val))
            .collect::<Vec<_>>()
    };
    g += dense(layout.n_x(), layout.n_x(), &shift(p1_entries(mesh, layout, &|_| 1.0, false, false)?));
    g += dense(layout.n_x(), layout.n_x(), &shift(p1_entries(mesh, layout, &|_| 1.0, true, false)?));
    Ok(g)
}

fn gram_y(mesh: &BipartiteMesh, layout: &DofLayout) -> Result<DMatrix<f64>> {
    let stiff = p1_entries(mesh, layout, &|_| 1.0, true, false)?;
    let mut g = dense(layout.n_y(), layout.n_y(), &to_phi(layout, &stiff, true, true));
    for (k, &t) in layout.omega1_triangles.iter().enumerate() {
        g[(layout.n_phi + k, layout.n_phi + k)] = mesh.triangle_area(t);
    }
    Ok(g)
}

/// `L⁻¹` for the Cholesky factor `G = L Lᵀ`.
fn inverse_factor(g: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::SingularSystem(format!("{what} Gram matrix is not positive definite")))?;
    let l = chol.l();
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::SingularSystem(format!("{what} Gram factor is singular")))
}

fn smallest_singular_value(m: DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Inf-sup constant, coercivity on the kernel of B, and definiteness of C, by
/// dense linear algebra. Systems above [`DENSE_DIMENSION_LIMIT`] are refused.
pub fn check_wellposedness(mesh: &BipartiteMesh, sys: &SaddleSystem) -> Result<WellposednessDiagnostics> {
    let layout = &sys.layout;
    let dim = sys.dimension();
    if dim > DENSE_DIMENSION_LIMIT {
        return Err(Error::DimensionGuard {
            dim,
            max: DENSE_DIMENSION_LIMIT,
        });
    }
    let (nx, ny) = (layout.n_x(), layout.n_y());
    let b = from_sparse(&sys.b);
    let a = from_sparse(&sys.a);
    let sym_a = (&a + a.transpose()) * 0.5;
    let gx = gram_x(mesh, layout)?;
    let gy = gram_y(mesh, layout)?;

    let b_sigma_min = smallest_singular_value(b.clone());

    let lx_inv = inverse_factor(gx.clone(), "X")?;
    let ly_inv = inverse_factor(gy, "Y")?;
    let inf_sup = smallest_singular_value(&ly_inv * &b * lx_inv.transpose());

    // Kernel of B: eigenvectors of BᵀB with (numerically) zero eigenvalue.
    let eig = SymmetricEigen::new(b.transpose() * &b);
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let largest = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let kernel: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] <= 1e-10 * largest)
        .collect();
    let kernel_coercivity = if kernel.is_empty() {
        f64::INFINITY
    } else {
        let z = DMatrix::from_fn(nx, kernel.len(), |r, c| eig.eigenvectors[(r, kernel[c])]);
        let zt = z.transpose();
        let lz_inv = inverse_factor(&zt * &gx * &z, "kernel")?;
        let projected = &lz_inv * (&zt * &sym_a * &z) * lz_inv.transpose();
        let projected = (&projected + projected.transpose()) * 0.5;
        SymmetricEigen::new(projected).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    };

    let c = from_sparse(&sys.c);
    let c_phi = c.view((0, 0), (layout.n_phi, layout.n_phi)).into_owned();
    let c_min_eigenvalue = SymmetricEigen::new(c_phi).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    debug_assert_eq!(b.nrows(), ny);

    Ok(WellposednessDiagnostics {
        inf_sup,
        kernel_coercivity,
        c_min_eigenvalue,
        b_sigma_min,
    })
}
