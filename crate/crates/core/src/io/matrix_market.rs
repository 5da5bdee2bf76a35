//! MatrixMarket coordinate/array output.

use std::io::Write;

use crate::assembly::SparseMatrix;
use crate::error::Result;

/// `%%MatrixMarket matrix coordinate real general`, 1-based, column-major order.
pub fn write_matrix(m: &SparseMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    let nnz: usize = (0..m.ncols()).map(|j| m.row_idx_of_col(j).count()).sum();
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for j in 0..m.ncols() {
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

/// `%%MatrixMarket matrix array real general` column vector.
pub fn write_vector(v: &[f64], w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}
