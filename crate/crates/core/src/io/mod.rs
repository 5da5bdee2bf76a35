//! Plain-text output: legacy VTK for meshes and fields, MatrixMarket for matrices.

pub mod matrix_market;
pub mod vtk;
