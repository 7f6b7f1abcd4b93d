//! Polynomial bases and quadrature on reference cells.

mod basis;
mod quadrature;

pub use basis::{dim_total_degree, eval_basis_on_cell, orthonormal_basis, BasisSet, BasisTable};
pub use quadrature::{
    cell_quadrature, face_quadrature, gauss_legendre, simplex_quadrature, tensor_gauss, QuadRule,
    MAX_EXACTNESS,
};
