//! Bilinear forms of the mixed DG method and their sparse assembly.
//!
//! With `(σ, u)` trial and `(τ, v)` test functions:
//!
//! ```text
//! a(σ, τ) = ∫ 𝒜σ:τ + ∫_{interior faces} C22 [σ]·[τ]
//! b(u, τ) = -Σ_K ∫_K ε(u):τ + ∫_{all faces} ⟦u⟧:{τ}
//! c(u, v) = ∫_{all faces} C11 ⟦u⟧:⟦v⟧
//! F(v)    = ∫ f·v
//! ```
//!
//! and the discrete problem `a(σ,τ) + b(u,τ) = 0`, `-b(v,σ) + c(u,v) = F(v)`.

mod assembly;
mod direct;
mod jumps;
mod material;
mod stabilization;

pub use assembly::{assemble_load, assemble_system, AssembledSystem};
pub use direct::{cell_faces, form_value, residual_functional, FormContext};
pub use jumps::{jump_avg_kernels, FaceKernels};
pub use material::{compliance_apply, stiffness_apply, MaterialParams};
pub use stabilization::{c11_on_face, c22_on_face, face_coefficients, StabilizationParams, FLUX_ALIASES};

use crate::mesh::{CellKind, Face, Mesh};
use crate::polybasis::QuadRule;
use crate::tensor::{self, Vector};

/// Physical points and weights of a reference face rule on `face`.
pub fn face_quadrature_points(mesh: &Mesh, face: &Face, rule: &QuadRule) -> Vec<(Vector, f64)> {
    let v = mesh.vertices();
    let p0 = v[face.vertices[0]];
    let e1 = tensor::sub(&v[face.vertices[1]], &p0);
    let (e2, ref_measure) = match mesh.kind() {
        CellKind::Tetrahedron => (tensor::sub(&v[face.vertices[2]], &p0), 0.5),
        _ => ([0.0; 3], 1.0),
    };
    let s = face.measure / ref_measure;
    rule.iter()
        .map(|(xi, w)| {
            let x = tensor::add(&tensor::add(&p0, &tensor::scale(&e1, xi[0])), &tensor::scale(&e2, xi[1]));
            (x, w * s)
        })
        .collect()
}
