//! Averages and jumps of traces on a face.
//!
//! `n` is the unit normal pointing out of the plus cell. On boundary faces
//! only the plus traces exist.

use crate::tensor::{self, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceKernels {
    /// `{v}`
    pub avg_v: Vector,
    /// `[v] = v⁺·n⁺ + v⁻·n⁻`
    pub jump_v: f64,
    /// `{τ}`
    pub avg_tau: Matrix,
    /// `[τ] = τ⁺n⁺ + τ⁻n⁻`
    pub jump_tau: Vector,
    /// `⟦v⟧ = sym(v⁺⊗n⁺) + sym(v⁻⊗n⁻)`
    pub mjump_v: Matrix,
}

pub fn jump_avg_kernels(
    n: &Vector,
    v_plus: &Vector,
    v_minus: Option<&Vector>,
    tau_plus: &Matrix,
    tau_minus: Option<&Matrix>,
) -> FaceKernels {
    match (v_minus, tau_minus) {
        (Some(vm), Some(tm)) => FaceKernels {
            avg_v: tensor::scale(&tensor::add(v_plus, vm), 0.5),
            jump_v: tensor::dot(v_plus, n) - tensor::dot(vm, n),
            avg_tau: tensor::mat_scale(&tensor::mat_add(tau_plus, tm), 0.5),
            jump_tau: tensor::sub(&tensor::mat_vec(tau_plus, n), &tensor::mat_vec(tm, n)),
            mjump_v: tensor::sym_outer(&tensor::sub(v_plus, vm), n),
        },
        _ => FaceKernels {
            avg_v: *v_plus,
            jump_v: tensor::dot(v_plus, n),
            avg_tau: *tau_plus,
            jump_tau: tensor::mat_vec(tau_plus, n),
            mjump_v: tensor::sym_outer(v_plus, n),
        },
    }
}
