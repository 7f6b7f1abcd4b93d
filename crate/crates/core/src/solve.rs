//! Direct solution of the saddle-point system `[Aa, Bb; -Bbᵀ, Cc] (σ; u) = (0; F)`.

use std::time::Instant;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, LdltRef, SymmetricOrdering,
};
use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::{Conj, MatMut, Side};

use crate::error::{Error, Result};
use crate::forms::AssembledSystem;
use crate::spaces::FieldCoeffs;

/// Accepted solves have a relative residual at or below this.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `‖Mx - b‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub relative_residual: f64,
    /// The first-choice factorization met the tolerance without falling back.
    pub pivots_healthy: bool,
    pub backend: Backend,
    /// Refinement steps applied after the first solve.
    pub refinement_steps: usize,
    pub wall_time: f64,
}

/// `y = Mx`.
pub fn apply_operator(system: &AssembledSystem, x: &[f64]) -> Result<Vec<f64>> {
    let n = system.total_dofs();
    if x.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: x.len() });
    }
    let ns = system.n_stress();
    let (xs, xu) = x.split_at(ns);
    let mut y = system.aa.matvec(xs);
    for (a, b) in y.iter_mut().zip(system.bb.matvec(xu)) {
        *a += b;
    }
    let mut yu = system.cc.matvec(xu);
    for (a, b) in yu.iter_mut().zip(system.bb.matvec_transpose(xs)) {
        *a -= b;
    }
    y.extend(yu);
    Ok(y)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(system: &AssembledSystem, x: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mx = apply_operator(system, x)?;
    let r: Vec<f64> = b.iter().zip(&mx).map(|(b, m)| b - m).collect();
    let nb = norm2(b);
    let nr = norm2(&r);
    Ok((if nb > 0.0 { nr / nb } else { nr }, r))
}

fn faer_matrix(n: usize, triplets: impl Iterator<Item = (usize, usize, f64)>) -> Result<SparseColMat<usize, f64>> {
    let t: Vec<Triplet<usize, usize, f64>> = triplets.map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
        .map_err(|e| Error::InvalidInput(format!("cannot build sparse matrix: {e:?}")))
}

/// Which factorization produced the accepted solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Sign-constrained `LDLᵀ` of `[Aa, Bb; Bbᵀ, -Cc]`.
    SymmetricIndefinite,
    /// Partial-pivoting `LU` of the unsymmetric block matrix.
    Lu,
}

type Solver = Box<dyn Fn(&mut [f64])>;

/// `LDLᵀ` of the symmetrized matrix `[Aa, Bb; Bbᵀ, -Cc]` (displacement rows
/// negated, right-hand side `(0; -F)`). Every leading principal block of
/// this matrix has the inertia of its stress and displacement counts, so
/// pivots are known to be positive on stress rows and negative on
/// displacement rows; pivots that come out tiny or wrongly signed are
/// replaced by a small value of the expected sign and the refinement loop
/// absorbs the perturbation.
fn ldlt_solver(system: &AssembledSystem) -> Result<Solver> {
    let n = system.total_dofs();
    let ns = system.n_stress();
    let upper = system
        .aa
        .iter()
        .filter(|t| t.0 <= t.1)
        .chain(system.bb.iter().map(|(r, c, v)| (r, ns + c, v)))
        .chain(system.cc.iter().filter(|t| t.0 <= t.1).map(|(r, c, v)| (ns + r, ns + c, -v)));
    let matrix = faer_matrix(n, upper)?;
    let scale = system.aa.max_abs().max(system.bb.max_abs()).max(system.cc.max_abs());
    let symbolic = factorize_symbolic_cholesky(
        matrix.symbolic(),
        Side::Upper,
        SymmetricOrdering::Amd,
        CholeskySymbolicParams::default(),
    )
    .map_err(|e| Error::Singular(format!("symbolic analysis failed: {e:?}")))?;
    let par = faer::get_global_parallelism();
    let signs: Vec<i8> = (0..n).map(|i| if i < ns { 1 } else { -1 }).collect();
    let mut values = vec![0.0; symbolic.len_val()];
    {
        let req = symbolic.factorize_numeric_ldlt_scratch::<f64>(par, Default::default());
        let mut mem = MemBuffer::try_new(req).map_err(|e| Error::Singular(format!("out of memory: {e:?}")))?;
        symbolic
            .factorize_numeric_ldlt(
                &mut values,
                matrix.as_ref(),
                Side::Upper,
                LdltRegularization {
                    dynamic_regularization_signs: Some(&signs),
                    dynamic_regularization_delta: 1e-8 * scale,
                    dynamic_regularization_epsilon: 1e-13 * scale,
                },
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| Error::Singular(format!("{e:?}")))?;
    }
    Ok(Box::new(move |x: &mut [f64]| {
        let ldlt = LdltRef::new(&symbolic, &values);
        let req = symbolic.solve_in_place_scratch::<f64>(1, par);
        let mut mem = MemBuffer::new(req);
        for v in x[ns..].iter_mut() {
            *v = -*v;
        }
        let mut m = MatMut::from_column_major_slice_mut(x, n, 1);
        ldlt.solve_in_place_with_conj(Conj::No, m.as_mut(), par, MemStack::new(&mut mem));
    }))
}

fn lu_solver(system: &AssembledSystem) -> Result<Solver> {
    let n = system.total_dofs();
    let matrix = faer_matrix(n, system.global_triplets().into_iter())?;
    let lu = matrix.sp_lu().map_err(|e| Error::Singular(format!("{e:?}")))?;
    Ok(Box::new(move |x: &mut [f64]| {
        let m = MatMut::from_column_major_slice_mut(x, n, 1);
        lu.solve_in_place(m);
    }))
}

/// Solves with `solver`, then refines while the residual keeps dropping.
fn solve_refined(system: &AssembledSystem, solver: &Solver, b: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
    let mut x = b.to_vec();
    solver(&mut x);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite values in the solution; check zeta > 0 and the mesh".into()));
    }
    let (mut res, mut r) = relative_residual(system, &x, b)?;
    let mut steps = 0;
    while res > 1e-13 && steps < 10 {
        let mut dx = r.clone();
        solver(&mut dx);
        if dx.iter().any(|v| !v.is_finite()) {
            break;
        }
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
        let (res2, r2) = relative_residual(system, &candidate, b)?;
        if res2 >= res {
            break;
        }
        x = candidate;
        res = res2;
        r = r2;
        steps += 1;
    }
    Ok((x, res, steps))
}

/// Factorizes and solves; fails loudly on a singular factorization or a
/// residual above [`RESIDUAL_TOLERANCE`].
///
/// The symmetric factorization is tried first since its fill is far smaller
/// on 3D meshes; a residual above tolerance triggers a retry with the
/// partially pivoted LU.
pub fn solve_saddle(system: &AssembledSystem) -> Result<(FieldCoeffs, SolveReport)> {
    let start = Instant::now();
    let b = system.rhs();
    let attempt = |backend: Backend| -> Result<(Vec<f64>, f64, usize)> {
        let solver = match backend {
            Backend::SymmetricIndefinite => ldlt_solver(system)?,
            Backend::Lu => lu_solver(system)?,
        };
        solve_refined(system, &solver, &b)
    };
    let (x, res, steps, backend) = match attempt(Backend::SymmetricIndefinite) {
        Ok((x, res, steps)) if res <= RESIDUAL_TOLERANCE => (x, res, steps, Backend::SymmetricIndefinite),
        _ => {
            let (x, res, steps) = attempt(Backend::Lu)?;
            (x, res, steps, Backend::Lu)
        }
    };
    if res > RESIDUAL_TOLERANCE {
        return Err(Error::Residual { residual: res, tolerance: RESIDUAL_TOLERANCE });
    }
    let report = SolveReport {
        relative_residual: res,
        pivots_healthy: backend == Backend::SymmetricIndefinite,
        backend,
        refinement_steps: steps,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((FieldCoeffs { values: x }, report))
}
