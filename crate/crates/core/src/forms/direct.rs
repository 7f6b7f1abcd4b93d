//! Pointwise quadrature of the compact form
//! `A(σ,u;τ,v) = a(σ,τ) + b(u,τ) - b(v,σ) + c(u,v)` on arbitrary fields.
//!
//! This path shares no code with the sparse assembly beyond basis
//! evaluation, so the two can check each other.

use rayon::prelude::*;

use super::face_quadrature_points;
use super::jumps::jump_avg_kernels;
use super::material::MaterialParams;
use super::stabilization::{face_coefficients, StabilizationParams};
use crate::error::Result;
use crate::mesh::{FaceTopology, Mesh};
use crate::polybasis::{cell_quadrature, face_quadrature, QuadRule};
use crate::spaces::{DofMap, FieldSource};
use crate::tensor::{self, Matrix, Vector, ZERO_MAT, ZERO_VEC};

pub struct FormContext<'a> {
    pub mesh: &'a Mesh,
    pub topo: &'a FaceTopology,
    pub dofmap: &'a DofMap,
    pub mat: MaterialParams,
    /// `(C11, C22)` per face.
    pub coeffs: Vec<(f64, f64)>,
    cell_rule: QuadRule,
    face_rule: QuadRule,
}

impl<'a> FormContext<'a> {
    pub fn new(
        mesh: &'a Mesh,
        topo: &'a FaceTopology,
        dofmap: &'a DofMap,
        mat: MaterialParams,
        stab: &StabilizationParams,
        exactness: usize,
    ) -> Result<Self> {
        stab.validate()?;
        Ok(Self {
            mesh,
            topo,
            dofmap,
            mat,
            coeffs: face_coefficients(topo, mesh, dofmap, stab),
            cell_rule: cell_quadrature(mesh.kind(), exactness)?,
            face_rule: face_quadrature(mesh.kind(), exactness)?,
        })
    }

    fn cell_term(&self, cell: usize, trial: &dyn FieldSource, test: &dyn FieldSource) -> f64 {
        let map = self.mesh.cell_map(cell);
        let jw = map.det.abs();
        self.cell_rule
            .iter()
            .map(|(xi, w)| {
                let x = map.to_physical(xi);
                let sigma = trial.stress(cell, &x);
                let tau = test.stress(cell, &x);
                let a = tensor::ddot(&self.mat.compliance_apply(&sigma), &tau);
                let b_ut = -tensor::ddot(&trial.strain(cell, &x), &tau);
                let b_vs = -tensor::ddot(&test.strain(cell, &x), &sigma);
                w * jw * (a + b_ut - b_vs)
            })
            .sum()
    }

    fn face_term(&self, f: usize, trial: &dyn FieldSource, test: &dyn FieldSource) -> f64 {
        let face = &self.topo.faces[f];
        let (c11, c22) = self.coeffs[f];
        let n = face.normal;
        let p = face.plus_cell;
        let m = face.minus_cell;
        let traces = |field: &dyn FieldSource, x: &Vector| -> (Vector, Option<Vector>, Matrix, Option<Matrix>) {
            (
                field.displacement(p, x),
                m.map(|m| field.displacement(m, x)),
                field.stress(p, x),
                m.map(|m| field.stress(m, x)),
            )
        };
        face_quadrature_points(self.mesh, face, &self.face_rule)
            .into_iter()
            .map(|(x, w)| {
                let (u1, u2, s1, s2) = traces(trial, &x);
                let (v1, v2, t1, t2) = traces(test, &x);
                let kt = jump_avg_kernels(&n, &u1, u2.as_ref(), &s1, s2.as_ref());
                let ks = jump_avg_kernels(&n, &v1, v2.as_ref(), &t1, t2.as_ref());
                let mut val = tensor::ddot(&kt.mjump_v, &ks.avg_tau) - tensor::ddot(&ks.mjump_v, &kt.avg_tau)
                    + c11 * tensor::ddot(&kt.mjump_v, &ks.mjump_v);
                if face.is_interior() {
                    val += c22 * tensor::dot(&kt.jump_tau, &ks.jump_tau);
                }
                w * val
            })
            .sum()
    }

    /// `A` restricted to the given cells and faces.
    pub fn form_on(&self, cells: &[usize], faces: &[usize], trial: &dyn FieldSource, test: &dyn FieldSource) -> f64 {
        cells.iter().map(|&c| self.cell_term(c, trial, test)).sum::<f64>()
            + faces.iter().map(|&f| self.face_term(f, trial, test)).sum::<f64>()
    }

    /// `F(v) = ∫ f·v` over the given cells.
    pub fn load_on(&self, cells: &[usize], load: &(dyn Fn(&Vector) -> Vector + Sync), test: &dyn FieldSource) -> f64 {
        cells
            .iter()
            .map(|&cell| {
                let map = self.mesh.cell_map(cell);
                self.cell_rule
                    .iter()
                    .map(|(xi, w)| {
                        let x = map.to_physical(xi);
                        w * map.det.abs() * tensor::dot(&load(&x), &test.displacement(cell, &x))
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

/// `A(σ,u;τ,v)` over the whole mesh, summed in a fixed order.
pub fn form_value(ctx: &FormContext<'_>, trial: &dyn FieldSource, test: &dyn FieldSource) -> f64 {
    let cells: Vec<f64> = (0..ctx.mesh.n_cells())
        .into_par_iter()
        .map(|c| ctx.cell_term(c, trial, test))
        .collect();
    let faces: Vec<f64> = (0..ctx.topo.faces.len())
        .into_par_iter()
        .map(|f| ctx.face_term(f, trial, test))
        .collect();
    cells.iter().sum::<f64>() + faces.iter().sum::<f64>()
}

/// Face indices touching each cell.
pub fn cell_faces(topo: &FaceTopology, n_cells: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n_cells];
    for (i, f) in topo.faces.iter().enumerate() {
        out[f.plus_cell].push(i);
        if let Some(m) = f.minus_cell {
            out[m].push(i);
        }
    }
    out
}

/// One basis function of `Σ_h × V_h`, zero outside its cell.
struct BasisFunction<'a> {
    mesh: &'a Mesh,
    dofmap: &'a DofMap,
    cell: usize,
    /// stress component or displacement direction
    comp: usize,
    index: usize,
    is_stress: bool,
}

impl BasisFunction<'_> {
    fn value_and_grad(&self, x: &Vector) -> (f64, Vector) {
        let map = self.mesh.cell_map(self.cell);
        let xi = map.to_reference(x);
        let basis = if self.is_stress { self.dofmap.stress_basis() } else { self.dofmap.disp_basis() };
        let mut v = vec![0.0; basis.size()];
        let mut g = vec![ZERO_VEC; basis.size()];
        basis.eval_with_grad(&xi, &mut v, &mut g);
        let s = 1.0 / map.det.abs().sqrt();
        (s * v[self.index], tensor::scale(&map.push_gradient(&g[self.index]), s))
    }
}

impl FieldSource for BasisFunction<'_> {
    fn displacement(&self, cell: usize, x: &Vector) -> Vector {
        let mut u = ZERO_VEC;
        if cell == self.cell && !self.is_stress {
            u[self.comp] = self.value_and_grad(x).0;
        }
        u
    }

    fn strain(&self, cell: usize, x: &Vector) -> Matrix {
        if cell != self.cell || self.is_stress {
            return ZERO_MAT;
        }
        let mut e = ZERO_VEC;
        e[self.comp] = 1.0;
        tensor::sym_outer(&e, &self.value_and_grad(x).1)
    }

    fn stress(&self, cell: usize, x: &Vector) -> Matrix {
        if cell != self.cell || !self.is_stress {
            return ZERO_MAT;
        }
        let (i, j) = tensor::sym_components(self.dofmap.dim())[self.comp];
        tensor::mat_scale(&tensor::component_tensor(i, j), self.value_and_grad(x).0)
    }
}

/// `r_I = A(σ,u; φ_I) - F(φ_I)` for every global basis function `φ_I`, in
/// the global `(σ; u)` ordering. Vanishes for the exact solution.
pub fn residual_functional(
    ctx: &FormContext<'_>,
    field: &dyn FieldSource,
    load: &(dyn Fn(&Vector) -> Vector + Sync),
) -> Vec<f64> {
    let dm = ctx.dofmap;
    let faces = cell_faces(ctx.topo, ctx.mesh.n_cells());
    let nl = dm.stress_basis().size();
    let nk = dm.disp_basis().size();
    let per_cell: Vec<(Vec<f64>, Vec<f64>)> = (0..ctx.mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let cells = [cell];
            let eval = |is_stress: bool, comp: usize, index: usize| {
                let phi = BasisFunction { mesh: ctx.mesh, dofmap: dm, cell, comp, index, is_stress };
                let mut r = ctx.form_on(&cells, &faces[cell], field, &phi);
                if !is_stress {
                    r -= ctx.load_on(&cells, load, &phi);
                }
                r
            };
            let s: Vec<f64> = (0..dm.n_stress_comp())
                .flat_map(|c| (0..nl).map(move |i| (c, i)))
                .map(|(c, i)| eval(true, c, i))
                .collect();
            let u: Vec<f64> =
                (0..dm.dim()).flat_map(|a| (0..nk).map(move |j| (a, j))).map(|(a, j)| eval(false, a, j)).collect();
            (s, u)
        })
        .collect();
    let mut out = Vec::with_capacity(dm.total_dofs());
    for (s, _) in &per_cell {
        out.extend_from_slice(s);
    }
    for (_, u) in &per_cell {
        out.extend_from_slice(u);
    }
    out
}
