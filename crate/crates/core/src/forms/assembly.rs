//! Sparse assembly of the `a`, `b`, `c` blocks and the load vector.

use rayon::prelude::*;

use super::face_quadrature_points;
use super::material::MaterialParams;
use super::stabilization::{face_coefficients, StabilizationParams};
use crate::error::Result;
use crate::mesh::{Face, FaceTopology, Mesh};
use crate::polybasis::{cell_quadrature, face_quadrature};
use crate::sparse::{CsrMatrix, Triplet};
use crate::spaces::DofMap;
use crate::tensor::{self, Matrix, Vector};

/// Blocks of `M = [Aa, Bb; -Bbᵀ, Cc]`. `Aa` and the rows of `Bb` use stress
/// indices; `Cc`, the columns of `Bb` and `rhs_u` use displacement indices
/// counted from zero (global index minus `n_stress_dofs`).
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub dofmap: DofMap,
    pub aa: CsrMatrix,
    pub bb: CsrMatrix,
    pub cc: CsrMatrix,
    pub rhs_u: Vec<f64>,
    /// `(C11, C22)` per face, in topology order.
    pub face_coeffs: Vec<(f64, f64)>,
}

impl AssembledSystem {
    pub fn n_stress(&self) -> usize {
        self.dofmap.n_stress_dofs()
    }

    pub fn n_disp(&self) -> usize {
        self.dofmap.n_disp_dofs()
    }

    pub fn total_dofs(&self) -> usize {
        self.dofmap.total_dofs()
    }

    /// Full right-hand side `(0; rhs_u)`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n_stress()];
        b.extend_from_slice(&self.rhs_u);
        b
    }

    /// Triplets of the global matrix in `(σ; u)` ordering.
    pub fn global_triplets(&self) -> Vec<Triplet> {
        let ns = self.n_stress();
        let mut t = Vec::with_capacity(self.aa.nnz() + 2 * self.bb.nnz() + self.cc.nnz());
        t.extend(self.aa.iter());
        for (r, c, v) in self.bb.iter() {
            t.push((r, ns + c, v));
            t.push((ns + c, r, -v));
        }
        t.extend(self.cc.iter().map(|(r, c, v)| (ns + r, ns + c, v)));
        t
    }
}

#[derive(Default)]
struct Local {
    aa: Vec<Triplet>,
    bb: Vec<Triplet>,
    cc: Vec<Triplet>,
}

/// `G[c][c'] = 𝒜E_c : E_c'` for the symmetric unit tensors.
fn compliance_gram(mat: &MaterialParams) -> Vec<Vec<f64>> {
    let comps = tensor::sym_components(mat.dim);
    comps
        .iter()
        .map(|&(i, j)| {
            let ae = mat.compliance_apply(&tensor::component_tensor(i, j));
            comps.iter().map(|&(p, q)| tensor::ddot(&ae, &tensor::component_tensor(p, q))).collect()
        })
        .collect()
}

fn unit_tensors(dim: usize) -> Vec<Matrix> {
    tensor::sym_components(dim).iter().map(|&(i, j)| tensor::component_tensor(i, j)).collect()
}

pub fn assemble_system<F>(
    mesh: &Mesh,
    topo: &FaceTopology,
    dofmap: &DofMap,
    mat: &MaterialParams,
    stab: &StabilizationParams,
    load: F,
) -> Result<AssembledSystem>
where
    F: Fn(&Vector) -> Vector + Sync,
{
    stab.validate()?;
    if mat.dim != mesh.dim() {
        return Err(crate::Error::InvalidInput(format!(
            "material is {}D but the mesh is {}D",
            mat.dim,
            mesh.dim()
        )));
    }
    let dim = dofmap.dim();
    let nl = dofmap.stress_basis().size();
    let nk = dofmap.disp_basis().size();
    let ns_dofs = dofmap.n_stress_dofs();
    let gram = compliance_gram(mat);
    let units = unit_tensors(dim);
    let nsc = units.len();

    let rule = cell_quadrature(mesh.kind(), dofmap.discrete_exactness())?;
    let stab_tab = dofmap.stress_basis().tabulate(&rule);
    let disp_tab = dofmap.disp_basis().tabulate(&rule);
    // reference mass matrix of the stress basis (identity up to roundoff)
    let mut mass = vec![0.0; nl * nl];
    for (q, (_, w)) in rule.iter().enumerate() {
        let phi = stab_tab.values_at(q);
        for i in 0..nl {
            for j in 0..nl {
                mass[i * nl + j] += w * phi[i] * phi[j];
            }
        }
    }

    let cells: Vec<Local> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            let so = dofmap.stress_offset(cell);
            let uo = dofmap.disp_offset(cell) - ns_dofs;
            let mut out = Local::default();
            for (c, grow) in gram.iter().enumerate() {
                for (c2, &g) in grow.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    for i in 0..nl {
                        for j in 0..nl {
                            out.aa.push((so + c * nl + i, so + c2 * nl + j, g * mass[i * nl + j]));
                        }
                    }
                }
            }
            // -∫ ε(φ_j e_a) : φ_i E_c = -∫ φ_i (E_c ∇φ_j)_a
            let mut block = vec![0.0; nsc * nl * dim * nk];
            for (q, (_, w)) in rule.iter().enumerate() {
                let phi = stab_tab.values_at(q);
                let grads: Vec<Vector> = disp_tab.grads_at(q).iter().map(|g| map.push_gradient(g)).collect();
                for (c, e) in units.iter().enumerate() {
                    for (j, g) in grads.iter().enumerate() {
                        let eg = tensor::mat_vec(e, g);
                        for (a, &ega) in eg.iter().enumerate().take(dim) {
                            if ega == 0.0 {
                                continue;
                            }
                            let col = a * nk + j;
                            for i in 0..nl {
                                block[(c * nl + i) * dim * nk + col] -= w * phi[i] * ega;
                            }
                        }
                    }
                }
            }
            for r in 0..nsc * nl {
                for col in 0..dim * nk {
                    let v = block[r * dim * nk + col];
                    if v != 0.0 {
                        out.bb.push((so + r, uo + col, v));
                    }
                }
            }
            out
        })
        .collect();

    let face_coeffs = face_coefficients(topo, mesh, dofmap, stab);
    let frule = face_quadrature(mesh.kind(), dofmap.discrete_exactness())?;
    let faces: Vec<Local> = topo
        .faces
        .par_iter()
        .zip(face_coeffs.par_iter())
        .map(|(face, &(c11, c22))| face_contribution(mesh, dofmap, &units, face, c11, c22, &frule))
        .collect();

    let rhs_u = assemble_load(mesh, dofmap, load)?;

    let mut aa = Vec::new();
    let mut bb = Vec::new();
    let mut cc = Vec::new();
    for l in cells.into_iter().chain(faces) {
        aa.extend(l.aa);
        bb.extend(l.bb);
        cc.extend(l.cc);
    }
    let nu = dofmap.n_disp_dofs();
    Ok(AssembledSystem {
        dofmap: dofmap.clone(),
        aa: CsrMatrix::from_triplets(ns_dofs, ns_dofs, aa)?,
        bb: CsrMatrix::from_triplets(ns_dofs, nu, bb)?,
        cc: CsrMatrix::from_triplets(nu, nu, cc)?,
        rhs_u,
        face_coeffs,
    })
}

fn face_contribution(
    mesh: &Mesh,
    dofmap: &DofMap,
    units: &[Matrix],
    face: &Face,
    c11: f64,
    c22: f64,
    frule: &crate::polybasis::QuadRule,
) -> Local {
    let dim = dofmap.dim();
    let nl = dofmap.stress_basis().size();
    let nk = dofmap.disp_basis().size();
    let nsc = units.len();
    let ns_dofs = dofmap.n_stress_dofs();
    let n = face.normal;
    let sides: Vec<(usize, f64)> = match face.minus_cell {
        Some(m) => vec![(face.plus_cell, 1.0), (m, -1.0)],
        None => vec![(face.plus_cell, 1.0)],
    };
    let avg = if sides.len() == 2 { 0.5 } else { 1.0 };
    let maps: Vec<_> = sides.iter().map(|&(c, _)| mesh.cell_map(c)).collect();
    let ls = sides.len() * nsc * nl;
    let lu = sides.len() * dim * nk;
    let mut a_loc = vec![0.0; ls * ls];
    let mut b_loc = vec![0.0; ls * lu];
    let mut c_loc = vec![0.0; lu * lu];
    let en: Vec<Vector> = units.iter().map(|e| tensor::mat_vec(e, &n)).collect();
    // ⟦e_a⟧:⟦e_b⟧ factor for unit normal: (δ_ab + n_a n_b) / 2
    let nn: Vec<Vec<f64>> = (0..dim)
        .map(|a| (0..dim).map(|b| 0.5 * (if a == b { 1.0 } else { 0.0 } + n[a] * n[b])).collect())
        .collect();

    let mut sphi = vec![0.0; nl];
    let mut uphi = vec![0.0; nk];
    // per side scaled basis values at the current point
    let mut sval = vec![0.0; sides.len() * nl];
    let mut uval = vec![0.0; sides.len() * nk];
    for (x, w) in face_quadrature_points(mesh, face, frule) {
        for (s, map) in maps.iter().enumerate() {
            let xi = map.to_reference(&x);
            let scale = 1.0 / map.det.abs().sqrt();
            dofmap.stress_basis().eval(&xi, &mut sphi);
            dofmap.disp_basis().eval(&xi, &mut uphi);
            for i in 0..nl {
                sval[s * nl + i] = scale * sphi[i];
            }
            for j in 0..nk {
                uval[s * nk + j] = scale * uphi[j];
            }
        }
        // stress local index: (s * nsc + c) * nl + i; displacement: (s * dim + a) * nk + j
        if c22 != 0.0 {
            for (s1, &(_, g1)) in sides.iter().enumerate() {
                for (c1, e1) in en.iter().enumerate() {
                    for (s2, &(_, g2)) in sides.iter().enumerate() {
                        for (c2, e2) in en.iter().enumerate() {
                            let f = c22 * w * g1 * g2 * tensor::dot(e1, e2);
                            if f == 0.0 {
                                continue;
                            }
                            for i in 0..nl {
                                let r = (s1 * nsc + c1) * nl + i;
                                let fi = f * sval[s1 * nl + i];
                                for j in 0..nl {
                                    a_loc[r * ls + (s2 * nsc + c2) * nl + j] += fi * sval[s2 * nl + j];
                                }
                            }
                        }
                    }
                }
            }
        }
        // ⟦φ_j e_a⟧ : {φ_i E_c} = avg * sign * φ_i φ_j (E_c n)_a
        for s1 in 0..sides.len() {
            for (c, e) in en.iter().enumerate() {
                for (s2, &(_, g2)) in sides.iter().enumerate() {
                    for (a, &ea) in e.iter().enumerate().take(dim) {
                        let f = w * avg * g2 * ea;
                        if f == 0.0 {
                            continue;
                        }
                        for i in 0..nl {
                            let r = (s1 * nsc + c) * nl + i;
                            let fi = f * sval[s1 * nl + i];
                            for j in 0..nk {
                                b_loc[r * lu + (s2 * dim + a) * nk + j] += fi * uval[s2 * nk + j];
                            }
                        }
                    }
                }
            }
        }
        for (s1, &(_, g1)) in sides.iter().enumerate() {
            for a in 0..dim {
                for (s2, &(_, g2)) in sides.iter().enumerate() {
                    for b in 0..dim {
                        let f = c11 * w * g1 * g2 * nn[a][b];
                        if f == 0.0 {
                            continue;
                        }
                        for i in 0..nk {
                            let r = (s1 * dim + a) * nk + i;
                            let fi = f * uval[s1 * nk + i];
                            for j in 0..nk {
                                c_loc[r * lu + (s2 * dim + b) * nk + j] += fi * uval[s2 * nk + j];
                            }
                        }
                    }
                }
            }
        }
    }

    let sglob = |r: usize| dofmap.stress_offset(sides[r / (nsc * nl)].0) + r % (nsc * nl);
    let uglob = |r: usize| dofmap.disp_offset(sides[r / (dim * nk)].0) - ns_dofs + r % (dim * nk);
    let mut out = Local::default();
    for r in 0..ls {
        for c in 0..ls {
            let v = a_loc[r * ls + c];
            if v != 0.0 {
                out.aa.push((sglob(r), sglob(c), v));
            }
        }
        for c in 0..lu {
            let v = b_loc[r * lu + c];
            if v != 0.0 {
                out.bb.push((sglob(r), uglob(c), v));
            }
        }
    }
    for r in 0..lu {
        for c in 0..lu {
            let v = c_loc[r * lu + c];
            if v != 0.0 {
                out.cc.push((uglob(r), uglob(c), v));
            }
        }
    }
    out
}

/// `∫ f·φ_j` for every displacement basis function, in displacement indices.
pub fn assemble_load<F>(mesh: &Mesh, dofmap: &DofMap, load: F) -> Result<Vec<f64>>
where
    F: Fn(&Vector) -> Vector + Sync,
{
    let dim = dofmap.dim();
    let nk = dofmap.disp_basis().size();
    let rule = cell_quadrature(mesh.kind(), dofmap.data_exactness())?;
    let tab = dofmap.disp_basis().tabulate(&rule);
    let blocks: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            let s = map.det.abs().sqrt();
            let mut block = vec![0.0; dim * nk];
            for (q, (xi, w)) in rule.iter().enumerate() {
                let f = load(&map.to_physical(xi));
                let phi = tab.values_at(q);
                for a in 0..dim {
                    for j in 0..nk {
                        block[a * nk + j] += w * s * f[a] * phi[j];
                    }
                }
            }
            block
        })
        .collect();
    Ok(blocks.concat())
}
