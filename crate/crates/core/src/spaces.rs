//! Degree-of-freedom layout for the stress and displacement spaces, element
//! L² projections and field evaluation.
//!
//! Global ordering: all stress unknowns first (cell-major, then component,
//! then basis function), followed by all displacement unknowns in the same
//! pattern. Basis functions are orthonormal on each physical cell, so the
//! local mass matrices are identities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::polybasis::{cell_quadrature, orthonormal_basis, BasisSet};
use crate::tensor::{self, Matrix, Vector, ZERO_MAT, ZERO_VEC};

#[derive(Clone, Debug)]
pub struct DofMap {
    dim: usize,
    n_cells: usize,
    k: usize,
    l: usize,
    stress_basis: BasisSet,
    disp_basis: BasisSet,
}

impl DofMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Displacement degree.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Stress degree.
    pub fn l(&self) -> usize {
        self.l
    }

    /// `p_K = min(k, l) + 1`.
    pub fn p(&self, _cell: usize) -> usize {
        self.k.min(self.l) + 1
    }

    pub fn stress_basis(&self) -> &BasisSet {
        &self.stress_basis
    }

    pub fn disp_basis(&self) -> &BasisSet {
        &self.disp_basis
    }

    pub fn n_stress_comp(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn stress_block(&self) -> usize {
        self.n_stress_comp() * self.stress_basis.size()
    }

    pub fn disp_block(&self) -> usize {
        self.dim * self.disp_basis.size()
    }

    pub fn n_stress_dofs(&self) -> usize {
        self.n_cells * self.stress_block()
    }

    pub fn n_disp_dofs(&self) -> usize {
        self.n_cells * self.disp_block()
    }

    pub fn total_dofs(&self) -> usize {
        self.n_stress_dofs() + self.n_disp_dofs()
    }

    pub fn stress_offset(&self, cell: usize) -> usize {
        cell * self.stress_block()
    }

    pub fn disp_offset(&self, cell: usize) -> usize {
        self.n_stress_dofs() + cell * self.disp_block()
    }

    /// Quadrature exactness for products of discrete functions.
    pub fn discrete_exactness(&self) -> usize {
        2 * self.k.max(self.l) + 2
    }

    /// Quadrature exactness for integrals involving problem data.
    pub fn data_exactness(&self) -> usize {
        2 * self.k.max(self.l) + 8
    }
}

/// Lays out `Σ_h` (symmetric tensors of degree `l`) and `V_h` (vectors of
/// degree `k`). Requires `|k - l| <= 1`, which with total-degree spaces is
/// exactly what `ε(V_h) ⊂ Σ_h`, `div_h Σ_h ⊂ V_h`, `𝒜Σ_h ⊂ Σ_h` need.
pub fn build_dofmap(mesh: &Mesh, k: usize, l: usize) -> Result<DofMap> {
    if k.abs_diff(l) > 1 {
        return Err(Error::DegreeMismatch { k, l });
    }
    Ok(DofMap {
        dim: mesh.dim(),
        n_cells: mesh.n_cells(),
        k,
        l,
        stress_basis: orthonormal_basis(mesh.kind(), l),
        disp_basis: orthonormal_basis(mesh.kind(), k),
    })
}

/// Coefficients of a (σ, u) pair in the layout of a [`DofMap`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCoeffs {
    pub values: Vec<f64>,
}

impl FieldCoeffs {
    pub fn zeros(dofmap: &DofMap) -> Self {
        Self { values: vec![0.0; dofmap.total_dofs()] }
    }

    pub fn stress_part<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.values[..dofmap.n_stress_dofs()]
    }

    pub fn disp_part<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.values[dofmap.n_stress_dofs()..]
    }
}

/// A stress/displacement pair that can be sampled cell by cell. `cell`
/// selects the side for discontinuous fields on faces.
pub trait FieldSource: Sync {
    fn displacement(&self, cell: usize, x: &Vector) -> Vector;
    /// Symmetric gradient `ε(u)`.
    fn strain(&self, cell: usize, x: &Vector) -> Matrix;
    fn stress(&self, cell: usize, x: &Vector) -> Matrix;
}

/// The identically zero field.
pub struct ZeroField;

impl FieldSource for ZeroField {
    fn displacement(&self, _: usize, _: &Vector) -> Vector {
        ZERO_VEC
    }
    fn strain(&self, _: usize, _: &Vector) -> Matrix {
        ZERO_MAT
    }
    fn stress(&self, _: usize, _: &Vector) -> Matrix {
        ZERO_MAT
    }
}

/// `a - b`.
pub struct Difference<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: FieldSource + ?Sized, B: FieldSource + ?Sized> FieldSource for Difference<'_, A, B> {
    fn displacement(&self, c: usize, x: &Vector) -> Vector {
        tensor::sub(&self.0.displacement(c, x), &self.1.displacement(c, x))
    }
    fn strain(&self, c: usize, x: &Vector) -> Matrix {
        tensor::mat_sub(&self.0.strain(c, x), &self.1.strain(c, x))
    }
    fn stress(&self, c: usize, x: &Vector) -> Matrix {
        tensor::mat_sub(&self.0.stress(c, x), &self.1.stress(c, x))
    }
}

/// `s * a`.
pub struct Scaled<'a, A: ?Sized>(pub f64, pub &'a A);

impl<A: FieldSource + ?Sized> FieldSource for Scaled<'_, A> {
    fn displacement(&self, c: usize, x: &Vector) -> Vector {
        tensor::scale(&self.1.displacement(c, x), self.0)
    }
    fn strain(&self, c: usize, x: &Vector) -> Matrix {
        tensor::mat_scale(&self.1.strain(c, x), self.0)
    }
    fn stress(&self, c: usize, x: &Vector) -> Matrix {
        tensor::mat_scale(&self.1.stress(c, x), self.0)
    }
}

/// Finite element fields given by coefficients.
pub struct DiscreteField<'a> {
    pub mesh: &'a Mesh,
    pub dofmap: &'a DofMap,
    pub coeffs: &'a FieldCoeffs,
}

impl<'a> DiscreteField<'a> {
    pub fn new(mesh: &'a Mesh, dofmap: &'a DofMap, coeffs: &'a FieldCoeffs) -> Self {
        Self { mesh, dofmap, coeffs }
    }

    fn disp_and_grad(&self, cell: usize, x: &Vector, want_grad: bool) -> (Vector, Matrix) {
        let map = self.mesh.cell_map(cell);
        let xi = map.to_reference(x);
        let basis = self.dofmap.disp_basis();
        let n = basis.size();
        let mut v = vec![0.0; n];
        let mut g = vec![ZERO_VEC; n];
        if want_grad {
            basis.eval_with_grad(&xi, &mut v, &mut g);
        } else {
            basis.eval(&xi, &mut v);
        }
        let s = 1.0 / map.det.abs().sqrt();
        let off = self.dofmap.disp_offset(cell);
        let mut u = ZERO_VEC;
        let mut grad = ZERO_MAT;
        for a in 0..self.dofmap.dim() {
            let c = &self.coeffs.values[off + a * n..off + (a + 1) * n];
            u[a] = s * c.iter().zip(&v).map(|(c, v)| c * v).sum::<f64>();
            if want_grad {
                for (ci, gi) in c.iter().zip(&g) {
                    let pg = map.push_gradient(gi);
                    for b in 0..3 {
                        grad[a][b] += s * ci * pg[b];
                    }
                }
            }
        }
        (u, grad)
    }
}

impl FieldSource for DiscreteField<'_> {
    fn displacement(&self, cell: usize, x: &Vector) -> Vector {
        self.disp_and_grad(cell, x, false).0
    }

    fn strain(&self, cell: usize, x: &Vector) -> Matrix {
        tensor::sym(&self.disp_and_grad(cell, x, true).1)
    }

    fn stress(&self, cell: usize, x: &Vector) -> Matrix {
        let map = self.mesh.cell_map(cell);
        let xi = map.to_reference(x);
        let basis = self.dofmap.stress_basis();
        let n = basis.size();
        let mut v = vec![0.0; n];
        basis.eval(&xi, &mut v);
        let s = 1.0 / map.det.abs().sqrt();
        let off = self.dofmap.stress_offset(cell);
        let mut sigma = ZERO_MAT;
        for (comp, &(i, j)) in tensor::sym_components(self.dofmap.dim()).iter().enumerate() {
            let c = &self.coeffs.values[off + comp * n..off + (comp + 1) * n];
            let val = s * c.iter().zip(&v).map(|(c, v)| c * v).sum::<f64>();
            sigma[i][j] = val;
            sigma[j][i] = val;
        }
        sigma
    }
}

/// Displacements and stresses of `coeffs` on `cell` at reference points.
pub fn evaluate_field(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &FieldCoeffs,
    cell: usize,
    points: &[Vector],
) -> Vec<(Vector, Matrix)> {
    let field = DiscreteField::new(mesh, dofmap, coeffs);
    let map = mesh.cell_map(cell);
    points
        .iter()
        .map(|xi| {
            let x = map.to_physical(xi);
            (field.displacement(cell, &x), field.stress(cell, &x))
        })
        .collect()
}

/// Local moments `∫_K g ψ_i` for each scalar channel of `g`, in parallel
/// over cells; each block is written once.
fn project_channels<F>(
    mesh: &Mesh,
    basis: &BasisSet,
    n_channels: usize,
    exactness: usize,
    sample: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, &Vector, &mut [f64]) -> Result<()> + Sync,
{
    let rule = cell_quadrature(mesh.kind(), exactness)?;
    let table = basis.tabulate(&rule);
    let n = basis.size();
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            let jw = map.det.abs();
            let s = 1.0 / jw.sqrt();
            let mut block = vec![0.0; n_channels * n];
            let mut g = vec![0.0; n_channels];
            for (q, (xi, w)) in rule.iter().enumerate() {
                let x = map.to_physical(xi);
                sample(cell, &x, &mut g)?;
                let phi = table.values_at(q);
                for (ch, gv) in g.iter().enumerate() {
                    let f = w * jw * s * gv;
                    for i in 0..n {
                        block[ch * n + i] += f * phi[i];
                    }
                }
            }
            Ok(block)
        })
        .collect()
}

/// `Q_h u`: element-wise L² projection of a vector field onto `V_h`.
/// Only the displacement part of the result is populated.
pub fn project_displacement<F>(mesh: &Mesh, dofmap: &DofMap, u_exact: F) -> Result<FieldCoeffs>
where
    F: Fn(&Vector) -> Vector + Sync,
{
    let dim = dofmap.dim();
    let blocks = project_channels(mesh, dofmap.disp_basis(), dim, dofmap.data_exactness(), |_, x, out| {
        let u = u_exact(x);
        out.copy_from_slice(&u[..dim]);
        Ok(())
    })?;
    let mut coeffs = FieldCoeffs::zeros(dofmap);
    for (cell, block) in blocks.into_iter().enumerate() {
        let off = dofmap.disp_offset(cell);
        coeffs.values[off..off + block.len()].copy_from_slice(&block);
    }
    Ok(coeffs)
}

/// `P_h σ`: componentwise L² projection of a symmetric tensor field onto
/// `Σ_h`. Only the stress part of the result is populated.
pub fn project_stress<F>(mesh: &Mesh, dofmap: &DofMap, sigma_exact: F) -> Result<FieldCoeffs>
where
    F: Fn(&Vector) -> Matrix + Sync,
{
    let dim = dofmap.dim();
    let comps = tensor::sym_components(dim);
    let blocks = project_channels(mesh, dofmap.stress_basis(), comps.len(), dofmap.data_exactness(), |_, x, out| {
        let s = sigma_exact(x);
        let asym = tensor::frobenius(&tensor::mat_sub(&s, &tensor::transpose(&s)));
        if asym > 1e-10 * (1.0 + tensor::frobenius(&s)) {
            return Err(Error::InvalidInput(format!(
                "stress field is not symmetric at {:?} (|σ - σᵀ| = {asym:.2e})",
                &x[..dim]
            )));
        }
        for (c, &(i, j)) in comps.iter().enumerate() {
            out[c] = s[i][j];
        }
        Ok(())
    })?;
    let mut coeffs = FieldCoeffs::zeros(dofmap);
    for (cell, block) in blocks.into_iter().enumerate() {
        let off = dofmap.stress_offset(cell);
        coeffs.values[off..off + block.len()].copy_from_slice(&block);
    }
    Ok(coeffs)
}

/// Projects both parts of a [`FieldSource`] (used to build interpolants of
/// exact solutions).
pub fn project_pair(mesh: &Mesh, dofmap: &DofMap, field: &dyn FieldSource) -> Result<FieldCoeffs> {
    let dim = dofmap.dim();
    let ns = dofmap.n_stress_comp();
    let comps = tensor::sym_components(dim);
    let sb = project_channels(mesh, dofmap.stress_basis(), ns, dofmap.data_exactness(), |c, x, out| {
        let s = field.stress(c, x);
        for (k, &(i, j)) in comps.iter().enumerate() {
            out[k] = s[i][j];
        }
        Ok(())
    })?;
    let ub = project_channels(mesh, dofmap.disp_basis(), dim, dofmap.data_exactness(), |c, x, out| {
        out.copy_from_slice(&field.displacement(c, x)[..dim]);
        Ok(())
    })?;
    let mut coeffs = FieldCoeffs::zeros(dofmap);
    for (cell, (s, u)) in sb.into_iter().zip(ub).enumerate() {
        let so = dofmap.stress_offset(cell);
        coeffs.values[so..so + s.len()].copy_from_slice(&s);
        let uo = dofmap.disp_offset(cell);
        coeffs.values[uo..uo + u.len()].copy_from_slice(&u);
    }
    Ok(coeffs)
}

/// `(Σ_K ∫_K |u - v|²)^{1/2}` between two displacement fields.
pub fn l2_distance_disp(mesh: &Mesh, exactness: usize, a: &dyn FieldSource, b: &dyn FieldSource) -> Result<f64> {
    let rule = cell_quadrature(mesh.kind(), exactness)?;
    let s: f64 = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            rule.iter()
                .map(|(xi, w)| {
                    let x = map.to_physical(xi);
                    let d = tensor::sub(&a.displacement(cell, &x), &b.displacement(cell, &x));
                    w * map.det.abs() * tensor::dot(&d, &d)
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(s.sqrt())
}

/// Same for stresses, with the full tensor norm.
pub fn l2_distance_stress(mesh: &Mesh, exactness: usize, a: &dyn FieldSource, b: &dyn FieldSource) -> Result<f64> {
    let rule = cell_quadrature(mesh.kind(), exactness)?;
    let s: f64 = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            rule.iter()
                .map(|(xi, w)| {
                    let x = map.to_physical(xi);
                    let d = tensor::mat_sub(&a.stress(cell, &x), &b.stress(cell, &x));
                    w * map.det.abs() * tensor::ddot(&d, &d)
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(s.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_quad, build_uniform_tet, build_uniform_tri, BoundingBox};

    struct Fn2<U, S>(U, S);
    impl<U: Fn(&Vector) -> Vector + Sync, S: Fn(&Vector) -> Matrix + Sync> FieldSource for Fn2<U, S> {
        fn displacement(&self, _: usize, x: &Vector) -> Vector {
            (self.0)(x)
        }
        fn strain(&self, _: usize, _: &Vector) -> Matrix {
            ZERO_MAT
        }
        fn stress(&self, _: usize, x: &Vector) -> Matrix {
            (self.1)(x)
        }
    }

    fn sq() -> BoundingBox {
        BoundingBox::square(-1.0, 1.0)
    }

    #[test]
    fn dofmap_sizes() {
        let m = build_uniform_tri(1, sq()).unwrap();
        let d = build_dofmap(&m, 1, 1).unwrap();
        assert_eq!((d.stress_block(), d.disp_block(), d.total_dofs()), (9, 6, 30));
        let m = build_uniform_tet(1, BoundingBox::cube(0.0, 1.0)).unwrap();
        let d = build_dofmap(&m, 1, 1).unwrap();
        assert_eq!(d.stress_block() + d.disp_block(), 36);
        assert_eq!(d.total_dofs(), 216);
        assert!(matches!(build_dofmap(&m, 0, 2), Err(Error::DegreeMismatch { k: 0, l: 2 })));
    }

    #[test]
    fn offsets_partition_the_range() {
        let m = build_uniform_tri(3, sq()).unwrap();
        let d = build_dofmap(&m, 2, 1).unwrap();
        let mut covered = vec![0u8; d.total_dofs()];
        for c in 0..m.n_cells() {
            for i in 0..d.stress_block() {
                covered[d.stress_offset(c) + i] += 1;
            }
            for i in 0..d.disp_block() {
                covered[d.disp_offset(c) + i] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let mut state = 99u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for m in [build_uniform_tri(2, sq()).unwrap(), build_uniform_quad(2, sq()).unwrap()] {
            let d = build_dofmap(&m, 1, 1).unwrap();
            let u = |x: &Vector| [1.0 + 2.0 * x[0] - x[1], 0.5 * x[1] - 3.0, 0.0];
            let c = project_displacement(&m, &d, u).unwrap();
            let f = DiscreteField::new(&m, &d, &c);
            for cell in 0..m.n_cells() {
                let xi = [0.3 * rnd(), 0.3 * rnd(), 0.0];
                let x = m.cell_map(cell).to_physical(&xi);
                let got = f.displacement(cell, &x);
                let want = u(&x);
                assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
            }
        }
        let m = build_uniform_tri(2, sq()).unwrap();
        let d = build_dofmap(&m, 0, 0).unwrap();
        let c = project_stress(&m, &d, |_| [[2.0, -1.0, 0.0], [-1.0, 3.0, 0.0], [0.0; 3]]).unwrap();
        let vals = evaluate_field(&m, &d, &c, 5, &[[0.2, 0.2, 0.0]]);
        assert!((vals[0].1[0][1] + 1.0).abs() < 1e-13 && (vals[0].1[1][1] - 3.0).abs() < 1e-13);
        assert_eq!(vals[0].1[0][1], vals[0].1[1][0]);
    }

    #[test]
    fn zero_data_gives_zero_coefficients() {
        let m = build_uniform_tri(2, sq()).unwrap();
        let d = build_dofmap(&m, 2, 2).unwrap();
        let c = project_displacement(&m, &d, |_| ZERO_VEC).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        let vals = evaluate_field(&m, &d, &c, 0, &[[0.1, 0.1, 0.0]]);
        assert_eq!(vals[0], (ZERO_VEC, ZERO_MAT));
    }

    #[test]
    fn asymmetric_stress_rejected() {
        let m = build_uniform_tri(1, sq()).unwrap();
        let d = build_dofmap(&m, 1, 1).unwrap();
        let r = project_stress(&m, &d, |_| [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0; 3]]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn shear_stays_trace_free() {
        let m = build_uniform_tri(2, sq()).unwrap();
        let d = build_dofmap(&m, 2, 2).unwrap();
        let c = project_stress(&m, &d, |x| {
            let a = (x[0] * 2.0).sin() * x[1];
            let b = x[0].exp();
            [[a, b, 0.0], [b, -a, 0.0], [0.0; 3]]
        })
        .unwrap();
        for (_, s) in evaluate_field(&m, &d, &c, 3, &[[0.1, 0.7, 0.0], [0.5, 0.2, 0.0]]) {
            assert!(tensor::trace(&s).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_is_orthogonal_and_projection_idempotent() {
        let m = build_uniform_tri(2, sq()).unwrap();
        let d = build_dofmap(&m, 2, 2).unwrap();
        let u = |x: &Vector| [(x[0] * 3.0).sin() * x[1].cos(), x[0] * x[1] * x[1] + x[1].exp(), 0.0];
        let c = project_displacement(&m, &d, u).unwrap();
        let discrete = DiscreteField::new(&m, &d, &c);
        // residual moments against every local test function
        let residual = Fn2(
            |x: &Vector| tensor::sub(&u(x), &ZERO_VEC),
            |_: &Vector| ZERO_MAT,
        );
        let rule = cell_quadrature(m.kind(), d.data_exactness()).unwrap();
        let table = d.disp_basis().tabulate(&rule);
        for cell in 0..m.n_cells() {
            let map = m.cell_map(cell);
            let s = 1.0 / map.det.abs().sqrt();
            for i in 0..d.disp_basis().size() {
                for a in 0..2 {
                    let mut r = 0.0;
                    for (q, (xi, w)) in rule.iter().enumerate() {
                        let x = map.to_physical(xi);
                        let e = residual.displacement(cell, &x)[a] - discrete.displacement(cell, &x)[a];
                        r += w * map.det.abs() * e * s * table.values_at(q)[i];
                    }
                    assert!(r.abs() < 1e-12, "cell {cell} fn {i}: {r}");
                }
            }
        }
        let again = project_displacement(&m, &d, |x| {
            // locate the cell containing x by reference coordinates
            for cell in 0..m.n_cells() {
                let xi = m.cell_map(cell).to_reference(x);
                if xi[0] >= -1e-12 && xi[1] >= -1e-12 && xi[0] + xi[1] <= 1.0 + 1e-12 {
                    return discrete.displacement(cell, x);
                }
            }
            unreachable!()
        })
        .unwrap();
        for (a, b) in again.values.iter().zip(&c.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
