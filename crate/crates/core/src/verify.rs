//! Manufactured solutions, error norms and observed orders.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{
    face_coefficients, face_quadrature_points, jump_avg_kernels, MaterialParams, StabilizationParams,
};
use crate::mesh::{BoundingBox, FaceTopology, Mesh};
use crate::polybasis::{cell_quadrature, face_quadrature};
use crate::spaces::{l2_distance_disp, DiscreteField, DofMap, FieldCoeffs, FieldSource, ZeroField, Difference};
use crate::tensor::{self, Matrix, Vector, ZERO_MAT};

/// An exact solution of the homogeneous Dirichlet problem with its load.
#[derive(Clone, Debug)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub description: &'static str,
    pub dim: usize,
    pub mat: MaterialParams,
    pub domain: BoundingBox,
    pub u: fn(&Vector) -> Vector,
    pub grad_u: fn(&Vector) -> Matrix,
    pub load: fn(&Vector) -> Vector,
}

impl ManufacturedCase {
    pub fn u_exact(&self, x: &Vector) -> Vector {
        (self.u)(x)
    }

    pub fn grad_u_exact(&self, x: &Vector) -> Matrix {
        (self.grad_u)(x)
    }

    pub fn sigma_exact(&self, x: &Vector) -> Matrix {
        self.mat.stiffness_apply(&tensor::sym(&(self.grad_u)(x)))
    }

    pub fn f(&self, x: &Vector) -> Vector {
        (self.load)(x)
    }
}

impl FieldSource for ManufacturedCase {
    fn displacement(&self, _: usize, x: &Vector) -> Vector {
        (self.u)(x)
    }
    fn strain(&self, _: usize, x: &Vector) -> Matrix {
        tensor::sym(&(self.grad_u)(x))
    }
    fn stress(&self, _: usize, x: &Vector) -> Matrix {
        self.sigma_exact(x)
    }
}

const C2: f64 = 80.0 / 7.0;

// a(t) = t (1 - t²), b(t) = (1 - t²)²
fn pa(t: f64) -> f64 {
    t * (1.0 - t * t)
}
fn pa1(t: f64) -> f64 {
    1.0 - 3.0 * t * t
}
fn pb(t: f64) -> f64 {
    (1.0 - t * t).powi(2)
}
fn pb1(t: f64) -> f64 {
    -4.0 * t * (1.0 - t * t)
}

fn poly_u(x: &Vector) -> Vector {
    let (s, t) = (x[0], x[1]);
    [
        -C2 * pa(t) * pb(s) - 4.0 * pa(s) * pb(t),
        C2 * pa(s) * pb(t) - 4.0 * pa(t) * pb(s),
        0.0,
    ]
}

fn poly_grad(x: &Vector) -> Matrix {
    let (s, t) = (x[0], x[1]);
    [
        [
            -C2 * pa(t) * pb1(s) - 4.0 * pa1(s) * pb(t),
            -C2 * pa1(t) * pb(s) - 4.0 * pa(s) * pb1(t),
            0.0,
        ],
        [
            C2 * pa1(s) * pb(t) - 4.0 * pa(t) * pb1(s),
            C2 * pa(s) * pb1(t) - 4.0 * pa1(t) * pb(s),
            0.0,
        ],
        [0.0; 3],
    ]
}

fn poly_f(x: &Vector) -> Vector {
    let (a, b) = (x[0], x[1]);
    let r2 = a * a + b * b;
    let ab = a * b;
    [
        -8.0 * (a + b) * ((3.0 * ab - 2.0) * r2 + 5.0 * (ab - 1.0).powi(2) - 2.0 * ab * ab),
        -8.0 * (a - b) * ((3.0 * ab + 2.0) * r2 - 5.0 * (ab + 1.0).powi(2) + 2.0 * ab * ab),
        0.0,
    ]
}

/// Polynomial displacement of degree 7 on `(-1, 1)²`, `λ = 0.3`, `μ = 0.35`.
pub fn case_2d_poly() -> ManufacturedCase {
    ManufacturedCase {
        name: "elas2d_poly",
        description: "2D polynomial solution on (-1,1)^2, lambda=0.3, mu=0.35",
        dim: 2,
        mat: MaterialParams { lambda: 0.3, mu: 0.35, dim: 2 },
        domain: BoundingBox::square(-1.0, 1.0),
        u: poly_u,
        grad_u: poly_grad,
        load: poly_f,
    }
}

const DIR3: Vector = [1.0, 2.0, 4.0];
const LAMBDA: f64 = 0.3;
const MU: f64 = 0.35;

fn sine_u(x: &Vector) -> Vector {
    let s = (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin();
    tensor::scale(&DIR3, s)
}

fn sine_grad(x: &Vector) -> Matrix {
    let sn = [(PI * x[0]).sin(), (PI * x[1]).sin(), (PI * x[2]).sin()];
    let cs = [(PI * x[0]).cos(), (PI * x[1]).cos(), (PI * x[2]).cos()];
    let ds = [PI * cs[0] * sn[1] * sn[2], PI * sn[0] * cs[1] * sn[2], PI * sn[0] * sn[1] * cs[2]];
    let mut g = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = DIR3[i] * ds[j];
        }
    }
    g
}

// -div σ = -μ Δu - (λ + μ) ∇ div u = 3π²μ c s - (λ + μ) H(s) c
fn sine_f(x: &Vector) -> Vector {
    let sn = [(PI * x[0]).sin(), (PI * x[1]).sin(), (PI * x[2]).sin()];
    let cs = [(PI * x[0]).cos(), (PI * x[1]).cos(), (PI * x[2]).cos()];
    let s = sn[0] * sn[1] * sn[2];
    let p2 = PI * PI;
    let mut h = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = if i == j { -p2 * s } else { p2 * cs[i] * cs[j] * sn[3 - i - j] };
        }
    }
    let hc = tensor::mat_vec(&h, &DIR3);
    let mut f = [0.0; 3];
    for i in 0..3 {
        f[i] = 3.0 * p2 * MU * DIR3[i] * s - (LAMBDA + MU) * hc[i];
    }
    f
}

/// `u = (1, 2, 4) sin(πx) sin(πy) sin(πz)` on `(0, 1)³`.
pub fn case_3d_sine() -> ManufacturedCase {
    ManufacturedCase {
        name: "elas3d_sine",
        description: "3D sine solution on (0,1)^3, lambda=0.3, mu=0.35",
        dim: 3,
        mat: MaterialParams { lambda: LAMBDA, mu: MU, dim: 3 },
        domain: BoundingBox::cube(0.0, 1.0),
        u: sine_u,
        grad_u: sine_grad,
        load: sine_f,
    }
}

pub fn case_by_name(name: &str) -> Result<ManufacturedCase> {
    match name {
        "elas2d_poly" => Ok(case_2d_poly()),
        "elas3d_sine" => Ok(case_3d_sine()),
        _ => Err(Error::InvalidInput(format!("unknown problem '{name}' (elas2d_poly, elas3d_sine)"))),
    }
}

/// `‖u - u_h‖₀`.
pub fn error_l2(mesh: &Mesh, dofmap: &DofMap, coeffs: &FieldCoeffs, case: &ManufacturedCase) -> Result<f64> {
    let uh = DiscreteField::new(mesh, dofmap, coeffs);
    l2_distance_disp(mesh, dofmap.data_exactness(), case, &uh)
}

/// Squared `|·|_A` contributions of an arbitrary pair.
fn seminorm_a_sq(
    mesh: &Mesh,
    topo: &FaceTopology,
    mat: &MaterialParams,
    coeffs: &[(f64, f64)],
    exactness: usize,
    field: &dyn FieldSource,
) -> Result<f64> {
    let rule = cell_quadrature(mesh.kind(), exactness)?;
    let frule = face_quadrature(mesh.kind(), exactness)?;
    let vol: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let map = mesh.cell_map(cell);
            rule.iter()
                .map(|(xi, w)| {
                    let x = map.to_physical(xi);
                    let s = field.stress(cell, &x);
                    w * map.det.abs() * tensor::ddot(&mat.compliance_apply(&s), &s)
                })
                .sum()
        })
        .collect();
    let faces: Vec<f64> = topo
        .faces
        .par_iter()
        .zip(coeffs.par_iter())
        .map(|(face, &(c11, c22))| {
            face_quadrature_points(mesh, face, &frule)
                .into_iter()
                .map(|(x, w)| {
                    let p = face.plus_cell;
                    let m = face.minus_cell;
                    let k = jump_avg_kernels(
                        &face.normal,
                        &field.displacement(p, &x),
                        m.map(|m| field.displacement(m, &x)).as_ref(),
                        &field.stress(p, &x),
                        m.map(|m| field.stress(m, &x)).as_ref(),
                    );
                    let mut v = c11 * tensor::ddot(&k.mjump_v, &k.mjump_v);
                    if face.is_interior() {
                        v += c22 * tensor::dot(&k.jump_tau, &k.jump_tau);
                    }
                    w * v
                })
                .sum()
        })
        .collect();
    Ok(vol.iter().sum::<f64>() + faces.iter().sum::<f64>())
}

/// `|(σ - σ_h, u - u_h)|_A` with exact fields evaluated on every face.
pub fn error_energy(
    mesh: &Mesh,
    topo: &FaceTopology,
    dofmap: &DofMap,
    coeffs: &FieldCoeffs,
    case: &ManufacturedCase,
    stab: &StabilizationParams,
) -> Result<f64> {
    let uh = DiscreteField::new(mesh, dofmap, coeffs);
    let diff = Difference(case, &uh);
    seminorm_a(mesh, topo, dofmap, &case.mat, stab, &diff)
}

/// `|(τ, v)|_A` of any pair.
pub fn seminorm_a(
    mesh: &Mesh,
    topo: &FaceTopology,
    dofmap: &DofMap,
    mat: &MaterialParams,
    stab: &StabilizationParams,
    field: &dyn FieldSource,
) -> Result<f64> {
    stab.validate()?;
    let coeffs = face_coefficients(topo, mesh, dofmap, stab);
    Ok(seminorm_a_sq(mesh, topo, mat, &coeffs, dofmap.data_exactness(), field)?.sqrt())
}

/// The face seminorm `|(τ, v)|_B`; meaningless without stress-jump
/// penalty, since it divides by `C22`.
pub fn seminorm_b(
    mesh: &Mesh,
    topo: &FaceTopology,
    dofmap: &DofMap,
    field: &dyn FieldSource,
    stab: &StabilizationParams,
) -> Result<f64> {
    stab.validate()?;
    if stab.is_ldg() {
        return Err(Error::InvalidInput(
            "|.|_B divides by C22 and is undefined when C22 = 0 (local DG case)".into(),
        ));
    }
    let coeffs = face_coefficients(topo, mesh, dofmap, stab);
    let frule = face_quadrature(mesh.kind(), dofmap.data_exactness())?;
    let faces: Vec<f64> = topo
        .faces
        .par_iter()
        .zip(coeffs.par_iter())
        .map(|(face, &(c11, c22))| {
            face_quadrature_points(mesh, face, &frule)
                .into_iter()
                .map(|(x, w)| {
                    let p = face.plus_cell;
                    let m = face.minus_cell;
                    let k = jump_avg_kernels(
                        &face.normal,
                        &field.displacement(p, &x),
                        m.map(|m| field.displacement(m, &x)).as_ref(),
                        &field.stress(p, &x),
                        m.map(|m| field.stress(m, &x)).as_ref(),
                    );
                    let tau2 = tensor::ddot(&k.avg_tau, &k.avg_tau);
                    let jv = c11 * tensor::ddot(&k.mjump_v, &k.mjump_v);
                    let v = if face.is_interior() {
                        c22 * tensor::dot(&k.jump_tau, &k.jump_tau)
                            + tau2 / c11
                            + tensor::dot(&k.avg_v, &k.avg_v) / c22
                            + jv
                    } else {
                        tau2 / c11 + jv
                    };
                    w * v
                })
                .sum()
        })
        .collect();
    Ok(faces.iter().sum::<f64>().sqrt())
}

/// `(Σ_K h_K ‖a - b‖²_{0,∂K})^{1/2}` for displacements and stresses. The
/// `h_K` weight lifts the trace rate of the projection error by one half,
/// so it matches the volume rate.
pub fn weighted_trace_distance(
    mesh: &Mesh,
    topo: &FaceTopology,
    exactness: usize,
    a: &dyn FieldSource,
    b: &dyn FieldSource,
) -> Result<(f64, f64)> {
    let frule = face_quadrature(mesh.kind(), exactness)?;
    let parts: Vec<(f64, f64)> = topo
        .faces
        .par_iter()
        .map(|face| {
            let cells = std::iter::once(face.plus_cell).chain(face.minus_cell);
            let points = face_quadrature_points(mesh, face, &frule);
            cells
                .map(|cell| {
                    let h = mesh.cell_diameter(cell);
                    points.iter().fold((0.0, 0.0), |(du, ds), (x, w)| {
                        let u = tensor::sub(&a.displacement(cell, x), &b.displacement(cell, x));
                        let s = tensor::mat_sub(&a.stress(cell, x), &b.stress(cell, x));
                        (du + h * w * tensor::dot(&u, &u), ds + h * w * tensor::ddot(&s, &s))
                    })
                })
                .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1))
        })
        .collect();
    let (u, s) = parts.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    Ok((u.sqrt(), s.sqrt()))
}

/// `‖u‖₀` of the exact displacement, for scale.
pub fn norm_l2_exact(mesh: &Mesh, dofmap: &DofMap, case: &ManufacturedCase) -> Result<f64> {
    l2_distance_disp(mesh, dofmap.data_exactness(), case, &ZeroField)
}

/// `log₂(e_i / e_{i+1})` for consecutive `(h, e)` pairs; `h` must halve.
pub fn observed_orders(errors: &[(f64, f64)]) -> Result<Vec<f64>> {
    errors
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if !(h1 > 0.0 && ((h0 / h1) - 2.0).abs() < 1e-9) {
                return Err(Error::InvalidInput(format!("mesh sizes {h0} -> {h1} do not halve")));
            }
            Ok((e0 / e1).log2())
        })
        .collect()
}
