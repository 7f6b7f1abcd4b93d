//! Orthonormal total-degree polynomial bases on reference cells.

use crate::mesh::{AffineMap, CellKind};
use crate::polybasis::quadrature::{cell_quadrature, QuadRule};
use crate::tensor::{Vector, ZERO_VEC};

/// Scaling applied to centered reference coordinates before forming
/// monomials, so every monomial stays O(1) on the cell.
const MONOMIAL_SCALE: f64 = 2.0;

/// `L^2(reference cell)`-orthonormal basis of `P_p`, stored as a lower
/// triangular combination of scaled monomials.
#[derive(Clone, Debug)]
pub struct BasisSet {
    kind: CellKind,
    degree: usize,
    exponents: Vec<[u32; 3]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<f64>,
}

pub fn dim_total_degree(dim: usize, p: usize) -> usize {
    // C(p + d, d)
    (1..=dim).fold(1, |acc, i| acc * (p + i) / i)
}

impl BasisSet {
    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    fn monomials(&self, xi: &Vector, values: &mut [f64], grads: Option<&mut [Vector]>) {
        let dim = self.kind.dim();
        let c = self.kind.reference_centroid();
        let p = self.degree;
        assert!(p < 16, "basis degree {p} not supported");
        // per-axis powers and their derivatives
        let mut pw = [[0.0; 16]; 3];
        let mut dpw = [[0.0; 16]; 3];
        for a in 0..dim {
            let t = (xi[a] - c[a]) * MONOMIAL_SCALE;
            pw[a][0] = 1.0;
            dpw[a][0] = 0.0;
            for e in 1..=p {
                pw[a][e] = pw[a][e - 1] * t;
                dpw[a][e] = e as f64 * pw[a][e - 1] * MONOMIAL_SCALE;
            }
        }
        for row in pw.iter_mut().skip(dim) {
            row[0] = 1.0;
        }
        match grads {
            None => {
                for (v, e) in values.iter_mut().zip(&self.exponents) {
                    *v = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
                }
            }
            Some(grads) => {
                for ((v, g), e) in values.iter_mut().zip(grads.iter_mut()).zip(&self.exponents) {
                    let (i, j, k) = (e[0] as usize, e[1] as usize, e[2] as usize);
                    *v = pw[0][i] * pw[1][j] * pw[2][k];
                    *g = [
                        dpw[0][i] * pw[1][j] * pw[2][k],
                        pw[0][i] * dpw[1][j] * pw[2][k],
                        pw[0][i] * pw[1][j] * dpw[2][k],
                    ];
                }
            }
        }
    }

    /// Values of all basis functions at reference point `xi`.
    pub fn eval(&self, xi: &Vector, out: &mut [f64]) {
        let n = self.size();
        let mut m = vec![0.0; n];
        self.monomials(xi, &mut m, None);
        for i in 0..n {
            let row = &self.coeffs[i * n..i * n + i + 1];
            out[i] = row.iter().zip(&m).map(|(c, m)| c * m).sum();
        }
    }

    /// Values and reference gradients at `xi`.
    pub fn eval_with_grad(&self, xi: &Vector, values: &mut [f64], grads: &mut [Vector]) {
        let n = self.size();
        let mut m = vec![0.0; n];
        let mut dm = vec![ZERO_VEC; n];
        self.monomials(xi, &mut m, Some(&mut dm));
        for i in 0..n {
            let row = &self.coeffs[i * n..i * n + i + 1];
            let mut v = 0.0;
            let mut g = ZERO_VEC;
            for (j, c) in row.iter().enumerate() {
                v += c * m[j];
                for a in 0..3 {
                    g[a] += c * dm[j][a];
                }
            }
            values[i] = v;
            grads[i] = g;
        }
    }

    /// Values and reference gradients at every point of `rule`.
    pub fn tabulate(&self, rule: &QuadRule) -> BasisTable {
        let n = self.size();
        let mut values = vec![0.0; n * rule.len()];
        let mut grads = vec![ZERO_VEC; n * rule.len()];
        for (q, x) in rule.points.iter().enumerate() {
            self.eval_with_grad(x, &mut values[q * n..(q + 1) * n], &mut grads[q * n..(q + 1) * n]);
        }
        BasisTable { size: n, values, grads }
    }
}

/// Basis values and reference gradients at the points of a quadrature rule,
/// point-major.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub size: usize,
    pub values: Vec<f64>,
    pub grads: Vec<Vector>,
}

impl BasisTable {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.size..(q + 1) * self.size]
    }

    pub fn grads_at(&self, q: usize) -> &[Vector] {
        &self.grads[q * self.size..(q + 1) * self.size]
    }
}

fn exponent_list(dim: usize, p: usize) -> Vec<[u32; 3]> {
    // graded order: total degree first, so the span of the first C(q+d,d)
    // functions is P_q for every q <= p
    let mut out = Vec::with_capacity(dim_total_degree(dim, p));
    for total in 0..=p as u32 {
        match dim {
            1 => out.push([total, 0, 0]),
            2 => {
                for j in 0..=total {
                    out.push([total - j, j, 0]);
                }
            }
            _ => {
                for k in 0..=total {
                    for j in 0..=total - k {
                        out.push([total - j - k, j, k]);
                    }
                }
            }
        }
    }
    out
}

/// Builds the orthonormal basis of `P_p` on the reference cell of `kind` by
/// Gram–Schmidt (two passes) on the graded scaled monomials.
pub fn orthonormal_basis(kind: CellKind, p: usize) -> BasisSet {
    let dim = kind.dim();
    let exponents = exponent_list(dim, p);
    let n = exponents.len();
    let mut basis = BasisSet { kind, degree: p, exponents, coeffs: vec![0.0; n * n] };
    for i in 0..n {
        basis.coeffs[i * n + i] = 1.0;
    }
    let rule = cell_quadrature(kind, 2 * p).expect("exactness 2p is always available");
    // monomial values weighted by sqrt(w), one column per monomial
    let mut samples = vec![0.0; rule.len() * n];
    let mut m = vec![0.0; n];
    for (q, (x, w)) in rule.iter().enumerate() {
        basis.monomials(x, &mut m, None);
        for j in 0..n {
            samples[j * rule.len() + q] = m[j] * w.sqrt();
        }
    }
    let nq = rule.len();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| samples[j * nq..(j + 1) * nq].to_vec()).collect();
    let mut coeffs = vec![0.0; n * n];
    for i in 0..n {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        for _pass in 0..2 {
            for j in 0..i {
                let proj: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                for q in 0..nq {
                    cols[i][q] -= proj * cols[j][q];
                }
                for t in 0..=j {
                    c[t] -= proj * coeffs[j * n + t];
                }
            }
        }
        let nrm: f64 = cols[i].iter().map(|a| a * a).sum::<f64>().sqrt();
        for q in 0..nq {
            cols[i][q] /= nrm;
        }
        for t in 0..=i {
            coeffs[i * n + t] = c[t] / nrm;
        }
    }
    basis.coeffs = coeffs;
    basis
}

/// Basis functions on a physical cell, `ψ_i(x) = φ_i(F^{-1} x) / sqrt|det J|`,
/// which makes them `L^2(K)`-orthonormal.
///
/// Returns the values and physical gradients at each reference point.
pub fn eval_basis_on_cell(
    basis: &BasisSet,
    map: &AffineMap,
    points: &[Vector],
) -> (Vec<Vec<f64>>, Vec<Vec<Vector>>) {
    let n = basis.size();
    let s = 1.0 / map.det.abs().sqrt();
    let mut values = Vec::with_capacity(points.len());
    let mut grads = Vec::with_capacity(points.len());
    let mut v = vec![0.0; n];
    let mut g = vec![ZERO_VEC; n];
    for xi in points {
        basis.eval_with_grad(xi, &mut v, &mut g);
        values.push(v.iter().map(|x| x * s).collect());
        grads.push(g.iter().map(|gr| crate::tensor::scale(&map.push_gradient(gr), s)).collect());
    }
    (values, grads)
}
