//! Quadrature on reference cells and faces.
//!
//! Simplex rules use the collapsed-coordinate (Duffy) map of Gauss–Legendre
//! tensor rules, which gives positive weights and any exactness degree.

use crate::error::{Error, Result};
use crate::mesh::CellKind;
use crate::tensor::Vector;

/// Largest exactness degree served; beyond it the node solver loses accuracy.
pub const MAX_EXACTNESS: usize = 80;

#[derive(Clone, Debug)]
pub struct QuadRule {
    pub dim: usize,
    pub points: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vector, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&Vector) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn check_exactness(exactness: usize) -> Result<()> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::QuadratureUnavailable(exactness));
    }
    Ok(())
}

/// Tensor-product Gauss rule on `[0,1]^dim` exact to `exactness` per axis.
pub fn tensor_gauss(dim: usize, exactness: usize) -> Result<QuadRule> {
    check_exactness(exactness)?;
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("unsupported dimension {dim}")));
    }
    let (x, w) = gauss_legendre(exactness / 2 + 1);
    let n = x.len();
    let mut points = Vec::with_capacity(n.pow(dim as u32));
    let mut weights = Vec::with_capacity(points.capacity());
    let m = |a: usize| if a < dim { n } else { 1 };
    for k in 0..m(2) {
        for j in 0..m(1) {
            for i in 0..n {
                let mut p = [0.0; 3];
                let mut wt = w[i];
                p[0] = x[i];
                if dim > 1 {
                    p[1] = x[j];
                    wt *= w[j];
                }
                if dim > 2 {
                    p[2] = x[k];
                    wt *= w[k];
                }
                points.push(p);
                weights.push(wt);
            }
        }
    }
    Ok(QuadRule { dim, points, weights })
}

/// Rule on the unit simplex `{x_i >= 0, sum x_i <= 1}` exact for total
/// degree `exactness`.
pub fn simplex_quadrature(dim: usize, exactness: usize) -> Result<QuadRule> {
    check_exactness(exactness)?;
    match dim {
        1 => tensor_gauss(1, exactness),
        2 => {
            // x = a (1 - b), y = b, jacobian (1 - b)
            let (x, w) = gauss_legendre(exactness.div_ceil(2) + 1);
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (&b, &wb) in x.iter().zip(&w) {
                for (&a, &wa) in x.iter().zip(&w) {
                    points.push([a * (1.0 - b), b, 0.0]);
                    weights.push(wa * wb * (1.0 - b));
                }
            }
            Ok(QuadRule { dim, points, weights })
        }
        3 => {
            // x = a (1-b)(1-c), y = b (1-c), z = c, jacobian (1-b)(1-c)^2
            let (x, w) = gauss_legendre((exactness + 2) / 2 + 1);
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (&c, &wc) in x.iter().zip(&w) {
                for (&b, &wb) in x.iter().zip(&w) {
                    for (&a, &wa) in x.iter().zip(&w) {
                        points.push([a * (1.0 - b) * (1.0 - c), b * (1.0 - c), c]);
                        weights.push(wa * wb * wc * (1.0 - b) * (1.0 - c) * (1.0 - c));
                    }
                }
            }
            Ok(QuadRule { dim, points, weights })
        }
        _ => Err(Error::InvalidInput(format!("unsupported simplex dimension {dim}"))),
    }
}

/// Volume rule on the reference cell of `kind`.
pub fn cell_quadrature(kind: CellKind, exactness: usize) -> Result<QuadRule> {
    match kind {
        CellKind::Triangle => simplex_quadrature(2, exactness),
        CellKind::Tetrahedron => simplex_quadrature(3, exactness),
        CellKind::Quad => tensor_gauss(2, exactness),
    }
}

/// Rule on the reference face of `kind`: `[0,1]` for 2D cells, the unit
/// triangle for tetrahedra.
pub fn face_quadrature(kind: CellKind, exactness: usize) -> Result<QuadRule> {
    match kind {
        CellKind::Triangle | CellKind::Quad => tensor_gauss(1, exactness),
        CellKind::Tetrahedron => simplex_quadrature(2, exactness),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Dirichlet integral of a monomial over the unit simplex.
    fn simplex_monomial(e: &[u32]) -> f64 {
        let d = e.len() as u32;
        let num: f64 = e.iter().map(|&k| factorial(k)).product();
        num / factorial(e.iter().sum::<u32>() + d)
    }

    fn monomial(x: &Vector, e: &[u32]) -> f64 {
        e.iter().enumerate().map(|(a, &k)| x[a].powi(k as i32)).product()
    }

    fn exponents(dim: usize, max: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for i in 0..=max {
            for j in 0..=if dim > 1 { max } else { 0 } {
                for k in 0..=if dim > 2 { max } else { 0 } {
                    let e: Vec<u32> = [i, j, k][..dim].to_vec();
                    out.push(e);
                }
            }
        }
        out
    }

    #[test]
    fn gauss_legendre_exact_to_2n_minus_1() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) as i32 {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
                assert!((s - 1.0 / (p + 1) as f64).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn simplex_rules_exact_for_all_monomials() {
        for dim in 1..=3 {
            for q in 0..=16 {
                let rule = simplex_quadrature(dim, q).unwrap();
                for e in exponents(dim, q as u32) {
                    if e.iter().sum::<u32>() > q as u32 {
                        continue;
                    }
                    let exact = simplex_monomial(&e);
                    let got = rule.integrate(|x| monomial(x, &e));
                    assert!((got - exact).abs() <= 1e-12 * exact, "dim={dim} q={q} e={e:?}");
                }
            }
        }
    }

    #[test]
    fn tensor_rules_exact_per_axis() {
        for dim in 1..=3 {
            for q in 0..=12 {
                let rule = tensor_gauss(dim, q).unwrap();
                assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                for e in exponents(dim, q as u32) {
                    let exact: f64 = e.iter().map(|&k| 1.0 / (k + 1) as f64).product();
                    let got = rule.integrate(|x| monomial(x, &e));
                    assert!((got - exact).abs() <= 1e-12 * exact);
                }
            }
        }
    }

    #[test]
    fn documented_values() {
        let r = simplex_quadrature(2, 0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let r = simplex_quadrature(2, 3).unwrap();
        assert!((r.integrate(|x| x[0] * x[0] * x[1]) - 1.0 / 60.0).abs() < 1e-15);
        let r = simplex_quadrature(3, 2).unwrap();
        assert!((r.integrate(|x| x[0] * x[1]) - 1.0 / 120.0).abs() < 1e-15);
        let r = tensor_gauss(1, 1).unwrap();
        assert!((r.integrate(|x| x[0]) - 0.5).abs() < 1e-15);
        let r = tensor_gauss(2, 5).unwrap();
        assert!((r.integrate(|x| x[0].powi(5) * x[1].powi(5)) - 1.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn points_inside_and_weights_positive() {
        for dim in 2..=3 {
            let r = simplex_quadrature(dim, 9).unwrap();
            for (x, w) in r.iter() {
                assert!(w > 0.0 && w.is_finite());
                assert!(x.iter().all(|&c| c >= 0.0) && x.iter().sum::<f64>() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn unavailable_exactness_and_dimension() {
        assert!(simplex_quadrature(4, 2).is_err());
        assert!(tensor_gauss(0, 2).is_err());
        assert!(matches!(simplex_quadrature(2, MAX_EXACTNESS + 1), Err(Error::QuadratureUnavailable(_))));
    }
}
