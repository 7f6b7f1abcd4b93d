//! Fixed-size vectors and second order tensors.
//!
//! Everything is stored in 3D arrays; 2D quantities leave the third
//! component (row, column) at zero, so dot and double-dot products need no
//! dimension argument.

pub type Vector = [f64; 3];
pub type Matrix = [[f64; 3]; 3];

pub const ZERO_VEC: Vector = [0.0; 3];
pub const ZERO_MAT: Matrix = [[0.0; 3]; 3];

#[inline]
pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vector) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vector, b: &Vector) -> Vector {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vector, b: &Vector) -> Vector {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Vector, s: f64) -> Vector {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cross(a: &Vector, b: &Vector) -> Vector {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Double dot product `a : b`, summing all nine entries.
#[inline]
pub fn ddot(a: &Matrix, b: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

#[inline]
pub fn trace(a: &Matrix) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

#[inline]
pub fn mat_vec(a: &Matrix, v: &Vector) -> Vector {
    [dot(&a[0], v), dot(&a[1], v), dot(&a[2], v)]
}

#[inline]
pub fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] + b[i][j];
        }
    }
    c
}

#[inline]
pub fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] - b[i][j];
        }
    }
    c
}

#[inline]
pub fn mat_scale(a: &Matrix, s: f64) -> Matrix {
    let mut c = *a;
    for row in c.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    c
}

pub fn transpose(a: &Matrix) -> Matrix {
    let mut t = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

/// Symmetric outer product `(v ⊗ n + n ⊗ v) / 2`.
#[inline]
pub fn sym_outer(v: &Vector, n: &Vector) -> Matrix {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (v[i] * n[j] + n[i] * v[j]);
        }
    }
    m
}

/// Symmetric part of a gradient, `(g + g^T) / 2`.
#[inline]
pub fn sym(g: &Matrix) -> Matrix {
    let mut m = ZERO_MAT;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    m
}

pub fn identity(dim: usize) -> Matrix {
    let mut m = ZERO_MAT;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

pub fn frobenius(a: &Matrix) -> f64 {
    ddot(a, a).sqrt()
}

pub fn det(a: &Matrix, dim: usize) -> f64 {
    match dim {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

/// Inverse of the leading `dim x dim` block; entries outside stay zero.
pub fn inverse(a: &Matrix, dim: usize) -> Option<Matrix> {
    let d = det(a, dim);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = ZERO_MAT;
    match dim {
        1 => inv[0][0] = 1.0 / d,
        2 => {
            inv[0][0] = a[1][1] / d;
            inv[0][1] = -a[0][1] / d;
            inv[1][0] = -a[1][0] / d;
            inv[1][1] = a[0][0] / d;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / d;
                }
            }
        }
    }
    Some(inv)
}

/// Independent symmetric-tensor components in storage order.
///
/// 2D: `(11, 22, 12)`; 3D: `(11, 22, 33, 23, 13, 12)`.
pub fn sym_components(dim: usize) -> &'static [(usize, usize)] {
    const C2: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
    const C3: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    if dim == 2 {
        &C2
    } else {
        &C3
    }
}

/// Unit tensor for component `(i, j)`: `e_i ⊗ e_i` on the diagonal, and
/// `e_i ⊗ e_j + e_j ⊗ e_i` off it (no sqrt(2) weighting).
pub fn component_tensor(i: usize, j: usize) -> Matrix {
    let mut m = ZERO_MAT;
    m[i][j] = 1.0;
    m[j][i] = 1.0;
    m
}
