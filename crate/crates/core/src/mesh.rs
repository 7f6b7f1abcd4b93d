//! Meshes, structured generators, the text mesh format and face topology.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor::{self, Matrix, Vector, ZERO_MAT, ZERO_VEC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Triangle,
    Quad,
    Tetrahedron,
}

impl CellKind {
    pub fn dim(self) -> usize {
        match self {
            CellKind::Triangle | CellKind::Quad => 2,
            CellKind::Tetrahedron => 3,
        }
    }

    pub fn n_vertices(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quad | CellKind::Tetrahedron => 4,
        }
    }

    /// Local faces as lists of local vertex indices. For simplices face `i`
    /// is opposite vertex `i`; quad faces run counterclockwise from edge 01.
    pub fn local_faces(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Triangle => &[&[1, 2], &[2, 0], &[0, 1]],
            CellKind::Quad => &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            CellKind::Tetrahedron => &[&[1, 2, 3], &[0, 2, 3], &[0, 1, 3], &[0, 1, 2]],
        }
    }

    /// Measure of the reference cell (unit simplex or unit square).
    pub fn reference_measure(self) -> f64 {
        match self {
            CellKind::Triangle => 0.5,
            CellKind::Quad => 1.0,
            CellKind::Tetrahedron => 1.0 / 6.0,
        }
    }

    pub fn reference_centroid(self) -> Vector {
        match self {
            CellKind::Triangle => [1.0 / 3.0, 1.0 / 3.0, 0.0],
            CellKind::Quad => [0.5, 0.5, 0.0],
            CellKind::Tetrahedron => [0.25, 0.25, 0.25],
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            CellKind::Triangle => "tri",
            CellKind::Quad => "quad",
            CellKind::Tetrahedron => "tet",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "tri" => Some(CellKind::Triangle),
            "quad" => Some(CellKind::Quad),
            "tet" => Some(CellKind::Tetrahedron),
            _ => None,
        }
    }
}

/// Axis-aligned box; unused trailing coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Vector,
    pub max: Vector,
}

impl BoundingBox {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { min: [lo, lo, 0.0], max: [hi, hi, 0.0] }
    }

    pub fn cube(lo: f64, hi: f64) -> Self {
        Self { min: [lo; 3], max: [hi; 3] }
    }

    pub fn measure(&self, dim: usize) -> f64 {
        (0..dim).map(|a| self.max[a] - self.min[a]).product()
    }

    pub fn contains(&self, x: &Vector, dim: usize, tol: f64) -> bool {
        (0..dim).all(|a| x[a] >= self.min[a] - tol && x[a] <= self.max[a] + tol)
    }

    fn from_points(points: &[Vector], dim: usize) -> Self {
        let mut min = ZERO_VEC;
        let mut max = ZERO_VEC;
        for a in 0..dim {
            min[a] = points.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
            max[a] = points.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
        }
        Self { min, max }
    }
}

/// Affine map `x = origin + J ξ` from the reference cell onto a physical cell.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub origin: Vector,
    pub jacobian: Matrix,
    pub inverse: Matrix,
    pub det: f64,
    dim: usize,
}

impl AffineMap {
    pub fn to_physical(&self, xi: &Vector) -> Vector {
        tensor::add(&self.origin, &tensor::mat_vec(&self.jacobian, xi))
    }

    pub fn to_reference(&self, x: &Vector) -> Vector {
        tensor::mat_vec(&self.inverse, &tensor::sub(x, &self.origin))
    }

    /// Maps a reference gradient to a physical one: `J^{-T} g`.
    pub fn push_gradient(&self, g: &Vector) -> Vector {
        let mut out = ZERO_VEC;
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            for j in 0..self.dim {
                *o += self.inverse[j][i] * g[j];
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    kind: CellKind,
    vertices: Vec<Vector>,
    cells: Vec<usize>,
    domain_box: BoundingBox,
}

impl Mesh {
    /// Builds a mesh and checks its invariants. Cell orientation is
    /// normalized to positive signed measure.
    pub fn new(
        kind: CellKind,
        vertices: Vec<Vector>,
        mut cells: Vec<usize>,
        domain_box: BoundingBox,
    ) -> Result<Self> {
        let nv = kind.n_vertices();
        if !cells.len().is_multiple_of(nv) {
            return Err(Error::InvalidMesh("cell connectivity length is not a multiple of the vertex count".into()));
        }
        let dim = kind.dim();
        for (c, cell) in cells.chunks_mut(nv).enumerate() {
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references vertex {bad} out of range")));
            }
            let signed = signed_measure(kind, &vertices, cell);
            if signed.abs() <= 1e-14 * scale_of(&vertices, cell).powi(dim as i32) {
                return Err(Error::InvalidMesh(format!("cell {c} has zero measure")));
            }
            if signed < 0.0 {
                reorient(kind, cell);
            }
        }
        let mut seen = HashMap::new();
        for (c, cell) in cells.chunks(nv).enumerate() {
            let mut key = cell.to_vec();
            key.sort_unstable();
            if let Some(prev) = seen.insert(key, c) {
                return Err(Error::InvalidMesh(format!("cells {prev} and {c} are duplicates")));
            }
        }
        let mesh = Self { dim, kind, vertices, cells, domain_box };
        if kind == CellKind::Quad {
            for c in 0..mesh.n_cells() {
                mesh.check_parallelogram(c)?;
            }
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / self.kind.n_vertices()
    }

    pub fn domain_box(&self) -> &BoundingBox {
        &self.domain_box
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.kind.n_vertices();
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.kind.n_vertices())
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        signed_measure(self.kind, &self.vertices, self.cell(c)).abs()
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_measure(c)).sum()
    }

    /// `h_K`: the largest distance between two vertices of the cell.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let mut h: f64 = 0.0;
        for (i, &a) in cell.iter().enumerate() {
            for &b in &cell[i + 1..] {
                h = h.max(tensor::norm(&tensor::sub(&self.vertices[a], &self.vertices[b])));
            }
        }
        h
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    pub fn cell_centroid(&self, c: usize) -> Vector {
        let cell = self.cell(c);
        let mut x = ZERO_VEC;
        for &v in cell {
            x = tensor::add(&x, &self.vertices[v]);
        }
        tensor::scale(&x, 1.0 / cell.len() as f64)
    }

    pub fn cell_map(&self, c: usize) -> AffineMap {
        let cell = self.cell(c);
        let v0 = self.vertices[cell[0]];
        let axes: Vec<usize> = match self.kind {
            CellKind::Triangle => vec![cell[1], cell[2]],
            CellKind::Quad => vec![cell[1], cell[3]],
            CellKind::Tetrahedron => vec![cell[1], cell[2], cell[3]],
        };
        let mut jac = ZERO_MAT;
        for (col, &v) in axes.iter().enumerate() {
            let e = tensor::sub(&self.vertices[v], &v0);
            for row in 0..self.dim {
                jac[row][col] = e[row];
            }
        }
        let det = tensor::det(&jac, self.dim);
        let inverse = tensor::inverse(&jac, self.dim).unwrap_or(ZERO_MAT);
        AffineMap { origin: v0, jacobian: jac, inverse, det, dim: self.dim }
    }

    fn check_parallelogram(&self, c: usize) -> Result<()> {
        let cell = self.cell(c);
        let v = |i: usize| self.vertices[cell[i]];
        let predicted = tensor::sub(&tensor::add(&v(1), &v(3)), &v(0));
        let gap = tensor::norm(&tensor::sub(&predicted, &v(2)));
        if gap > 1e-10 * self.cell_diameter(c) {
            return Err(Error::InvalidMesh(format!("quad cell {c} is not a parallelogram")));
        }
        Ok(())
    }
}

fn scale_of(vertices: &[Vector], cell: &[usize]) -> f64 {
    let p0 = vertices[cell[0]];
    cell.iter()
        .map(|&v| tensor::norm(&tensor::sub(&vertices[v], &p0)))
        .fold(0.0, f64::max)
}

fn signed_measure(kind: CellKind, vertices: &[Vector], cell: &[usize]) -> f64 {
    let p = |i: usize| vertices[cell[i]];
    match kind {
        CellKind::Triangle => {
            let a = tensor::sub(&p(1), &p(0));
            let b = tensor::sub(&p(2), &p(0));
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        CellKind::Quad => {
            // shoelace
            let mut s = 0.0;
            for i in 0..4 {
                let (a, b) = (p(i), p((i + 1) % 4));
                s += a[0] * b[1] - b[0] * a[1];
            }
            0.5 * s
        }
        CellKind::Tetrahedron => {
            let a = tensor::sub(&p(1), &p(0));
            let b = tensor::sub(&p(2), &p(0));
            let c = tensor::sub(&p(3), &p(0));
            tensor::dot(&a, &tensor::cross(&b, &c)) / 6.0
        }
    }
}

fn reorient(kind: CellKind, cell: &mut [usize]) {
    match kind {
        CellKind::Triangle | CellKind::Tetrahedron => cell.swap(1, 2),
        CellKind::Quad => cell.swap(1, 3),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("cells per axis must be at least 1".into()));
    }
    Ok(())
}

fn grid_coord(b: &BoundingBox, a: usize, i: usize, n: usize) -> f64 {
    if i == n {
        b.max[a]
    } else {
        b.min[a] + (b.max[a] - b.min[a]) * i as f64 / n as f64
    }
}

fn grid_vertices_2d(n: usize, b: &BoundingBox) -> Vec<Vector> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push([grid_coord(b, 0, i, n), grid_coord(b, 1, j, n), 0.0]);
        }
    }
    v
}

/// `n x n` squares, each cut along its lower-left to upper-right diagonal.
pub fn build_uniform_tri(n: usize, domain: BoundingBox) -> Result<Mesh> {
    check_n(n)?;
    let vertices = grid_vertices_2d(n, &domain);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    Mesh::new(CellKind::Triangle, vertices, cells, domain)
}

pub fn build_uniform_quad(n: usize, domain: BoundingBox) -> Result<Mesh> {
    check_n(n)?;
    let vertices = grid_vertices_2d(n, &domain);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.extend_from_slice(&[id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(CellKind::Quad, vertices, cells, domain)
}

/// Kuhn split of an `n^3` cube grid: six tetrahedra per cube, all sharing
/// the main diagonal.
pub fn build_uniform_tet(n: usize, domain: BoundingBox) -> Result<Mesh> {
    check_n(n)?;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([
                    grid_coord(&domain, 0, i, n),
                    grid_coord(&domain, 1, j, n),
                    grid_coord(&domain, 2, k, n),
                ]);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut pos = [i, j, k];
                    cells.push(id(pos[0], pos[1], pos[2]));
                    for axis in perm {
                        pos[axis] += 1;
                        cells.push(id(pos[0], pos[1], pos[2]));
                    }
                }
            }
        }
    }
    Mesh::new(CellKind::Tetrahedron, vertices, cells, domain)
}

/// Red refinement: every triangle is split into four similar children by
/// joining its edge midpoints.
pub fn refine_red(mesh: &Mesh) -> Result<Mesh> {
    if mesh.kind() != CellKind::Triangle {
        return Err(Error::InvalidInput("red refinement is only implemented for triangle meshes".into()));
    }
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vector>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let m = tensor::scale(&tensor::add(&vertices[a], &vertices[b]), 0.5);
            vertices.push(m);
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(4 * mesh.cells.len());
    for cell in mesh.cells() {
        let (v0, v1, v2) = (cell[0], cell[1], cell[2]);
        let m01 = mid(v0, v1, &mut vertices);
        let m12 = mid(v1, v2, &mut vertices);
        let m20 = mid(v2, v0, &mut vertices);
        cells.extend_from_slice(&[v0, m01, m20, m01, v1, m12, m20, m12, v2, m01, m12, m20]);
    }
    Mesh::new(CellKind::Triangle, vertices, cells, mesh.domain_box)
}

/// Parses the whitespace separated mesh format:
///
/// ```text
/// dim 2 kind tri
/// vertices 4
/// -1 -1
/// ...
/// cells 2
/// 0 1 2
/// ...
/// ```
///
/// Lines starting with `#` are ignored. The domain box is the bounding box of
/// the vertices.
pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: &str| Error::MeshParse { line, msg: msg.to_string() };

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty mesh file"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != "dim" || tok[2] != "kind" {
        return Err(err(ln, "expected `dim <2|3> kind <tri|quad|tet>`"));
    }
    let dim: usize = tok[1].parse().map_err(|_| err(ln, "bad dimension"))?;
    let kind = CellKind::from_keyword(tok[3]).ok_or_else(|| err(ln, "unknown cell kind"))?;
    if kind.dim() != dim {
        return Err(err(ln, "cell kind does not match dimension"));
    }

    let mut count = |name: &str| -> Result<usize> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing `{name}` section")))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 2 || tok[0] != name {
            return Err(err(ln, &format!("expected `{name} <count>`")));
        }
        tok[1].parse().map_err(|_| err(ln, "bad count"))
    };
    let nv = count("vertices")?;
    let mut line_of_vertex = Vec::with_capacity(nv);
    let mut vertices = Vec::with_capacity(nv);
    let mut body = Vec::new();
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of vertex list"))?;
        body.clear();
        for t in l.split_whitespace() {
            body.push(t.parse::<f64>().map_err(|_| err(ln, "bad coordinate"))?);
        }
        if body.len() != dim {
            return Err(err(ln, &format!("expected {dim} coordinates")));
        }
        let mut x = ZERO_VEC;
        x[..dim].copy_from_slice(&body);
        vertices.push(x);
        line_of_vertex.push(ln);
    }
    let (ln, l) = lines.next().ok_or_else(|| err(0, "missing `cells` section"))?;
    let tok: Vec<&str> = l.split_whitespace().collect();
    if tok.len() != 2 || tok[0] != "cells" {
        return Err(err(ln, "expected `cells <count>`"));
    }
    let nc: usize = tok[1].parse().map_err(|_| err(ln, "bad count"))?;
    let npc = kind.n_vertices();
    let mut cells = Vec::with_capacity(nc * npc);
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of cell list"))?;
        let mut cell = Vec::with_capacity(npc);
        for t in l.split_whitespace() {
            let v: usize = t.parse().map_err(|_| err(ln, "bad vertex index"))?;
            if v >= nv {
                return Err(err(ln, &format!("vertex index {v} out of range")));
            }
            cell.push(v);
        }
        if cell.len() != npc {
            return Err(err(ln, &format!("expected {npc} vertex indices")));
        }
        let signed = signed_measure(kind, &vertices, &cell);
        if signed.abs() <= 1e-14 * scale_of(&vertices, &cell).powi(dim as i32) {
            return Err(err(ln, "cell has zero measure"));
        }
        let mut key = cell.clone();
        key.sort_unstable();
        if let Some(prev) = seen.insert(key, ln) {
            return Err(err(ln, &format!("duplicate of the cell on line {prev}")));
        }
        cells.extend_from_slice(&cell);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after cell list"));
    }
    let domain_box = BoundingBox::from_points(&vertices, dim);
    Mesh::new(kind, vertices, cells, domain_box).map_err(|e| match e {
        Error::InvalidMesh(msg) => Error::MeshParse { line: 0, msg },
        other => other,
    })
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim {} kind {}", mesh.dim, mesh.kind.keyword());
    let _ = writeln!(s, "vertices {}", mesh.n_vertices());
    for v in &mesh.vertices {
        let coords: Vec<String> = v[..mesh.dim].iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    let _ = writeln!(s, "cells {}", mesh.n_cells());
    for c in mesh.cells() {
        let ids: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}

#[derive(Clone, Debug)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub measure: f64,
    /// Unit normal pointing out of `plus_cell`.
    pub normal: Vector,
    pub plus_cell: usize,
    pub plus_local_face: usize,
    pub minus_cell: Option<usize>,
    pub minus_local_face: Option<usize>,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.minus_cell.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct FaceTopology {
    pub faces: Vec<Face>,
    pub interior_count: usize,
    pub boundary_count: usize,
}

impl FaceTopology {
    pub fn interior(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.is_interior())
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| !f.is_interior())
    }
}

/// Matches local faces by vertex set. Faces appear in order of first
/// occurrence; the lower-numbered incident cell is the plus side.
pub fn build_face_topology(mesh: &Mesh) -> Result<FaceTopology> {
    let kind = mesh.kind();
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut faces: Vec<Face> = Vec::new();
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        for (lf, local) in kind.local_faces().iter().enumerate() {
            let verts: Vec<usize> = local.iter().map(|&i| cell[i]).collect();
            let mut key = [usize::MAX; 3];
            key[..verts.len()].copy_from_slice(&verts);
            key.sort_unstable();
            match index.get(&key) {
                Some(&f) => {
                    let face = &mut faces[f];
                    if face.minus_cell.is_some() {
                        return Err(Error::InvalidMesh(format!(
                            "face {:?} is shared by more than two cells",
                            face.vertices
                        )));
                    }
                    face.minus_cell = Some(c);
                    face.minus_local_face = Some(lf);
                }
                None => {
                    let (measure, mut normal) = face_geometry(mesh, &verts);
                    let centroid = face_centroid(mesh, &verts);
                    let outward = tensor::sub(&centroid, &mesh.cell_centroid(c));
                    if tensor::dot(&normal, &outward) < 0.0 {
                        normal = tensor::scale(&normal, -1.0);
                    }
                    index.insert(key, faces.len());
                    faces.push(Face {
                        vertices: verts,
                        measure,
                        normal,
                        plus_cell: c,
                        plus_local_face: lf,
                        minus_cell: None,
                        minus_local_face: None,
                    });
                }
            }
        }
    }
    let interior_count = faces.iter().filter(|f| f.is_interior()).count();
    let boundary_count = faces.len() - interior_count;
    Ok(FaceTopology { faces, interior_count, boundary_count })
}

fn face_centroid(mesh: &Mesh, verts: &[usize]) -> Vector {
    let mut x = ZERO_VEC;
    for &v in verts {
        x = tensor::add(&x, &mesh.vertices[v]);
    }
    tensor::scale(&x, 1.0 / verts.len() as f64)
}

fn face_geometry(mesh: &Mesh, verts: &[usize]) -> (f64, Vector) {
    let p = |i: usize| mesh.vertices[verts[i]];
    if verts.len() == 2 {
        let t = tensor::sub(&p(1), &p(0));
        let len = tensor::norm(&t);
        (len, [t[1] / len, -t[0] / len, 0.0])
    } else {
        let c = tensor::cross(&tensor::sub(&p(1), &p(0)), &tensor::sub(&p(2), &p(0)));
        let n = tensor::norm(&c);
        (0.5 * n, tensor::scale(&c, 1.0 / n))
    }
}
