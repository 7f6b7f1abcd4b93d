#![allow(dead_code)]

use elastodg::forms::{assemble_system, AssembledSystem, MaterialParams, StabilizationParams};
use elastodg::mesh::{build_face_topology, build_uniform_tet, build_uniform_tri, BoundingBox, FaceTopology, Mesh};
use elastodg::spaces::{build_dofmap, DofMap, FieldCoeffs};
use elastodg::tensor::Vector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub struct Setup {
    pub mesh: Mesh,
    pub topo: FaceTopology,
    pub dofmap: DofMap,
}

pub fn tri(n: usize, k: usize, l: usize) -> Setup {
    with_mesh(build_uniform_tri(n, BoundingBox::square(-1.0, 1.0)).unwrap(), k, l)
}

pub fn tet(n: usize, k: usize, l: usize) -> Setup {
    with_mesh(build_uniform_tet(n, BoundingBox::cube(0.0, 1.0)).unwrap(), k, l)
}

pub fn with_mesh(mesh: Mesh, k: usize, l: usize) -> Setup {
    let topo = build_face_topology(&mesh).unwrap();
    let dofmap = build_dofmap(&mesh, k, l).unwrap();
    Setup { mesh, topo, dofmap }
}

pub fn material(dim: usize) -> MaterialParams {
    MaterialParams::new(0.3, 0.35, dim).unwrap()
}

impl Setup {
    pub fn assemble(&self, stab: &StabilizationParams, load: impl Fn(&Vector) -> Vector + Sync) -> AssembledSystem {
        assemble_system(&self.mesh, &self.topo, &self.dofmap, &material(self.mesh.dim()), stab, load).unwrap()
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_coeffs(rng: &mut StdRng, dofmap: &DofMap) -> FieldCoeffs {
    FieldCoeffs { values: random_vec(rng, dofmap.total_dofs()) }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
