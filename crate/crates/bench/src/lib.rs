//! Shared fixtures for the criterion benches.

use elastodg::forms::{assemble_system, AssembledSystem, StabilizationParams};
use elastodg::mesh::{build_face_topology, build_uniform_tet, build_uniform_tri, FaceTopology, Mesh};
use elastodg::spaces::{build_dofmap, DofMap};
use elastodg::verify::{case_2d_poly, case_3d_sine, ManufacturedCase};

/// Everything needed to assemble one level.
pub struct Fixture {
    pub case: ManufacturedCase,
    pub mesh: Mesh,
    pub topo: FaceTopology,
    pub dofmap: DofMap,
    pub stab: StabilizationParams,
}

impl Fixture {
    /// The 2D polynomial case on `n × n` squares split into triangles.
    pub fn tri(n: usize, k: usize) -> Self {
        let case = case_2d_poly();
        let mesh = build_uniform_tri(n, case.domain).expect("valid level");
        Self::finish(case, mesh, k)
    }

    /// The 3D sine case on `n³` cubes, six tetrahedra each.
    pub fn tet(n: usize, k: usize) -> Self {
        let case = case_3d_sine();
        let mesh = build_uniform_tet(n, case.domain).expect("valid level");
        Self::finish(case, mesh, k)
    }

    fn finish(case: ManufacturedCase, mesh: Mesh, k: usize) -> Self {
        let topo = build_face_topology(&mesh).expect("conforming mesh");
        let dofmap = build_dofmap(&mesh, k, k).expect("k = l");
        Self { case, mesh, topo, dofmap, stab: StabilizationParams::default() }
    }

    pub fn assemble(&self) -> AssembledSystem {
        let load = self.case.load;
        assemble_system(&self.mesh, &self.topo, &self.dofmap, &self.case.mat, &self.stab, load).expect("assembly")
    }
}
