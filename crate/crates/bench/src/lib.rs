//! Shared fixtures for the pipeline benchmarks.

use pseudovem::{assemble, build_case, generate_mesh, AssemblyOptions, CaseTag, MeshFamily, OseenCase, Overrides, PolyMesh, SaddleSystem};

/// Test 1 on its own domain with a mesh of the given family and resolution.
pub fn fixture(family: MeshFamily, n: usize) -> (PolyMesh, OseenCase) {
    let case = build_case(CaseTag::Test1, Overrides::default()).expect("built-in case");
    let mesh = generate_mesh(family, n, case.domain).expect("valid resolution");
    (mesh, case)
}

pub fn assembled(family: MeshFamily, n: usize) -> (PolyMesh, OseenCase, SaddleSystem) {
    let (mesh, case) = fixture(family, n);
    let system = assemble(&mesh, &case, AssemblyOptions::default()).expect("assembly");
    (mesh, case, system)
}
