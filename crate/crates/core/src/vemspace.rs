//! The lowest-order tensorial H(div) virtual element space.
//!
//! A tensor field is described by its edge normal moments: for every edge `e`
//! and row `r`, the value `∫_e (τ n_e)_r` with `n_e` the global edge normal.
//! Global DOF `2 e + r` stores that moment. Inside an element, local DOF
//! `2 i + r` refers to local edge `i` with the element's outward normal, so
//! local and global values differ by the sign of [`CellEdge`].
//!
//! [`CellEdge`]: crate::mesh::CellEdge

use thiserror::Error;

use crate::geom::{Tensor2, Vec2};
use crate::mesh::{ElementGeometry, MeshError, PolyMesh};
use crate::polybasis::edge_rule;

/// Edge quadrature degree used by [`interpolate_tensor`].
pub const INTERPOLATION_EDGE_DEGREE: usize = 6;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("unsupported polynomial degree k = {0}; only k = 0 is implemented")]
    UnsupportedDegree(usize),
    #[error("field has {found} DOFs but the mesh needs {expected}")]
    DofMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Per-element map from local DOFs to signed global DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDofSet {
    pub cell: usize,
    pub degree: usize,
    /// Global edge id of each local edge.
    pub edges: Vec<usize>,
    /// `+1` where the element's outward normal equals the global normal.
    pub signs: Vec<f64>,
}

impl LocalDofSet {
    pub fn new(mesh: &PolyMesh, cell: usize, degree: usize) -> Result<Self, VemError> {
        if degree != 0 {
            return Err(VemError::UnsupportedDegree(degree));
        }
        if cell >= mesh.n_cells() {
            return Err(MeshError::CellOutOfRange(cell).into());
        }
        let ce = mesh.cell_edges(cell);
        Ok(LocalDofSet {
            cell,
            degree,
            edges: ce.iter().map(|e| e.edge).collect(),
            signs: ce.iter().map(|e| e.sign).collect(),
        })
    }

    /// `N_E = 2 · #edges`.
    pub fn len(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Global index and sign of local DOF `2 i + r`.
    pub fn global(&self, local: usize) -> (usize, f64) {
        let i = local / 2;
        (2 * self.edges[i] + local % 2, self.signs[i])
    }
}

/// Global DOF vector of a tensor field in the virtual space.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualTensorField {
    pub values: Vec<f64>,
}

impl VirtualTensorField {
    pub fn zeros(mesh: &PolyMesh) -> Self {
        VirtualTensorField {
            values: vec![0.0; 2 * mesh.n_edges()],
        }
    }

    pub fn from_values(mesh: &PolyMesh, values: Vec<f64>) -> Result<Self, VemError> {
        let expected = 2 * mesh.n_edges();
        if values.len() != expected {
            return Err(VemError::DofMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(VirtualTensorField { values })
    }

    /// Outward-signed local DOF values of `dofs.cell`.
    pub fn local(&self, dofs: &LocalDofSet) -> Vec<f64> {
        (0..dofs.len())
            .map(|l| {
                let (g, s) = dofs.global(l);
                s * self.values[g]
            })
            .collect()
    }
}

/// One constant vector per element (the discontinuous velocity space at k = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseVectorField {
    pub values: Vec<Vec2>,
}

impl PiecewiseVectorField {
    pub fn zeros(mesh: &PolyMesh) -> Self {
        PiecewiseVectorField {
            values: vec![Vec2::ZERO; mesh.n_cells()],
        }
    }

    pub fn cell(&self, id: usize) -> Vec2 {
        self.values[id]
    }
}

/// Local operators of one element acting on its outward-signed DOF values.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperators {
    pub geom: ElementGeometry,
    pub dofs: LocalDofSet,
    /// Row `(r, c)` in order 11, 12, 21, 22; `pi[rc][j]` is the contribution
    /// of local DOF `j` to `(Π τ)_{rc}`.
    pub pi: [Vec<f64>; 4],
}

impl LocalOperators {
    pub fn new(mesh: &PolyMesh, cell: usize) -> Result<Self, VemError> {
        let dofs = LocalDofSet::new(mesh, cell, 0)?;
        let geom = mesh.geometry(cell)?;
        Ok(Self::from_parts(geom, dofs))
    }

    pub fn from_parts(geom: ElementGeometry, dofs: LocalDofSet) -> Self {
        let n = dofs.len();
        let mut pi: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
        let inv_area = 1.0 / geom.area;
        for (i, e) in geom.edges.iter().enumerate() {
            // Mean of x_c - x_{E,c} over the edge, times 1/|E|.
            let m = (e.midpoint - geom.centroid) * inv_area;
            for r in 0..2 {
                pi[2 * r][2 * i + r] = m.x;
                pi[2 * r + 1][2 * i + r] = m.y;
            }
        }
        LocalOperators { geom, dofs, pi }
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// `Π τ_h` for local DOF values `v`.
    pub fn project(&self, v: &[f64]) -> Tensor2 {
        Tensor2::from_flat(std::array::from_fn(|k| {
            self.pi[k].iter().zip(v).map(|(p, x)| p * x).sum()
        }))
    }

    /// Row-wise divergence, constant on the element.
    pub fn divergence(&self, v: &[f64]) -> Vec2 {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..v.len() / 2 {
            a += v[2 * i];
            b += v[2 * i + 1];
        }
        Vec2::new(a, b) * (1.0 / self.geom.area)
    }

    /// Local DOF values of a constant tensor.
    pub fn dofs_of_constant(&self, c: &Tensor2) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for (i, e) in self.geom.edges.iter().enumerate() {
            let flux = c.apply(e.normal) * e.length;
            out[2 * i] = flux.x;
            out[2 * i + 1] = flux.y;
        }
        out
    }

    /// Matrix of `τ ↦ dofs(Π τ)`, row-major `N_E × N_E`.
    pub fn pi_dof_matrix(&self) -> Vec<f64> {
        let n = self.n_dofs();
        let mut m = vec![0.0; n * n];
        for (i, e) in self.geom.edges.iter().enumerate() {
            let hn = e.normal * e.length;
            for r in 0..2 {
                let row = 2 * i + r;
                for j in 0..n {
                    m[row * n + j] = hn.x * self.pi[2 * r][j] + hn.y * self.pi[2 * r + 1][j];
                }
            }
        }
        m
    }

    /// Coefficients of `τ ↦ ∫_E tr τ_h = |E| tr(Π τ_h)`.
    pub fn trace_row(&self) -> Vec<f64> {
        (0..self.n_dofs())
            .map(|j| self.geom.area * (self.pi[0][j] + self.pi[3][j]))
            .collect()
    }
}

/// Interpolant of an analytic tensor field: every DOF is `∫_e (σ n_e)_r`,
/// integrated with a rule of degree [`INTERPOLATION_EDGE_DEGREE`].
pub fn interpolate_tensor(mesh: &PolyMesh, sigma: impl Fn(Vec2) -> Tensor2) -> VirtualTensorField {
    interpolate_tensor_with_degree(mesh, sigma, INTERPOLATION_EDGE_DEGREE)
}

pub fn interpolate_tensor_with_degree(
    mesh: &PolyMesh,
    sigma: impl Fn(Vec2) -> Tensor2,
    degree: usize,
) -> VirtualTensorField {
    let verts = mesh.vertices();
    let mut values = vec![0.0; 2 * mesh.n_edges()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let (a, b) = (verts[edge.vertices[0]], verts[edge.vertices[1]]);
        let t = b - a;
        let n = t.rot_cw() * (1.0 / t.norm());
        let mut flux = Vec2::ZERO;
        for (p, w) in edge_rule(a, b, degree).iter() {
            flux += sigma(p).apply(n) * w;
        }
        values[2 * e] = flux.x;
        values[2 * e + 1] = flux.y;
    }
    VirtualTensorField { values }
}

pub fn div_from_dofs(field: &VirtualTensorField, mesh: &PolyMesh, cell: usize) -> Result<Vec2, VemError> {
    let ops = LocalOperators::new(mesh, cell)?;
    Ok(ops.divergence(&field.local(&ops.dofs)))
}

pub fn pi_projection(field: &VirtualTensorField, mesh: &PolyMesh, cell: usize) -> Result<Tensor2, VemError> {
    let ops = LocalOperators::new(mesh, cell)?;
    Ok(ops.project(&field.local(&ops.dofs)))
}

/// `∫_E tr τ_h`.
pub fn trace_integral(field: &VirtualTensorField, mesh: &PolyMesh, cell: usize) -> Result<f64, VemError> {
    let ops = LocalOperators::new(mesh, cell)?;
    Ok(ops.geom.area * ops.project(&field.local(&ops.dofs)).trace())
}
