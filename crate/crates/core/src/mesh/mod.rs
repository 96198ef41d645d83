//! Polygonal meshes: data model, generators, per-element geometry, regularity
//! checks and a plain-text file format.
//!
//! Cells are stored as counter-clockwise vertex loops. The edge table is
//! derived from the cells; every edge carries a globally fixed orientation
//! (its unit normal points from `cells[0]` into `cells[1]`, or outward on the
//! boundary) which the virtual element space uses to make normal traces
//! single valued.

mod generate;
mod geometry;
mod io;
mod validate;

pub use generate::{generate_mesh, generate_mesh_seeded, MeshFamily, DEFAULT_MESH_SEED};
pub use geometry::{element_geometry, ElementGeometry, LocalEdge};
pub use io::{load_mesh, read_mesh, save_mesh, write_mesh, MESH_FORMAT_HEADER};
pub use validate::{validate_mesh, ElementReport, ValidationReport};

use std::collections::HashMap;

use thiserror::Error;

use crate::geom::{signed_area, Rect, Vec2};

/// Marker attached to boundary edges carrying Dirichlet velocity data.
pub const DIRICHLET_MARKER: u32 = 1;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh resolution must be at least 1, got {0}")]
    InvalidResolution(usize),
    #[error("degenerate domain {0:?}")]
    DegenerateDomain(Rect),
    #[error("cell {cell} has {count} vertices; a polygon needs at least 3")]
    TooFewVertices { cell: usize, count: usize },
    #[error("cell {cell} references vertex {vertex}, but the mesh has {n_vertices} vertices")]
    VertexOutOfRange {
        cell: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("cell {cell} is not counter-clockwise (signed area {area:e})")]
    Orientation { cell: usize, area: f64 },
    #[error("cell {cell} repeats vertex {vertex}")]
    RepeatedVertex { cell: usize, vertex: usize },
    #[error("edge ({a}, {b}) is shared by more than two cells")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("edge ({a}, {b}) is traversed in the same direction by cells {c0} and {c1}")]
    InconsistentOrientation { a: usize, b: usize, c0: usize, c1: usize },
    #[error("boundary entry ({a}, {b}) does not name a boundary edge")]
    NotABoundaryEdge { a: usize, b: usize },
    #[error("cell id {0} out of range")]
    CellOutOfRange(usize),
    #[error("mesh has no cells")]
    Empty,
    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MeshError> = std::result::Result<T, E>;

/// A mesh edge. `vertices` is ordered as traversed by `cells[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Lower-id adjacent cell first; the second entry is `None` on the boundary.
    pub cells: [Option<usize>; 2],
    /// Boundary marker; `0` for interior edges.
    pub marker: u32,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells[1].is_none()
    }

    /// `+1` if the global normal of this edge is the outward normal of `cell`.
    pub fn orientation_for(&self, cell: usize) -> f64 {
        if self.cells[0] == Some(cell) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Reference from a cell to one of its edges; local edge `i` runs from cell
/// vertex `i` to vertex `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge {
    pub edge: usize,
    /// `+1.0` when the cell's outward normal agrees with the edge's global normal.
    pub sign: f64,
}

/// An immutable polygonal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Vec2>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<CellEdge>>,
    domain: Rect,
}

impl PolyMesh {
    /// Builds the edge table and checks orientation and manifoldness. All
    /// boundary edges receive [`DIRICHLET_MARKER`].
    pub fn new(vertices: Vec<Vec2>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_boundary_markers(vertices, cells, &[])
    }

    /// Like [`PolyMesh::new`], overriding the marker of the listed boundary
    /// edges (given as unordered vertex pairs).
    pub fn with_boundary_markers(
        vertices: Vec<Vec2>,
        cells: Vec<Vec<usize>>,
        markers: &[(usize, usize, u32)],
    ) -> Result<Self> {
        let nv = vertices.len();
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::TooFewVertices {
                    cell: c,
                    count: cell.len(),
                });
            }
            let mut seen = cell.clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(MeshError::RepeatedVertex {
                        cell: c,
                        vertex: w[0],
                    });
                }
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::VertexOutOfRange {
                    cell: c,
                    vertex: v,
                    n_vertices: nv,
                });
            }
            let poly: Vec<Vec2> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&poly);
            if area.is_nan() || area <= 0.0 {
                return Err(MeshError::Orientation { cell: c, area });
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = Vec::with_capacity(cell.len());
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(CellEdge {
                            edge: edges.len(),
                            sign: 1.0,
                        });
                        edges.push(Edge {
                            vertices: [a, b],
                            cells: [Some(c), None],
                            marker: DIRICHLET_MARKER,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.cells[1].is_some() {
                            return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                        }
                        let c0 = edge.cells[0].expect("first cell always set");
                        if edge.vertices[0] == a {
                            return Err(MeshError::InconsistentOrientation {
                                a,
                                b,
                                c0,
                                c1: c,
                            });
                        }
                        // Cells are visited in increasing id order, so c0 < c.
                        edge.cells[1] = Some(c);
                        edge.marker = 0;
                        local.push(CellEdge { edge: e, sign: -1.0 });
                    }
                }
            }
            cell_edges.push(local);
        }

        for &(a, b, marker) in markers {
            match lookup.get(&(a.min(b), a.max(b))) {
                Some(&e) if edges[e].is_boundary() => edges[e].marker = marker,
                _ => return Err(MeshError::NotABoundaryEdge { a, b }),
            }
        }

        let domain = bounding_box(&vertices);
        Ok(PolyMesh {
            vertices,
            cells,
            edges,
            cell_edges,
            domain,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &[usize] {
        &self.cells[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cell_edges(&self, id: usize) -> &[CellEdge] {
        &self.cell_edges[id]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    /// Bounding box of the vertex set.
    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// Vertex coordinates of a cell in CCW order.
    pub fn cell_polygon(&self, id: usize) -> Vec<Vec2> {
        self.cells[id].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn geometry(&self, id: usize) -> Result<ElementGeometry> {
        element_geometry(self, id)
    }

    /// Geometry for every cell, in cell order.
    pub fn all_geometry(&self) -> Vec<ElementGeometry> {
        (0..self.n_cells())
            .map(|c| element_geometry(self, c).expect("cell id in range"))
            .collect()
    }

    /// Mesh size `h = max_E h_E`.
    pub fn mesh_size(&self) -> f64 {
        self.all_geometry()
            .iter()
            .map(|g| g.diameter)
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| signed_area(&self.cell_polygon(c)))
            .sum()
    }
}

fn bounding_box(vertices: &[Vec2]) -> Rect {
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        min.x = min.x.min(v.x);
        min.y = min.y.min(v.y);
        max.x = max.x.max(v.x);
        max.y = max.y.max(v.y);
    }
    Rect { min, max }
}
