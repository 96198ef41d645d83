use crate::geom::Vec2;

use super::{MeshError, PolyMesh, Result};

/// Geometry of local edge `i` of an element, running from vertex `i` to `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEdge {
    pub start: Vec2,
    pub end: Vec2,
    pub length: f64,
    pub midpoint: Vec2,
    /// Outward unit normal with respect to the element.
    pub normal: Vec2,
}

impl LocalEdge {
    pub fn from_endpoints(start: Vec2, end: Vec2) -> Self {
        let t = end - start;
        let length = t.norm();
        LocalEdge {
            start,
            end,
            length,
            midpoint: (start + end) * 0.5,
            normal: t.rot_cw() * (1.0 / length),
        }
    }

    /// Point at arc-length parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> Vec2 {
        self.start + (self.end - self.start) * s
    }
}

/// Area, centroid, diameter and per-edge data of a polygonal element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub cell: usize,
    pub vertices: Vec<Vec2>,
    pub area: f64,
    pub centroid: Vec2,
    /// Maximum pairwise vertex distance.
    pub diameter: f64,
    pub edges: Vec<LocalEdge>,
}

impl ElementGeometry {
    /// Geometry of a free-standing CCW polygon (cell id set to `usize::MAX`).
    pub fn from_polygon(vertices: Vec<Vec2>) -> Self {
        Self::build(usize::MAX, vertices)
    }

    fn build(cell: usize, vertices: Vec<Vec2>) -> Self {
        let n = vertices.len();
        // Moments relative to the first vertex keep cancellation small for
        // elements far from the origin.
        let o = vertices[0];
        let mut a2 = 0.0;
        let mut m = Vec2::ZERO;
        for i in 0..n {
            let p = vertices[i] - o;
            let q = vertices[(i + 1) % n] - o;
            let w = p.cross(q);
            a2 += w;
            m += (p + q) * w;
        }
        let area = 0.5 * a2;
        let centroid = o + m * (1.0 / (3.0 * a2));

        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let edges = (0..n)
            .map(|i| LocalEdge::from_endpoints(vertices[i], vertices[(i + 1) % n]))
            .collect();
        ElementGeometry {
            cell,
            vertices,
            area,
            centroid,
            diameter,
            edges,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// `Σ_e h_e n_e`, which vanishes for a closed polygon.
    pub fn normal_closure(&self) -> Vec2 {
        self.edges
            .iter()
            .fold(Vec2::ZERO, |acc, e| acc + e.normal * e.length)
    }
}

/// Geometry of cell `id` of `mesh`.
pub fn element_geometry(mesh: &PolyMesh, id: usize) -> Result<ElementGeometry> {
    if id >= mesh.n_cells() {
        return Err(MeshError::CellOutOfRange(id));
    }
    Ok(ElementGeometry::build(id, mesh.cell_polygon(id)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)]) -> ElementGeometry {
        ElementGeometry::from_polygon(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    #[test]
    fn unit_square() {
        let g = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(g.area, 1.0);
        assert!((g.centroid - Vec2::new(0.5, 0.5)).norm() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.edges[0].normal, Vec2::new(0.0, -1.0));
        assert_eq!(g.edges[1].normal, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn right_triangle() {
        let g = poly(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(g.area, 0.5);
        assert!((g.centroid - Vec2::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn random_pentagon_matches_fan_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            // Star-shaped pentagon around a random centre with random radii.
            let c = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let pts: Vec<Vec2> = (0..5)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * (k as f64 + rng.gen_range(0.0..0.5)) / 5.0;
                    let r = rng.gen_range(0.5..2.0);
                    c + Vec2::new(th.cos(), th.sin()) * r
                })
                .collect();
            let g = ElementGeometry::from_polygon(pts.clone());
            // Oracle: fan of triangles about the star centre.
            let mut area = 0.0;
            let mut moment = Vec2::ZERO;
            for i in 0..5 {
                let (a, b) = (pts[i], pts[(i + 1) % 5]);
                let t = 0.5 * (a - c).cross(b - c);
                area += t;
                moment += (c + a + b) * (t / 3.0);
            }
            assert!((g.area - area).abs() <= 1e-12 * area);
            assert!((g.centroid - moment * (1.0 / area)).norm() <= 1e-12);
            assert!(g.normal_closure().norm() < 1e-12);
        }
    }
}
