use super::{ElementGeometry, PolyMesh};

/// Regularity figures of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementReport {
    pub cell: usize,
    /// `min_e h_e / h_E`.
    pub edge_ratio: f64,
    /// Smallest signed distance from the centroid to an edge line, over `h_E`.
    /// The centroid-centred disc of radius `star_radius * h_E` lies in the
    /// kernel of the polygon.
    pub star_radius: f64,
}

/// Outcome of [`validate_mesh`]. Violations are listed, never fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub edge_ratio_bound: f64,
    pub star_bound: f64,
    pub min_edge_ratio: f64,
    pub min_star_radius: f64,
    /// Cells with `min_e h_e < c h_E`.
    pub edge_ratio_violations: Vec<usize>,
    /// Cells not star-shaped with respect to the disc of radius `η h_E`
    /// around their centroid.
    pub star_violations: Vec<usize>,
    pub elements: Vec<ElementReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.edge_ratio_violations.is_empty() && self.star_violations.is_empty()
    }
}

pub(crate) fn element_report(g: &ElementGeometry) -> ElementReport {
    let min_edge = g.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    // A disc lies in the kernel iff it lies on the inner side of every edge line.
    let min_dist = g
        .edges
        .iter()
        .map(|e| (e.start - g.centroid).dot(e.normal))
        .fold(f64::INFINITY, f64::min);
    ElementReport {
        cell: g.cell,
        edge_ratio: min_edge / g.diameter,
        star_radius: min_dist / g.diameter,
    }
}

/// Checks the two mesh regularity conditions with constants `c` (edge length
/// ratio) and `eta` (star-shapedness radius ratio), using the centroid as the
/// candidate star centre.
pub fn validate_mesh(mesh: &PolyMesh, c: f64, eta: f64) -> ValidationReport {
    let elements: Vec<ElementReport> = mesh.all_geometry().iter().map(element_report).collect();
    let edge_ratio_violations = elements
        .iter()
        .filter(|r| r.edge_ratio < c)
        .map(|r| r.cell)
        .collect();
    let star_violations = elements
        .iter()
        .filter(|r| r.star_radius < eta)
        .map(|r| r.cell)
        .collect();
    ValidationReport {
        edge_ratio_bound: c,
        star_bound: eta,
        min_edge_ratio: elements.iter().map(|r| r.edge_ratio).fold(f64::INFINITY, f64::min),
        min_star_radius: elements.iter().map(|r| r.star_radius).fold(f64::INFINITY, f64::min),
        edge_ratio_violations,
        star_violations,
        elements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rect, Vec2};
    use crate::mesh::{generate_mesh, MeshFamily};

    #[test]
    fn square_mesh_edge_ratio() {
        let m = generate_mesh(MeshFamily::Squares, 5, Rect::unit_square()).unwrap();
        let r = validate_mesh(&m, 0.1, 0.1);
        assert!((r.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        for e in &r.elements {
            assert!((e.edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        }
        assert!(r.passed());
    }

    #[test]
    fn triangles_are_star_shaped_about_centroid() {
        let m = generate_mesh(MeshFamily::Triangles, 6, Rect::unit_square()).unwrap();
        let r = validate_mesh(&m, 0.1, 0.05);
        assert!(r.star_violations.is_empty());
        assert!(r.min_star_radius > 0.0);
    }

    #[test]
    fn sliver_is_flagged() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1e-4),
            Vec2::new(0.0, 1e-4),
        ];
        let m = PolyMesh::new(v, vec![vec![0, 1, 2, 3]]).unwrap();
        let r = validate_mesh(&m, 0.1, 0.1);
        assert_eq!(r.edge_ratio_violations, vec![0]);
        assert_eq!(r.star_violations, vec![0]);
        assert!(!r.passed());
    }

    #[test]
    fn all_families_are_star_shaped() {
        for fam in MeshFamily::ALL {
            let m = generate_mesh(fam, 12, Rect::unit_square()).unwrap();
            let r = validate_mesh(&m, 1e-3, 1e-3);
            assert!(r.star_violations.is_empty(), "{fam}: {:?}", r.star_violations);
        }
    }
}
