//! Scaled monomial bases, quadrature on edges and polygons, and L2
//! projections onto local polynomial spaces.

mod monomial;
mod projection;
mod quadrature;

pub use monomial::{BasisOwner, ScaledMonomialBasis};
pub use projection::{l2_project, mass_matrix, PolynomialField, ProjectionError};
pub use quadrature::{
    ear_clip, edge_rule, gauss_legendre, polygon_rule, sub_triangulation, triangle_rule, GeometryError,
    QuadratureRule,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::mesh::{generate_mesh, MeshFamily};
    use rand::{Rng, SeedableRng};

    /// x²y² on non-convex chevron cells against a Monte Carlo estimate and a
    /// refined fan (each fan triangle split into four).
    #[test]
    fn nonconvex_cell_two_oracles() {
        let mesh = generate_mesh(MeshFamily::NonConvex, 4, Rect::unit_square()).unwrap();
        let g = mesh
            .all_geometry()
            .into_iter()
            .find(|g| {
                let n = g.vertices.len();
                (0..n).any(|i| {
                    let (a, b, c) = (g.vertices[(i + n - 1) % n], g.vertices[i], g.vertices[(i + 1) % n]);
                    (b - a).cross(c - b) < 0.0
                })
            })
            .expect("chevron mesh has a non-convex cell");
        let f = |p: crate::geom::Vec2| p.x * p.x * p.y * p.y;
        let q = polygon_rule(&g, 4).unwrap().integrate(f);

        let mut refined = 0.0;
        for [a, b, c] in sub_triangulation(&g).unwrap() {
            let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
            for [p, r, s] in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                refined += triangle_rule(p, r, s, 4).integrate(f);
            }
        }
        assert!((q - refined).abs() < 1e-12);

        // Monte Carlo: uniform samples in the bounding box, ray-cast membership.
        let (mut lo, mut hi) = (g.vertices[0], g.vertices[0]);
        for p in &g.vertices {
            lo = crate::geom::Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = crate::geom::Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let inside = |p: crate::geom::Vec2| {
            let n = g.vertices.len();
            let mut c = false;
            for i in 0..n {
                let (a, b) = (g.vertices[i], g.vertices[(i + 1) % n]);
                if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x) {
                    c = !c;
                }
            }
            c
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let samples = 10_000_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let p = crate::geom::Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if inside(p) {
                sum += f(p);
            }
        }
        let mc = sum * (hi.x - lo.x) * (hi.y - lo.y) / samples as f64;
        assert!((q - mc).abs() < 1e-4, "{q} vs {mc}");
    }
}
