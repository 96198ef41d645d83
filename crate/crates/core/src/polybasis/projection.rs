use faer::prelude::*;
use faer::Side;
use thiserror::Error;

use crate::geom::Vec2;
use crate::mesh::ElementGeometry;

use super::monomial::ScaledMonomialBasis;
use super::quadrature::{polygon_rule, GeometryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cell {cell}: monomial mass matrix is not positive definite")]
    SingularGram { cell: usize },
}

/// `N`-component polynomial on one element, in a scaled monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField<const N: usize> {
    pub basis: ScaledMonomialBasis,
    pub coefficients: Vec<[f64; N]>,
}

impl<const N: usize> PolynomialField<N> {
    pub fn eval(&self, x: Vec2) -> [f64; N] {
        let mut out = [0.0; N];
        for (i, c) in self.coefficients.iter().enumerate() {
            let m = self.basis.eval(i, x);
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * m;
            }
        }
        out
    }
}

/// Monomial mass matrix `M_ij = ∫_E m_i m_j`.
pub fn mass_matrix(geom: &ElementGeometry, basis: &ScaledMonomialBasis, quad_degree: usize) -> Result<Mat<f64>, GeometryError> {
    let rule = polygon_rule(geom, quad_degree)?;
    let n = basis.len();
    let mut m = Mat::<f64>::zeros(n, n);
    let mut vals = vec![0.0; n];
    for (p, w) in rule.iter() {
        basis.eval_all(p, &mut vals);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * vals[i] * vals[j];
            }
        }
    }
    Ok(m)
}

/// L2(E) projection of a pointwise-evaluable field onto polynomials of
/// degree `k`, integrated with a rule of exactness `quad_degree`.
pub fn l2_project<const N: usize>(
    f: impl Fn(Vec2) -> [f64; N],
    geom: &ElementGeometry,
    k: usize,
    quad_degree: usize,
) -> Result<PolynomialField<N>, ProjectionError> {
    let basis = ScaledMonomialBasis::on_element(geom, k);
    let rule = polygon_rule(geom, quad_degree.max(2 * k))?;
    let n = basis.len();
    let mut m = Mat::<f64>::zeros(n, n);
    let mut b = Mat::<f64>::zeros(n, N);
    let mut vals = vec![0.0; n];
    for (p, w) in rule.iter() {
        basis.eval_all(p, &mut vals);
        let fv = f(p);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * vals[i] * vals[j];
            }
            for (c, fc) in fv.iter().enumerate() {
                b[(i, c)] += w * vals[i] * fc;
            }
        }
    }
    let llt = m
        .llt(Side::Lower)
        .map_err(|_| ProjectionError::SingularGram { cell: geom.cell })?;
    let x = llt.solve(&b);
    let coefficients = (0..n).map(|i| std::array::from_fn(|c| x[(i, c)])).collect();
    Ok(PolynomialField { basis, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::mesh::{generate_mesh, MeshFamily};
    use crate::polybasis::polygon_rule;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn pentagon() -> ElementGeometry {
        ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(1.2, 0.1), v(1.5, 0.9), v(0.6, 1.4), v(-0.2, 0.8)])
    }

    #[test]
    fn constants_and_means() {
        let g = pentagon();
        let p = l2_project(|_| [5.0], &g, 0, 4).unwrap();
        assert!((p.coefficients[0][0] - 5.0).abs() < 1e-14);

        let sq = ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)]);
        let p = l2_project(|x| [x.x], &sq, 0, 4).unwrap();
        assert!((p.coefficients[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sin_cos_mean_on_pentagon() {
        let g = pentagon();
        let f = |x: Vec2| x.x.sin() * x.y.cos();
        let p = l2_project(|x| [f(x)], &g, 0, 12).unwrap();
        // Oracle: high-degree quadrature average.
        let rule = polygon_rule(&g, 20).unwrap();
        let mean = rule.integrate(f) / g.area;
        assert!((p.coefficients[0][0] - mean).abs() < 1e-10);
    }

    #[test]
    fn reproduces_polynomials_and_is_idempotent() {
        let g = pentagon();
        for k in 0..=3 {
            let q = |x: Vec2| {
                let mut s = 0.3;
                for a in 0..=k as i32 {
                    for b in 0..=(k as i32 - a) {
                        s += 0.1 * (a + 2 * b + 1) as f64 * x.x.powi(a) * x.y.powi(b);
                    }
                }
                s
            };
            let p = l2_project(|x| [q(x), -2.0 * q(x)], &g, k, 2 * k + 4).unwrap();
            for x in [v(0.3, 0.4), v(1.0, 0.6), g.centroid] {
                let e = p.eval(x);
                assert!((e[0] - q(x)).abs() < 1e-11, "k={k}");
                assert!((e[1] + 2.0 * q(x)).abs() < 1e-11, "k={k}");
            }
            let pp = l2_project(|x| p.eval(x), &g, k, 2 * k + 4).unwrap();
            for (a, b) in p.coefficients.iter().zip(&pp.coefficients) {
                assert!((a[0] - b[0]).abs() < 1e-11 && (a[1] - b[1]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn residual_is_orthogonal_to_basis() {
        let g = pentagon();
        let f = |x: Vec2| (2.0 * x.x).exp() * (x.y * 3.0).sin();
        for k in 0..=2 {
            let p = l2_project(|x| [f(x)], &g, k, 14).unwrap();
            let rule = polygon_rule(&g, 14).unwrap();
            let fnorm = rule.integrate(|x| f(x) * f(x)).sqrt();
            for i in 0..p.basis.len() {
                let r = rule.integrate(|x| (f(x) - p.eval(x)[0]) * p.basis.eval(i, x));
                assert!(r.abs() <= 1e-11 * fnorm, "k={k} i={i}: {r}");
            }
        }
    }

    #[test]
    fn mass_matrix_spd_on_generated_meshes() {
        for fam in MeshFamily::ALL {
            let m = generate_mesh(fam, 6, Rect::unit_square()).unwrap();
            for g in m.all_geometry() {
                let basis = ScaledMonomialBasis::on_element(&g, 2);
                let mm = mass_matrix(&g, &basis, 4).unwrap();
                for i in 0..basis.len() {
                    for j in 0..basis.len() {
                        assert!((mm[(i, j)] - mm[(j, i)]).abs() < 1e-15);
                    }
                }
                assert!(mm.llt(Side::Lower).is_ok(), "{fam} cell {}", g.cell);
            }
        }
    }
}
