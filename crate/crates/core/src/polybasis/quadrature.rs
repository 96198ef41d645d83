use thiserror::Error;

use crate::geom::Vec2;
use crate::mesh::ElementGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("cell {cell}: neither the centroid fan nor ear clipping yields a valid triangulation")]
    Triangulation { cell: usize },
}

/// Points and weights with a declared polynomial exactness degree.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of weights: the length or area of the integration domain.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(Vec2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    fn append(&mut self, other: QuadratureRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one point");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule on the segment `a`–`b`, exact up to `degree`.
pub fn edge_rule(a: Vec2, b: Vec2, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a).norm();
    QuadratureRule {
        points: x.iter().map(|&t| a + (b - a) * (0.5 * (t + 1.0))).collect(),
        weights: w.iter().map(|&wi| wi * half).collect(),
        degree,
    }
}

fn barycentric_rule(a: Vec2, b: Vec2, c: Vec2, area: f64, pts: &[([f64; 3], f64)], degree: usize) -> QuadratureRule {
    QuadratureRule {
        points: pts
            .iter()
            .map(|(l, _)| a * l[0] + b * l[1] + c * l[2])
            .collect(),
        weights: pts.iter().map(|(_, w)| w * area).collect(),
        degree,
    }
}

/// Rule on the CCW triangle `abc`, exact up to `degree`.
///
/// Degrees up to 5 use symmetric rules (centroid, three interior points,
/// Radon's seven points); higher degrees use a collapsed tensor Gauss rule.
pub fn triangle_rule(a: Vec2, b: Vec2, c: Vec2, degree: usize) -> QuadratureRule {
    let area = 0.5 * (b - a).cross(c - a);
    match degree {
        0 | 1 => barycentric_rule(a, b, c, area, &[([1.0 / 3.0; 3], 1.0)], degree),
        2 => {
            let (p, q) = (2.0 / 3.0, 1.0 / 6.0);
            let w = 1.0 / 3.0;
            barycentric_rule(a, b, c, area, &[([p, q, q], w), ([q, p, q], w), ([q, q, p], w)], degree)
        }
        3..=5 => {
            let s = 15f64.sqrt();
            let (a1, a2) = ((6.0 - s) / 21.0, (6.0 + s) / 21.0);
            let (b1, b2) = (1.0 - 2.0 * a1, 1.0 - 2.0 * a2);
            let (w1, w2) = ((155.0 - s) / 1200.0, (155.0 + s) / 1200.0);
            let pts = [
                ([1.0 / 3.0; 3], 9.0 / 40.0),
                ([a1, a1, b1], w1),
                ([a1, b1, a1], w1),
                ([b1, a1, a1], w1),
                ([a2, a2, b2], w2),
                ([a2, b2, a2], w2),
                ([b2, a2, a2], w2),
            ];
            barycentric_rule(a, b, c, area, &pts, degree)
        }
        _ => {
            // x(u, v) = a + u [(1 - v)(b - a) + v (c - a)], Jacobian 2|T| u.
            let n = (degree + 3) / 2;
            let (g, w) = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for i in 0..n {
                let u = 0.5 * (g[i] + 1.0);
                for j in 0..n {
                    let v = 0.5 * (g[j] + 1.0);
                    points.push(a + ((b - a) * (1.0 - v) + (c - a) * v) * u);
                    weights.push(0.25 * w[i] * w[j] * 2.0 * area * u);
                }
            }
            QuadratureRule { points, weights, degree }
        }
    }
}

/// Triangles `(x_E, v_i, v_{i+1})`, or `None` if one of them is not
/// positively oriented.
fn centroid_fan(g: &ElementGeometry) -> Option<Vec<[Vec2; 3]>> {
    let tol = 1e-14 * g.area.abs();
    let n = g.vertices.len();
    let tris: Vec<[Vec2; 3]> = (0..n)
        .map(|i| [g.centroid, g.vertices[i], g.vertices[(i + 1) % n]])
        .collect();
    tris.iter()
        .all(|t| 0.5 * (t[1] - t[0]).cross(t[2] - t[0]) > tol)
        .then_some(tris)
}

fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Ear-clipping triangulation of a simple CCW polygon.
pub fn ear_clip(vertices: &[Vec2]) -> Option<Vec<[Vec2; 3]>> {
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut tris = Vec::with_capacity(vertices.len().saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&i| {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
            if (b - a).cross(c - b) <= 0.0 {
                return false;
            }
            idx.iter()
                .filter(|&&j| j != ia && j != ib && j != ic)
                .all(|&j| !point_in_triangle(vertices[j], a, b, c))
        })?;
        tris.push([
            vertices[idx[(ear + m - 1) % m]],
            vertices[idx[ear]],
            vertices[idx[(ear + 1) % m]],
        ]);
        idx.remove(ear);
    }
    let (a, b, c) = (vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]);
    if (b - a).cross(c - a) <= 0.0 {
        return None;
    }
    tris.push([a, b, c]);
    Some(tris)
}

/// Sub-triangulation used for polygon quadrature: the centroid fan when it
/// is valid, ear clipping otherwise.
pub fn sub_triangulation(g: &ElementGeometry) -> Result<Vec<[Vec2; 3]>, GeometryError> {
    centroid_fan(g)
        .or_else(|| ear_clip(&g.vertices))
        .ok_or(GeometryError::Triangulation { cell: g.cell })
}

/// Rule on a polygonal element, exact up to `degree`.
pub fn polygon_rule(g: &ElementGeometry, degree: usize) -> Result<QuadratureRule, GeometryError> {
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
        degree,
    };
    for [a, b, c] in sub_triangulation(g)? {
        rule.append(triangle_rule(a, b, c, degree));
    }
    Ok(rule)
}
