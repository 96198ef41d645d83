use crate::geom::Vec2;
use crate::mesh::{ElementGeometry, LocalEdge};

/// Geometric entity that carries a scaled monomial basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisOwner {
    /// Edge with unit tangent; monomials are in the arc-length coordinate.
    Edge { tangent: Vec2 },
    Element,
}

/// Scaled monomials `((x - x_O) / h_O)^α` with `|α| ≤ k`.
///
/// Element exponents are ordered by total degree, then by decreasing power
/// of `x`: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`. Edge exponents are
/// stored as `[j, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    pub owner: BasisOwner,
    pub center: Vec2,
    pub scale: f64,
    pub degree: usize,
    pub exponents: Vec<[usize; 2]>,
}

impl ScaledMonomialBasis {
    pub fn on_element(geom: &ElementGeometry, degree: usize) -> Self {
        let mut exponents = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for d in 0..=degree {
            for j in 0..=d {
                exponents.push([d - j, j]);
            }
        }
        ScaledMonomialBasis {
            owner: BasisOwner::Element,
            center: geom.centroid,
            scale: geom.diameter,
            degree,
            exponents,
        }
    }

    pub fn on_edge(edge: &LocalEdge, degree: usize) -> Self {
        ScaledMonomialBasis {
            owner: BasisOwner::Edge {
                tangent: (edge.end - edge.start) * (1.0 / edge.length),
            },
            center: edge.midpoint,
            scale: edge.length,
            degree,
            exponents: (0..=degree).map(|j| [j, 0]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Scaled local coordinates of `x`.
    fn local(&self, x: Vec2) -> (f64, f64) {
        let d = (x - self.center) * (1.0 / self.scale);
        match self.owner {
            BasisOwner::Edge { tangent } => (d.dot(tangent), 0.0),
            BasisOwner::Element => (d.x, d.y),
        }
    }

    pub fn eval(&self, i: usize, x: Vec2) -> f64 {
        let (s, t) = self.local(x);
        let [a, b] = self.exponents[i];
        s.powi(a as i32) * t.powi(b as i32)
    }

    /// Values of every basis member at `x`, written into `out`.
    pub fn eval_all(&self, x: Vec2, out: &mut [f64]) {
        let (s, t) = self.local(x);
        for (o, &[a, b]) in out.iter_mut().zip(&self.exponents) {
            *o = s.powi(a as i32) * t.powi(b as i32);
        }
    }
}
