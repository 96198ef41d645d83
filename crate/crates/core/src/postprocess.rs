//! Pressure recovery, relative error norms and convergence rates.
//!
//! The pseudostress error is measured against the elementwise projection
//! `Πσ_h`, never against `σ_h` itself: the virtual field has no pointwise
//! values, so `e(σ)` is an `L²` error of the projection and not an `H(div)`
//! error.

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{Tensor2, Vec2};
use crate::mesh::{ElementGeometry, PolyMesh};
use crate::polybasis::{polygon_rule, GeometryError, QuadratureRule};
use crate::problems::{Beta, OseenCase};
use crate::solver::SolveReport;
use crate::vemspace::{LocalOperators, PiecewiseVectorField, VemError, VirtualTensorField};

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error(transparent)]
    Space(#[from] VemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("velocity has {found} cell values, mesh has {expected} cells")]
    VelocityMismatch { expected: usize, found: usize },
    #[error("exact {field} has zero norm; relative error undefined")]
    ZeroNorm { field: &'static str },
    #[error("mesh size repeats at row {row}; rate undefined")]
    RepeatedMeshSize { row: usize },
    #[error("mesh size increases at row {row}")]
    MeshSizeNotDecreasing { row: usize },
}

/// Recovered pressure `p_h|_E(x) = −½(tr Π^E σ_h + u_E·β(x)) − mean`.
#[derive(Debug, Clone)]
pub struct PressureField {
    /// `−½ tr Π^E σ_h` per cell.
    pub trace_part: Vec<f64>,
    pub u: Vec<Vec2>,
    pub beta: Beta,
    /// Global mean subtracted from the raw recovery.
    pub mean: f64,
}

impl PressureField {
    pub fn eval(&self, cell: usize, x: Vec2) -> f64 {
        self.raw(cell, x) - self.mean
    }

    fn raw(&self, cell: usize, x: Vec2) -> f64 {
        self.trace_part[cell] - 0.5 * self.u[cell].dot(self.beta.at(x))
    }

    /// `∫_E p_h` with the given rule.
    pub fn integral(&self, cell: usize, rule: &QuadratureRule) -> f64 {
        rule.integrate(|x| self.eval(cell, x))
    }
}

fn cell_rules(geoms: &[ElementGeometry], degree: usize) -> Result<Vec<QuadratureRule>, GeometryError> {
    geoms.par_iter().map(|g| polygon_rule(g, degree)).collect()
}

fn projections(mesh: &PolyMesh, sigma: &VirtualTensorField) -> Result<(Vec<ElementGeometry>, Vec<Tensor2>), VemError> {
    let per_cell: Vec<(ElementGeometry, Tensor2)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let ops = LocalOperators::new(mesh, c)?;
            let pi = ops.project(&sigma.local(&ops.dofs));
            Ok((ops.geom, pi))
        })
        .collect::<Result<_, VemError>>()?;
    Ok(per_cell.into_iter().unzip())
}

fn pressure_from_parts(pi: &[Tensor2], u: &PiecewiseVectorField, beta: &Beta, rules: &[QuadratureRule]) -> PressureField {
    let mut field = PressureField {
        trace_part: pi.iter().map(|t| -0.5 * t.trace()).collect(),
        u: u.values.clone(),
        beta: beta.clone(),
        mean: 0.0,
    };
    let parts: Vec<(f64, f64)> = rules
        .par_iter()
        .enumerate()
        .map(|(c, r)| (r.integrate(|x| field.raw(c, x)), r.measure()))
        .collect();
    let (int, area) = parts.iter().fold((0.0, 0.0), |(a, b), (i, m)| (a + i, b + m));
    field.mean = int / area;
    field
}

/// Recovers the discrete pressure from `(σ_h, u_h)` and removes its mean,
/// integrated with the case's error quadrature degree.
pub fn recover_pressure(
    sigma: &VirtualTensorField,
    u: &PiecewiseVectorField,
    case: &OseenCase,
    mesh: &PolyMesh,
) -> Result<PressureField, PostprocessError> {
    check_velocity(mesh, u)?;
    let (geoms, pi) = projections(mesh, sigma)?;
    let rules = cell_rules(&geoms, case.error_degree)?;
    Ok(pressure_from_parts(&pi, u, &case.params.beta, &rules))
}

fn check_velocity(mesh: &PolyMesh, u: &PiecewiseVectorField) -> Result<(), PostprocessError> {
    if u.values.len() != mesh.n_cells() {
        return Err(PostprocessError::VelocityMismatch {
            expected: mesh.n_cells(),
            found: u.values.len(),
        });
    }
    Ok(())
}

/// A solved state together with everything needed to evaluate it.
#[derive(Debug, Clone)]
pub struct DiscreteSolution<'a> {
    pub mesh: &'a PolyMesh,
    pub case: &'a OseenCase,
    pub sigma: VirtualTensorField,
    pub u: PiecewiseVectorField,
    pub lambda: f64,
    /// `Π^E σ_h` per cell.
    pub pi_sigma: Vec<Tensor2>,
    pub pressure: PressureField,
    pub geometry: Vec<ElementGeometry>,
    rules: Vec<QuadratureRule>,
}

impl<'a> DiscreteSolution<'a> {
    pub fn new(
        mesh: &'a PolyMesh,
        case: &'a OseenCase,
        sigma: VirtualTensorField,
        u: PiecewiseVectorField,
        lambda: f64,
    ) -> Result<Self, PostprocessError> {
        if sigma.values.len() != 2 * mesh.n_edges() {
            return Err(VemError::DofMismatch {
                expected: 2 * mesh.n_edges(),
                found: sigma.values.len(),
            }
            .into());
        }
        check_velocity(mesh, &u)?;
        let (geometry, pi_sigma) = projections(mesh, &sigma)?;
        let rules = cell_rules(&geometry, case.error_degree)?;
        let pressure = pressure_from_parts(&pi_sigma, &u, &case.params.beta, &rules);
        Ok(DiscreteSolution {
            mesh,
            case,
            sigma,
            u,
            lambda,
            pi_sigma,
            pressure,
            geometry,
            rules,
        })
    }

    pub fn from_report(mesh: &'a PolyMesh, case: &'a OseenCase, report: &SolveReport) -> Result<Self, PostprocessError> {
        let sigma = VirtualTensorField::from_values(mesh, report.sigma.clone())?;
        let u = PiecewiseVectorField {
            values: report.u.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect(),
        };
        Self::new(mesh, case, sigma, u, report.lambda)
    }

    pub fn pressure_at(&self, cell: usize, x: Vec2) -> f64 {
        self.pressure.eval(cell, x)
    }

    /// Mean of `p_h` over each cell.
    pub fn pressure_cell_means(&self) -> Vec<f64> {
        self.rules
            .iter()
            .enumerate()
            .map(|(c, r)| self.pressure.integral(c, r) / r.measure())
            .collect()
    }

    /// `∫_Ω p_h`.
    pub fn pressure_integral(&self) -> f64 {
        self.rules.iter().enumerate().map(|(c, r)| self.pressure.integral(c, r)).sum()
    }

    /// `∫_Ω tr σ_h`, exact from the DOFs.
    pub fn trace_integral(&self) -> f64 {
        self.geometry.iter().zip(&self.pi_sigma).map(|(g, p)| g.area * p.trace()).sum()
    }

    /// `‖Πσ_h‖₀`.
    pub fn sigma_projection_norm(&self) -> f64 {
        self.geometry
            .iter()
            .zip(&self.pi_sigma)
            .map(|(g, p)| g.area * p.norm_sq())
            .sum::<f64>()
            .sqrt()
    }
}

/// How a zero exact norm is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormPolicy {
    /// A zero denominator is an error.
    #[default]
    Relative,
    /// Report the absolute error where the exact norm vanishes.
    AbsoluteIfZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub e_sigma: f64,
    pub e_u: f64,
    pub e_p: f64,
    pub e_star: f64,
    /// Absolute errors `(σ, u, p)`.
    pub absolute: [f64; 3],
    /// Exact norms `(σ, u, p)`.
    pub norms: [f64; 3],
}

fn ratio(err: f64, norm: f64, field: &'static str, policy: NormPolicy) -> Result<f64, PostprocessError> {
    if norm > 0.0 {
        Ok(err / norm)
    } else if policy == NormPolicy::AbsoluteIfZero {
        Ok(err)
    } else {
        Err(PostprocessError::ZeroNorm { field })
    }
}

/// Relative `L²` errors of `Πσ_h`, `u_h` and `p_h`, plus the combined
/// star-norm error. The exact pseudostress is shifted by a multiple of the
/// identity so that its trace has zero mean, like the discrete one.
pub fn compute_errors(sol: &DiscreteSolution, policy: NormPolicy) -> Result<ErrorReport, PostprocessError> {
    let case = sol.case;
    let (tr, area) = sol
        .rules
        .iter()
        .map(|r| (r.integrate(|x| case.sigma(x).trace()), r.measure()))
        .fold((0.0, 0.0), |(a, b), (t, m)| (a + t, b + m));
    let shift = Tensor2::IDENTITY * (tr / (2.0 * area));

    let parts: Vec<[f64; 6]> = sol
        .rules
        .par_iter()
        .enumerate()
        .map(|(c, rule)| {
            let mut acc = [0.0; 6];
            let (pi, uh) = (sol.pi_sigma[c], sol.u.cell(c));
            for (x, w) in rule.iter() {
                let s = case.sigma(x) - shift;
                let u = case.u(x);
                let p = case.p(x);
                acc[0] += w * (s - pi).norm_sq();
                acc[1] += w * (u - uh).norm_sq();
                acc[2] += w * (p - sol.pressure.eval(c, x)).powi(2);
                acc[3] += w * s.norm_sq();
                acc[4] += w * u.norm_sq();
                acc[5] += w * p * p;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 6];
    for a in &parts {
        for (t, v) in tot.iter_mut().zip(a) {
            *t += v;
        }
    }
    let absolute = [tot[0].sqrt(), tot[1].sqrt(), tot[2].sqrt()];
    let norms = [tot[3].sqrt(), tot[4].sqrt(), tot[5].sqrt()];
    Ok(ErrorReport {
        e_sigma: ratio(absolute[0], norms[0], "pseudostress", policy)?,
        e_u: ratio(absolute[1], norms[1], "velocity", policy)?,
        e_p: ratio(absolute[2], norms[2], "pressure", policy)?,
        e_star: ratio((tot[0] + tot[1] + tot[2]).sqrt(), (tot[3] + tot[4] + tot[5]).sqrt(), "solution", policy)?,
        absolute,
        norms,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceRecord {
    pub h: f64,
    pub e_u: f64,
    pub e_sigma: f64,
    pub e_p: f64,
    pub e_star: f64,
    pub r_u: Option<f64>,
    pub r_sigma: Option<f64>,
    pub r_p: Option<f64>,
    pub n_sigma_dofs: usize,
    pub n_u_dofs: usize,
    pub t_assemble_s: f64,
    pub t_solve_s: f64,
}

/// `log(e/e′) / log(h/h′)`; `None` when either error is not positive.
pub fn rate(e: f64, e_next: f64, h: f64, h_next: f64) -> Option<f64> {
    (e > 0.0 && e_next > 0.0).then(|| (e / e_next).ln() / (h / h_next).ln())
}

/// Fills the rate columns from the second row on. Rows must have strictly
/// decreasing `h`.
pub fn convergence_rates(records: &mut [ConvergenceRecord]) -> Result<(), PostprocessError> {
    for row in 1..records.len() {
        let (prev, cur) = (&records[row - 1], &records[row]);
        if cur.h == prev.h {
            return Err(PostprocessError::RepeatedMeshSize { row });
        }
        if cur.h > prev.h {
            return Err(PostprocessError::MeshSizeNotDecreasing { row });
        }
    }
    if let Some(first) = records.first_mut() {
        (first.r_u, first.r_sigma, first.r_p) = (None, None, None);
    }
    for row in 1..records.len() {
        let (prev, cur) = (records[row - 1].clone(), &mut records[row]);
        cur.r_u = rate(prev.e_u, cur.e_u, prev.h, cur.h);
        cur.r_sigma = rate(prev.e_sigma, cur.e_sigma, prev.h, cur.h);
        cur.r_p = rate(prev.e_p, cur.e_p, prev.h, cur.h);
    }
    Ok(())
}
