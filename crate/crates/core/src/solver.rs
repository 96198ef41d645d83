//! Direct solution of the saddle-point system.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::Mat;
use thiserror::Error;

use crate::assembly::SaddleSystem;

/// Systems below this dimension are factored densely.
pub const DENSE_THRESHOLD: usize = 2000;
/// Largest accepted relative residual `‖Ax − b‖ / ‖b‖`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("system of dimension {0} is too small (need at least 3)")]
    TooSmall(usize),
    #[error("singular system: no usable pivot at index {index}")]
    Singular { index: usize },
    #[error("ill-conditioned solve: relative residual {residual:.3e} exceeds {tolerance:.0e}")]
    IllConditioned { residual: f64, tolerance: f64 },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub dim: usize,
    pub nnz: usize,
    pub dense: bool,
    pub refinement_steps: usize,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: f64,
    /// `‖Ax − b‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub residual: f64,
    pub stats: SolveStats,
}

impl SolveReport {
    /// The full solution vector `[σ; u; λ]`.
    pub fn solution(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.sigma.len() + self.u.len() + 1);
        x.extend_from_slice(&self.sigma);
        x.extend_from_slice(&self.u);
        x.push(self.lambda);
        x
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(system: &SaddleSystem, x: &[f64]) -> (Vec<f64>, f64) {
    let ax = system.matvec(x);
    let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bn = norm(&system.rhs);
    let rn = norm(&r);
    let rel = if bn > 0.0 { rn / bn } else { rn };
    (r, if rel.is_nan() { f64::INFINITY } else { rel })
}

enum Factor {
    Dense(faer::linalg::solvers::PartialPivLu<f64>),
    Sparse(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Gauged(Gauged),
}

/// Sparse factorization of the system with the dense multiplier row and
/// column replaced by a single-entry border at DOF `pin`. The kernel vector
/// `y` of the unbordered operator (left and right) recovers the multiplier
/// and the shift that restores the trace constraint.
struct Gauged {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    kernel: Vec<f64>,
    trace: Vec<f64>,
    n_sigma: usize,
}

fn solve_mat<S: Solve<f64>>(lu: &S, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

impl Gauged {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let lam = b.len() - 1;
        let (y, t) = (&self.kernel, &self.trace);
        let ty: f64 = t.iter().zip(y).map(|(a, b)| a * b).sum();
        let yb: f64 = y.iter().zip(b).map(|(a, b)| a * b).sum();
        let multiplier = yb / ty;
        let mut rhs = b.to_vec();
        for (r, ti) in rhs.iter_mut().zip(t) {
            *r -= multiplier * ti;
        }
        rhs[lam] = 0.0;
        let mut x = solve_mat(&self.lu, &rhs);
        let tx: f64 = t.iter().zip(&x).map(|(a, b)| a * b).sum();
        let shift = (tx - b[lam]) / ty;
        for (xi, yi) in x[..self.n_sigma].iter_mut().zip(y) {
            *xi -= shift * yi;
        }
        x[lam] = multiplier;
        x
    }
}

impl Factor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Factor::Dense(lu) => solve_mat(lu, b),
            Factor::Sparse(lu) => solve_mat(lu, b),
            Factor::Gauged(g) => g.solve(b),
        }
    }
}

fn dense_factor(system: &SaddleSystem) -> Result<Factor, SolverError> {
    let n = system.dim();
    let dense = system.to_dense();
    let a = Mat::<f64>::from_fn(n, n, |i, j| dense[i * n + j]);
    let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = a.partial_piv_lu();
    let tol = n as f64 * f64::EPSILON * scale;
    let u = lu.U();
    if let Some(index) = (0..n).find(|&i| u[(i, i)].is_nan() || u[(i, i)].abs() <= tol) {
        return Err(SolverError::Singular { index });
    }
    Ok(Factor::Dense(lu))
}

fn sparse_lu(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<f64>) -> Result<faer::sparse::linalg::solvers::Lu<usize, f64>, SolverError> {
    let symbolic = SymbolicSparseColMat::<usize>::new_checked(n, n, col_ptr, None, row_idx);
    let a = SparseColMat::<usize, f64>::new(symbolic, values);
    match a.sp_lu() {
        Ok(lu) => Ok(lu),
        Err(LuError::SymbolicSingular { index }) => Err(SolverError::Singular { index }),
        Err(e) => Err(SolverError::Factorization(format!("{e:?}"))),
    }
}

fn sparse_factor(system: &SaddleSystem) -> Result<Factor, SolverError> {
    let n = system.dim();
    let Some(kernel) = system.trace_kernel.as_ref().filter(|k| k.len() == system.n_sigma) else {
        let lu = sparse_lu(n, system.col_ptr.clone(), system.row_idx.clone(), system.values.clone())?;
        return Ok(Factor::Sparse(lu));
    };
    let lam = system.multiplier_index();
    let pin = (0..kernel.len()).fold(0, |best, k| if kernel[k].abs() > kernel[best].abs() { k } else { best });
    let mut trace = vec![0.0; lam];
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(system.nnz());
    let mut values = Vec::with_capacity(system.nnz());
    let mut diag = 0.0f64;
    col_ptr.push(0);
    for c in 0..lam {
        for k in system.col_ptr[c]..system.col_ptr[c + 1] {
            let r = system.row_idx[k];
            if r == lam {
                trace[c] = system.values[k];
            } else {
                if r == c {
                    diag = diag.max(system.values[k].abs());
                }
                row_idx.push(r);
                values.push(system.values[k]);
            }
        }
        if c == pin {
            row_idx.push(lam);
            values.push(1.0);
        }
        col_ptr.push(row_idx.len());
    }
    row_idx.push(pin);
    values.push(1.0);
    col_ptr.push(row_idx.len());
    // Rescale the border to the magnitude of the diagonal.
    let s = if diag > 0.0 { diag } else { 1.0 };
    let last = values.len() - 1;
    values[last] = s;
    let k = col_ptr[pin + 1] - 1;
    values[k] = s;
    let lu = sparse_lu(n, col_ptr, row_idx, values)?;
    if trace.iter().zip(kernel).map(|(a, b)| a * b).sum::<f64>() == 0.0 {
        return Err(SolverError::Singular { index: lam });
    }
    Ok(Factor::Gauged(Gauged {
        lu,
        kernel: kernel.clone(),
        trace,
        n_sigma: system.n_sigma,
    }))
}

/// Solves `system` by LU with partial pivoting (dense below
/// [`DENSE_THRESHOLD`], sparse otherwise), followed by at most three steps
/// of iterative refinement if the residual exceeds [`RESIDUAL_TOLERANCE`].
pub fn solve(system: &SaddleSystem) -> Result<SolveReport, SolverError> {
    let n = system.dim();
    if n < 3 {
        return Err(SolverError::TooSmall(n));
    }
    let dense = n < DENSE_THRESHOLD;
    let t0 = Instant::now();
    let factor = if dense { dense_factor(system)? } else { sparse_factor(system)? };
    let factor_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut x = factor.solve(&system.rhs);
    let (mut r, mut residual) = relative_residual(system, &x);
    let mut steps = 0;
    while residual > RESIDUAL_TOLERANCE && residual.is_finite() && steps < MAX_REFINEMENT_STEPS {
        let dx = factor.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        (r, residual) = relative_residual(system, &x);
        steps += 1;
    }
    let solve_seconds = t1.elapsed().as_secs_f64();
    if residual.is_nan() || residual > RESIDUAL_TOLERANCE {
        return Err(SolverError::IllConditioned {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    let lambda = x[n - 1];
    let u = x[system.n_sigma..n - 1].to_vec();
    x.truncate(system.n_sigma);
    Ok(SolveReport {
        sigma: x,
        u,
        lambda,
        residual,
        stats: SolveStats {
            dim: n,
            nnz: system.nnz(),
            dense,
            refinement_steps: steps,
            factor_seconds,
            solve_seconds,
        },
    })
}
