//! Physical parameters and manufactured solutions of the Oseen problem
//!
//! ```text
//! -ν Δu + (β·∇)u + κ u + ∇p = f  in Ω,   div u = 0,   u = g on ∂Ω,
//! ```
//!
//! together with the pseudostress `σ = ν∇u − u⊗β − pI`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::geom::{Rect, Tensor2, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown case `{0}` (expected test1..test5 or patch)")]
    UnknownCase(String),
    #[error("parameter {name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("case {case}: manufactured-solution residual {residual:.3e} exceeds {tolerance:.0e}")]
    ResidualCheck {
        case: CaseTag,
        residual: f64,
        tolerance: f64,
    },
}

pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Vec2) -> Tensor2 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

/// Convective field β.
#[derive(Clone)]
pub enum Beta {
    Constant(Vec2),
    Field(VectorFn),
}

impl Beta {
    pub fn at(&self, x: Vec2) -> Vec2 {
        match self {
            Beta::Constant(b) => *b,
            Beta::Field(f) => f(x),
        }
    }

    /// Componentwise maximum of `|β|` over a 101 × 101 grid on `domain`.
    pub fn inf_norm(&self, domain: &Rect) -> f64 {
        match self {
            Beta::Constant(b) => b.max_abs(),
            Beta::Field(f) => {
                let mut m: f64 = 0.0;
                for i in 0..=100 {
                    for j in 0..=100 {
                        m = m.max(f(domain.lerp(i as f64 / 100.0, j as f64 / 100.0)).max_abs());
                    }
                }
                m
            }
        }
    }
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Constant(b) => write!(f, "Constant({}, {})", b.x, b.y),
            Beta::Field(_) => f.write_str("Field(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OseenParameters {
    pub nu: f64,
    pub kappa: f64,
    pub beta: Beta,
}

impl OseenParameters {
    pub fn new(nu: f64, kappa: f64, beta: Beta) -> Result<Self, ProblemError> {
        for (name, value) in [("nu", nu), ("kappa", kappa)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ProblemError::InvalidParameter { name, value });
            }
        }
        Ok(OseenParameters { nu, kappa, beta })
    }
}

/// Dimensionless group `(2 + √2) ‖β‖_∞ / (2ν)` from the discrete uniqueness
/// condition, with the unknown embedding constant set to one. Diagnostic only.
pub fn smallness_indicator(params: &OseenParameters, domain: &Rect) -> f64 {
    (2.0 + 2f64.sqrt()) * params.beta.inf_norm(domain) / (2.0 * params.nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    Test1,
    Test2,
    Test3,
    Test4,
    Test5,
    Patch,
}

impl CaseTag {
    pub const ALL: [CaseTag; 6] = [
        CaseTag::Test1,
        CaseTag::Test2,
        CaseTag::Test3,
        CaseTag::Test4,
        CaseTag::Test5,
        CaseTag::Patch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Test1 => "test1",
            CaseTag::Test2 => "test2",
            CaseTag::Test3 => "test3",
            CaseTag::Test4 => "test4",
            CaseTag::Test5 => "test5",
            CaseTag::Patch => "patch",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        CaseTag::ALL
            .into_iter()
            .find(|c| c.name() == t)
            .ok_or_else(|| ProblemError::UnknownCase(s.to_string()))
    }
}

/// Optional replacements for the physical parameters of a case.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub kappa: Option<f64>,
    pub beta: Option<Vec2>,
}

/// Closed-form velocity and pressure with their derivatives.
#[derive(Clone)]
pub struct ExactFields {
    pub u: VectorFn,
    /// `(∇u)_{ij} = ∂u_i/∂x_j`.
    pub grad_u: TensorFn,
    pub lap_u: VectorFn,
    pub p: ScalarFn,
    pub grad_p: VectorFn,
}

/// A manufactured Oseen problem.
#[derive(Clone)]
pub struct OseenCase {
    pub tag: CaseTag,
    pub domain: Rect,
    pub params: OseenParameters,
    pub exact: ExactFields,
    /// Exactness degree for load integrals.
    pub load_degree: usize,
    /// Exactness degree for error norms.
    pub error_degree: usize,
}

impl fmt::Debug for OseenCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OseenCase")
            .field("tag", &self.tag)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .field("load_degree", &self.load_degree)
            .field("error_degree", &self.error_degree)
            .finish_non_exhaustive()
    }
}

impl OseenCase {
    pub fn u(&self, x: Vec2) -> Vec2 {
        (self.exact.u)(x)
    }

    pub fn grad_u(&self, x: Vec2) -> Tensor2 {
        (self.exact.grad_u)(x)
    }

    pub fn p(&self, x: Vec2) -> f64 {
        (self.exact.p)(x)
    }

    pub fn beta(&self, x: Vec2) -> Vec2 {
        self.params.beta.at(x)
    }

    /// `σ = ν∇u − u⊗β − pI`.
    pub fn sigma(&self, x: Vec2) -> Tensor2 {
        self.grad_u(x) * self.params.nu - Tensor2::outer(self.u(x), self.beta(x)) - Tensor2::IDENTITY * self.p(x)
    }

    /// `f = −νΔu + (∇u)β + κu + ∇p`.
    pub fn f(&self, x: Vec2) -> Vec2 {
        let OseenParameters { nu, kappa, .. } = self.params;
        (self.exact.lap_u)(x) * (-nu)
            + self.grad_u(x).apply(self.beta(x))
            + self.u(x) * kappa
            + (self.exact.grad_p)(x)
    }

    /// Dirichlet datum.
    pub fn g(&self, x: Vec2) -> Vec2 {
        self.u(x)
    }

    pub fn smallness(&self) -> f64 {
        smallness_indicator(&self.params, &self.domain)
    }
}

/// A function of one variable with its first three derivatives.
type Profile = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

/// Velocity `u = (∂φ/∂y, −∂φ/∂x)` of the stream function `φ = A(x) B(y)`.
fn stream_function_fields(a: Profile, b: Profile, p: ScalarFn, grad_p: VectorFn) -> ExactFields {
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.clone(), b.clone());
    let (a3, b3) = (a, b);
    ExactFields {
        u: Arc::new(move |x| {
            let (a, b) = (a1(x.x), b1(x.y));
            Vec2::new(a[0] * b[1], -a[1] * b[0])
        }),
        grad_u: Arc::new(move |x| {
            let (a, b) = (a2(x.x), b2(x.y));
            Tensor2::new(a[1] * b[1], a[0] * b[2], -a[2] * b[0], -a[1] * b[1])
        }),
        lap_u: Arc::new(move |x| {
            let (a, b) = (a3(x.x), b3(x.y));
            Vec2::new(a[2] * b[1] + a[0] * b[3], -a[3] * b[0] - a[1] * b[2])
        }),
        p,
        grad_p,
    }
}

/// `(1 − t²)²`.
fn bubble_pm1(t: f64) -> [f64; 4] {
    let s = 1.0 - t * t;
    [s * s, -4.0 * t * s, 12.0 * t * t - 4.0, 24.0 * t]
}

/// `t² (t − 1)²`.
fn bubble_01(t: f64) -> [f64; 4] {
    [
        t * t * (t - 1.0) * (t - 1.0),
        2.0 * t * (t - 1.0) * (2.0 * t - 1.0),
        12.0 * t * t - 12.0 * t + 2.0,
        24.0 * t - 12.0,
    ]
}

/// `t² (1 − e^{λ(t−1)})²`, steep near `t = 1` for large `λ`.
fn layer_profile(lambda: f64) -> Profile {
    Arc::new(move |t| {
        let e = (lambda * (t - 1.0)).exp();
        let q = [1.0 - e, -lambda * e, -lambda * lambda * e, -lambda.powi(3) * e];
        let b = [
            q[0] * q[0],
            2.0 * q[0] * q[1],
            2.0 * q[1] * q[1] + 2.0 * q[0] * q[2],
            6.0 * q[1] * q[2] + 2.0 * q[0] * q[3],
        ];
        let a = [t * t, 2.0 * t, 2.0];
        [
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
        ]
    })
}

/// Builds a manufactured case. For `test5` the layer steepness `λ = 1/(2ν)`
/// follows an overridden `ν`.
///
/// The case is checked with [`residual_check`] before it is returned.
pub fn build_case(tag: CaseTag, overrides: Overrides) -> Result<OseenCase, ProblemError> {
    let case = build_unchecked(tag, overrides)?;
    let residual = residual_check(&case, 64).max();
    let tolerance = 1e-6;
    if residual.is_nan() || residual > tolerance {
        return Err(ProblemError::ResidualCheck {
            case: tag,
            residual,
            tolerance,
        });
    }
    Ok(case)
}

/// Same as [`build_case`] without the residual guard.
pub fn build_unchecked(tag: CaseTag, overrides: Overrides) -> Result<OseenCase, ProblemError> {
    let (domain, nu, kappa, beta) = match tag {
        CaseTag::Test1 => (Rect::new(-1.0, 1.0, -1.0, 1.0), 1.0, 1.0, Vec2::new(1.0, 0.0)),
        CaseTag::Test2 | CaseTag::Test3 | CaseTag::Test4 | CaseTag::Patch => {
            (Rect::unit_square(), 1.0, 1.0, Vec2::new(1.0, 1.0))
        }
        CaseTag::Test5 => (Rect::unit_square(), 1e-3, 1e-2, Vec2::new(1.0, 1.0)),
    };
    let params = OseenParameters::new(
        overrides.nu.unwrap_or(nu),
        overrides.kappa.unwrap_or(kappa),
        Beta::Constant(overrides.beta.unwrap_or(beta)),
    )?;
    let nu = params.nu;

    let exact = match tag {
        CaseTag::Test1 => stream_function_fields(
            Arc::new(bubble_pm1),
            Arc::new(bubble_pm1),
            Arc::new(|x| x.x),
            Arc::new(|_| Vec2::new(1.0, 0.0)),
        ),
        CaseTag::Test2 | CaseTag::Test3 => {
            let c = 2.0 * 1f64.sin() * (1.0 - 1f64.cos());
            stream_function_fields(
                Arc::new(bubble_01),
                Arc::new(bubble_01),
                Arc::new(move |x| 2.0 * x.x.cos() * x.y.sin() - c),
                Arc::new(|x| Vec2::new(-2.0 * x.x.sin() * x.y.sin(), 2.0 * x.x.cos() * x.y.cos())),
            )
        }
        CaseTag::Test4 => ExactFields {
            u: Arc::new(|x| Vec2::new(x.y, -x.x)),
            grad_u: Arc::new(|_| Tensor2::new(0.0, 1.0, -1.0, 0.0)),
            lap_u: Arc::new(|_| Vec2::ZERO),
            p: Arc::new(|x| x.x * x.x + x.y * x.y - 2.0 / 3.0),
            grad_p: Arc::new(|x| x * 2.0),
        },
        CaseTag::Test5 => {
            let lambda = 1.0 / (2.0 * nu);
            let c = (std::f64::consts::E - 1.0).powi(2);
            stream_function_fields(
                layer_profile(lambda),
                layer_profile(lambda),
                Arc::new(move |x| (x.x + x.y).exp() - c),
                Arc::new(|x| {
                    let e = (x.x + x.y).exp();
                    Vec2::new(e, e)
                }),
            )
        }
        CaseTag::Patch => ExactFields {
            u: Arc::new(|_| Vec2::new(1.0, -0.5)),
            grad_u: Arc::new(|_| Tensor2::ZERO),
            lap_u: Arc::new(|_| Vec2::ZERO),
            p: Arc::new(|_| 0.0),
            grad_p: Arc::new(|_| Vec2::ZERO),
        },
    };
    let (load_degree, error_degree) = match tag {
        CaseTag::Test5 => (10, 10),
        _ => (4, 6),
    };
    Ok(OseenCase {
        tag,
        domain,
        params,
        exact,
        load_degree,
        error_degree,
    })
}

/// Largest relative mismatches found by [`residual_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Registered `∇u`, `Δu`, `∇p` against finite differences.
    pub derivative: f64,
    /// Registered `f` against the strong form evaluated with finite differences.
    pub momentum: f64,
    /// Registered `σ` against `ν∇u − u⊗β − pI` with a finite-difference gradient.
    pub pseudostress: f64,
    /// `|div u|` from finite differences, relative to the gradient scale.
    pub divergence: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.derivative
            .max(self.momentum)
            .max(self.pseudostress)
            .max(self.divergence)
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Points of the (2, 3) Halton sequence mapped into the interior of `domain`.
pub fn halton_points(domain: &Rect, count: usize) -> Vec<Vec2> {
    let margin = 0.01;
    (1..=count as u64)
        .map(|i| {
            let s = margin + (1.0 - 2.0 * margin) * radical_inverse(i, 2);
            let t = margin + (1.0 - 2.0 * margin) * radical_inverse(i, 3);
            domain.lerp(s, t)
        })
        .collect()
}

const FD_STEP: f64 = 1e-5;

/// Fourth-order central difference of `f` at `x` in direction `d`.
fn fd<T>(f: &impl Fn(Vec2) -> T, x: Vec2, d: Vec2) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let h = FD_STEP;
    (f(x - d * (2.0 * h)) - f(x + d * (2.0 * h)) + (f(x + d * h) - f(x - d * h)) * 8.0) * (1.0 / (12.0 * h))
}

/// Verifies the registered closed forms against central finite differences
/// (step `1e-5`) at `samples` quasi-random interior points. Each mismatch is
/// divided by `max(1, magnitude of the terms involved)`.
pub fn residual_check(case: &OseenCase, samples: usize) -> ResidualReport {
    let ex = x_dir();
    let ey = y_dir();
    let OseenParameters { nu, kappa, .. } = case.params;
    let u = |x: Vec2| case.u(x);
    let p = |x: Vec2| case.p(x);
    let grad = |x: Vec2| case.grad_u(x);
    let mut rep = ResidualReport {
        derivative: 0.0,
        momentum: 0.0,
        pseudostress: 0.0,
        divergence: 0.0,
    };
    for x in halton_points(&case.domain, samples) {
        let (ux, uy) = (fd(&u, x, ex), fd(&u, x, ey));
        let grad_fd = Tensor2::new(ux.x, uy.x, ux.y, uy.y);
        let g = case.grad_u(x);
        let (gx, gy) = (fd(&grad, x, ex), fd(&grad, x, ey));
        let lap_fd = Vec2::new(gx.0[0][0] + gy.0[0][1], gx.0[1][0] + gy.0[1][1]);
        let lap = (case.exact.lap_u)(x);
        let grad_p_fd = Vec2::new(fd(&p, x, ex), fd(&p, x, ey));
        let grad_p = (case.exact.grad_p)(x);

        let rel = |err: f64, scale: f64| err / scale.max(1.0);
        let d = rel((g - grad_fd).max_abs(), g.max_abs())
            .max(rel((lap - lap_fd).max_abs(), lap.max_abs()))
            .max(rel((grad_p - grad_p_fd).max_abs(), grad_p.max_abs()));
        rep.derivative = rep.derivative.max(d);

        let beta = case.beta(x);
        let terms = [
            lap_fd * (-nu),
            grad_fd.apply(beta),
            case.u(x) * kappa,
            grad_p_fd,
        ];
        let strong = terms.iter().fold(Vec2::ZERO, |a, &t| a + t);
        let scale = terms.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
        rep.momentum = rep.momentum.max(rel((case.f(x) - strong).max_abs(), scale));

        let s_fd = grad_fd * nu - Tensor2::outer(case.u(x), beta) - Tensor2::IDENTITY * case.p(x);
        rep.pseudostress = rep
            .pseudostress
            .max(rel((case.sigma(x) - s_fd).max_abs(), case.sigma(x).max_abs()));
        rep.divergence = rep
            .divergence
            .max(rel(grad_fd.trace().abs(), grad_fd.max_abs()));
    }
    rep
}

fn x_dir() -> Vec2 {
    Vec2::new(1.0, 0.0)
}

fn y_dir() -> Vec2 {
    Vec2::new(0.0, 1.0)
}
