//! Element forms and the global saddle-point system.
//!
//! Unknown layout: `Nσ = 2·#edges` tensor DOFs first, then `Nu = 2·#cells`
//! velocity coefficients (cell `c`, component `r` at `Nσ + 2c + r`), then one
//! Lagrange multiplier enforcing `∫_Ω tr σ_h = 0`. Block form:
//!
//! ```text
//! [ A   Bᵀ+C  tᵀ ] [σ]   [G]
//! [ B   −D    0  ] [u] = [F]
//! [ t   0     0  ] [λ]   [0]
//! ```

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Vec2;
use crate::mesh::{PolyMesh, DIRICHLET_MARKER};
use crate::polybasis::{edge_rule, polygon_rule, GeometryError};
use crate::problems::{Beta, OseenCase};
use crate::vemspace::{LocalOperators, VemError};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Space(#[from] VemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("edge {edge} has boundary marker {marker}; only Dirichlet (marker 1) is supported")]
    UnsupportedBoundary { edge: usize, marker: u32 },
    #[error("local forms do not match the mesh: {0}")]
    DofMap(String),
    #[error("unknown {kind} variant `{value}`")]
    UnknownVariant { kind: &'static str, value: String },
}

/// Scaling of the dofi-dofi stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stabilization {
    /// `s_ν = 1/6`: on a square this is the ratio between the `L²` norm of
    /// a linear Raviart–Thomas mode and the sum of its squared DOFs.
    #[default]
    Calibrated,
    /// `s_ν = 1`.
    Paper5,
    /// `s_ν = 1/ν`, matching the scaling of the consistency term.
    Scaled,
}

impl Stabilization {
    pub fn name(self) -> &'static str {
        match self {
            Stabilization::Calibrated => "calibrated",
            Stabilization::Paper5 => "paper5",
            Stabilization::Scaled => "scaled",
        }
    }

    pub fn factor(self, nu: f64) -> f64 {
        match self {
            Stabilization::Calibrated => 1.0 / 6.0,
            Stabilization::Paper5 => 1.0,
            Stabilization::Scaled => 1.0 / nu,
        }
    }
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stabilization {
    type Err = AssemblyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "calibrated" => Ok(Stabilization::Calibrated),
            "paper5" => Ok(Stabilization::Paper5),
            "scaled" => Ok(Stabilization::Scaled),
            other => Err(AssemblyError::UnknownVariant {
                kind: "stabilization",
                value: other.to_string(),
            }),
        }
    }
}

/// Factor `c_ν` in front of the discrete convective form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvectiveScaling {
    /// `c_ν = 1/ν`, as in the continuous form.
    #[default]
    InverseNu,
    /// `c_ν = 1`.
    Unit,
}

impl ConvectiveScaling {
    pub fn name(self) -> &'static str {
        match self {
            ConvectiveScaling::InverseNu => "c_nu",
            ConvectiveScaling::Unit => "c_nu_off",
        }
    }

    pub fn factor(self, nu: f64) -> f64 {
        match self {
            ConvectiveScaling::InverseNu => 1.0 / nu,
            ConvectiveScaling::Unit => 1.0,
        }
    }
}

impl fmt::Display for ConvectiveScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvectiveScaling {
    type Err = AssemblyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "c_nu" | "on" => Ok(ConvectiveScaling::InverseNu),
            "c_nu_off" | "off" => Ok(ConvectiveScaling::Unit),
            other => Err(AssemblyError::UnknownVariant {
                kind: "c_nu",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssemblyOptions {
    pub stabilization: Stabilization,
    pub convective: ConvectiveScaling,
}

/// Element matrices and vectors in local, outward-signed DOFs. Dense
/// matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForms {
    pub ops: LocalOperators,
    /// `a_h^E`, `N_E × N_E`.
    pub a: Vec<f64>,
    /// Stabilization part of `a`, `N_E × N_E`.
    pub s: Vec<f64>,
    /// `b^E(τ, e_r) = b[r][j] τ_j`.
    pub b: [Vec<f64>; 2],
    /// `c_h^E(e_r, τ) = c[j][r] τ_j`.
    pub c: Vec<[f64; 2]>,
    /// `d^E = κ|E| I`.
    pub d: [[f64; 2]; 2],
    /// `−∫_E f`.
    pub f: Vec2,
    /// `Σ_{e ⊂ ∂Ω} ∫_e (τ n)·g` per local DOF.
    pub g: Vec<f64>,
    /// `∫_E tr τ_h` per local DOF.
    pub t: Vec<f64>,
}

impl LocalForms {
    pub fn cell(&self) -> usize {
        self.ops.dofs.cell
    }

    pub fn n_dofs(&self) -> usize {
        self.ops.n_dofs()
    }

    /// `a_h^E(σ, τ)` for local DOF vectors.
    pub fn a_form(&self, sigma: &[f64], tau: &[f64]) -> f64 {
        bilinear(&self.a, sigma, tau)
    }
}

fn bilinear(m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        s += y[i] * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
    s
}

/// Local forms of one element.
pub fn local_forms(
    mesh: &PolyMesh,
    cell: usize,
    case: &OseenCase,
    options: AssemblyOptions,
) -> Result<LocalForms, AssemblyError> {
    let ops = LocalOperators::new(mesh, cell)?;
    let n = ops.n_dofs();
    let area = ops.geom.area;
    let nu = case.params.nu;

    // Consistency: (|E|/ν) Pᵀ Dev P with Dev = I − ½ e eᵀ, e = (1, 0, 0, 1).
    let pi = &ops.pi;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let pi_i = [pi[0][i], pi[1][i], pi[2][i], pi[3][i]];
        let tr_i = pi_i[0] + pi_i[3];
        for j in 0..n {
            let pi_j = [pi[0][j], pi[1][j], pi[2][j], pi[3][j]];
            let tr_j = pi_j[0] + pi_j[3];
            let dot: f64 = pi_i.iter().zip(&pi_j).map(|(x, y)| x * y).sum();
            a[i * n + j] = area / nu * (dot - 0.5 * tr_i * tr_j);
        }
    }

    // Stabilization: s_ν (I − P_dof)ᵀ (I − P_dof).
    let mut r = ops.pi_dof_matrix();
    for v in r.iter_mut() {
        *v = -*v;
    }
    for i in 0..n {
        r[i * n + i] += 1.0;
    }
    let s_nu = options.stabilization.factor(nu);
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| r[k * n + i] * r[k * n + j]).sum::<f64>() * s_nu;
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    for (ai, si) in a.iter_mut().zip(&s) {
        *ai += si;
    }

    let mut b = [vec![0.0; n], vec![0.0; n]];
    for i in 0..n / 2 {
        b[0][2 * i] = 1.0;
        b[1][2 * i + 1] = 1.0;
    }

    let rule = polygon_rule(&ops.geom, case.load_degree)?;
    let beta_int = match &case.params.beta {
        Beta::Constant(v) => *v * area,
        Beta::Field(f) => {
            let mut acc = Vec2::ZERO;
            for (p, w) in rule.iter() {
                acc += f(p) * w;
            }
            acc
        }
    };
    // c(e_r, τ) = c_ν (e_r ⊗ ∫β)^d : Π τ.
    let c_nu = options.convective.factor(nu);
    let mut c = vec![[0.0; 2]; n];
    for (j, cj) in c.iter_mut().enumerate() {
        for (rr, out) in cj.iter_mut().enumerate() {
            let mut m = [[0.0; 2]; 2];
            m[rr] = [beta_int.x, beta_int.y];
            let tr = m[0][0] + m[1][1];
            m[0][0] -= 0.5 * tr;
            m[1][1] -= 0.5 * tr;
            *out = c_nu
                * (m[0][0] * pi[0][j] + m[0][1] * pi[1][j] + m[1][0] * pi[2][j] + m[1][1] * pi[3][j]);
        }
    }

    let kappa_area = case.params.kappa * area;
    let d = [[kappa_area, 0.0], [0.0, kappa_area]];

    let mut f = Vec2::ZERO;
    for (p, w) in rule.iter() {
        f += case.f(p) * w;
    }
    let f = f * -1.0;

    let mut g = vec![0.0; n];
    for (i, &e) in ops.dofs.edges.iter().enumerate() {
        let edge = &mesh.edges()[e];
        if !edge.is_boundary() {
            continue;
        }
        if edge.marker != DIRICHLET_MARKER {
            return Err(AssemblyError::UnsupportedBoundary {
                edge: e,
                marker: edge.marker,
            });
        }
        let le = &ops.geom.edges[i];
        let mut acc = Vec2::ZERO;
        for (p, w) in edge_rule(le.start, le.end, case.error_degree).iter() {
            acc += case.g(p) * w;
        }
        let acc = acc * (1.0 / le.length);
        g[2 * i] = acc.x;
        g[2 * i + 1] = acc.y;
    }

    let t = ops.trace_row();
    Ok(LocalForms {
        ops,
        a,
        s,
        b,
        c,
        d,
        f,
        g,
        t,
    })
}

/// Local forms of every element, computed in parallel and returned in cell order.
pub fn all_local_forms(
    mesh: &PolyMesh,
    case: &OseenCase,
    options: AssemblyOptions,
) -> Result<Vec<LocalForms>, AssemblyError> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| local_forms(mesh, c, case, options))
        .collect()
}

/// Sparse saddle-point system in compressed-column form with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub n_sigma: usize,
    pub n_u: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
    /// DOFs of the interpolated identity tensor, which spans the kernel of
    /// the system without its multiplier row and column.
    pub trace_kernel: Option<Vec<f64>>,
}

impl SaddleSystem {
    pub fn dim(&self) -> usize {
        self.n_sigma + self.n_u + 1
    }

    pub fn multiplier_index(&self) -> usize {
        self.n_sigma + self.n_u
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Builds the compressed-column form from triplets. Duplicates are summed
    /// in input order, so the result is reproducible.
    pub fn from_triplets(
        n_sigma: usize,
        n_u: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        rhs: Vec<f64>,
    ) -> Self {
        let dim = n_sigma + n_u + 1;
        triplets.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; dim + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        SaddleSystem {
            n_sigma,
            n_u,
            col_ptr,
            row_idx,
            values,
            rhs,
            trace_kernel: None,
        }
    }

    /// Iterator over stored `(row, col, value)` entries in column order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
        y
    }

    /// Dense row-major copy; intended for small systems.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for (r, c, v) in self.entries() {
            m[r * n + c] += v;
        }
        m
    }

    /// `max |a_ij − a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut map = std::collections::HashMap::with_capacity(self.nnz());
        for (r, c, v) in self.entries() {
            map.insert((r, c), v);
        }
        map.iter()
            .map(|(&(r, c), &v)| (v - map.get(&(c, r)).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `row col value` lines (0-based indices), preceded by a
    /// `rows cols nnz` header line.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.dim(), self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        w.flush()
    }
}

/// Scatters local forms into the global system.
pub fn assemble_global(mesh: &PolyMesh, locals: &[LocalForms]) -> Result<SaddleSystem, AssemblyError> {
    if locals.len() != mesh.n_cells() {
        return Err(AssemblyError::DofMap(format!(
            "{} local forms for {} cells",
            locals.len(),
            mesh.n_cells()
        )));
    }
    let n_sigma = 2 * mesh.n_edges();
    let n_u = 2 * mesh.n_cells();
    let lam = n_sigma + n_u;
    let mut rhs = vec![0.0; lam + 1];
    let cap: usize = locals
        .iter()
        .map(|l| {
            let n = l.n_dofs();
            n * n + 6 * n + 2
        })
        .sum();
    let mut trip = Vec::with_capacity(cap);

    for (cell, lf) in locals.iter().enumerate() {
        if lf.cell() != cell {
            return Err(AssemblyError::DofMap(format!(
                "local forms at position {cell} belong to cell {}",
                lf.cell()
            )));
        }
        let dofs = &lf.ops.dofs;
        if dofs.edges.as_slice() != mesh.cell_edges(cell).iter().map(|e| e.edge).collect::<Vec<_>>() {
            return Err(AssemblyError::DofMap(format!("edge list of cell {cell} differs from the mesh")));
        }
        let n = lf.n_dofs();
        let glob: Vec<(usize, f64)> = (0..n).map(|l| dofs.global(l)).collect();
        let u0 = n_sigma + 2 * cell;
        for i in 0..n {
            let (gi, si) = glob[i];
            for j in 0..n {
                let (gj, sj) = glob[j];
                trip.push((gi, gj, si * sj * lf.a[i * n + j]));
            }
            for r in 0..2 {
                // Row τ_i, column u_r: b(τ, u) + c(u, τ).
                trip.push((gi, u0 + r, si * (lf.b[r][i] + lf.c[i][r])));
                trip.push((u0 + r, gi, si * lf.b[r][i]));
            }
            trip.push((gi, lam, si * lf.t[i]));
            trip.push((lam, gi, si * lf.t[i]));
            rhs[gi] += si * lf.g[i];
        }
        for r in 0..2 {
            for q in 0..2 {
                if lf.d[r][q] != 0.0 {
                    trip.push((u0 + r, u0 + q, -lf.d[r][q]));
                }
            }
        }
        rhs[u0] = lf.f.x;
        rhs[u0 + 1] = lf.f.y;
    }
    let mut system = SaddleSystem::from_triplets(n_sigma, n_u, trip, rhs);
    let vs = mesh.vertices();
    let mut kernel = vec![0.0; n_sigma];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let n = (vs[b] - vs[a]).rot_cw();
        kernel[2 * e] = n.x;
        kernel[2 * e + 1] = n.y;
    }
    system.trace_kernel = Some(kernel);
    Ok(system)
}

/// Local forms followed by the global scatter.
pub fn assemble(mesh: &PolyMesh, case: &OseenCase, options: AssemblyOptions) -> Result<SaddleSystem, AssemblyError> {
    let locals = all_local_forms(mesh, case, options)?;
    assemble_global(mesh, &locals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rect, Tensor2};
    use crate::mesh::{generate_mesh, MeshFamily};
    use crate::problems::{build_case, CaseTag, Overrides};
    use rand::{Rng, SeedableRng};

    fn unit_cell() -> PolyMesh {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        PolyMesh::new(v, vec![vec![0, 1, 2, 3]]).unwrap()
    }

    fn two_cells() -> PolyMesh {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        PolyMesh::new(v, vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]]).unwrap()
    }

    fn case(tag: CaseTag, o: Overrides) -> OseenCase {
        build_case(tag, o).unwrap()
    }

    #[test]
    fn system_dimensions() {
        let c = case(CaseTag::Patch, Overrides::default());
        let s = assemble(&unit_cell(), &c, AssemblyOptions::default()).unwrap();
        assert_eq!(s.dim(), 11);
        let s = assemble(&two_cells(), &c, AssemblyOptions::default()).unwrap();
        assert_eq!(s.dim(), 19);
    }

    #[test]
    fn reaction_block_and_interior_load() {
        let c = case(CaseTag::Test2, Overrides { kappa: Some(2.0), ..Default::default() });
        let lf = local_forms(&unit_cell(), 0, &c, AssemblyOptions::default()).unwrap();
        assert_eq!(lf.d, [[2.0, 0.0], [0.0, 2.0]]);
        let m = generate_mesh(MeshFamily::Squares, 4, Rect::unit_square()).unwrap();
        // Cell 5 is interior for a 4 × 4 grid.
        let lf = local_forms(&m, 5, &c, AssemblyOptions::default()).unwrap();
        assert!(lf.g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn consistency_on_constant_tensors() {
        let c = case(CaseTag::Test1, Overrides { nu: Some(0.3), ..Default::default() });
        let m = generate_mesh(MeshFamily::NonConvex, 3, Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for stab in [Stabilization::Calibrated, Stabilization::Paper5, Stabilization::Scaled] {
            let opts = AssemblyOptions { stabilization: stab, ..Default::default() };
            for cell in 0..m.n_cells() {
                let lf = local_forms(&m, cell, &c, opts).unwrap();
                let cs = Tensor2::from_flat(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
                let ct = Tensor2::from_flat(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
                let (ds, dt) = (lf.ops.dofs_of_constant(&cs), lf.ops.dofs_of_constant(&ct));
                let want = lf.ops.geom.area / 0.3 * cs.deviator().ddot(&ct.deviator());
                assert!((lf.a_form(&ds, &dt) - want).abs() < 1e-12 * (1.0 + want.abs()));
                assert!(bilinear(&lf.s, &ds, &ds).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stability_kernel() {
        let c = case(CaseTag::Test1, Overrides::default());
        let m = generate_mesh(MeshFamily::Voronoi, 12, Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for cell in 0..m.n_cells() {
            let lf = local_forms(&m, cell, &c, AssemblyOptions::default()).unwrap();
            let n = lf.n_dofs();
            for _ in 0..100 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(lf.a_form(&v, &v) > 0.0);
            }
            // Pure trace: constant multiple of the identity lies in the kernel.
            let id = lf.ops.dofs_of_constant(&Tensor2::IDENTITY);
            assert!(lf.a_form(&id, &id).abs() < 1e-12);
            for i in 0..n {
                for j in 0..n {
                    assert!((lf.a[i * n + j] - lf.a[j * n + i]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn divergence_block_matches_divergence_theorem() {
        let c = case(CaseTag::Test2, Overrides::default());
        let m = generate_mesh(MeshFamily::Hexagons, 4, Rect::unit_square()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for cell in 0..m.n_cells() {
            let lf = local_forms(&m, cell, &c, AssemblyOptions::default()).unwrap();
            let v: Vec<f64> = (0..lf.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let div = lf.ops.divergence(&v) * lf.ops.geom.area;
            let b0: f64 = lf.b[0].iter().zip(&v).map(|(a, b)| a * b).sum();
            let b1: f64 = lf.b[1].iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((b0 - div.x).abs() < 1e-14 && (b1 - div.y).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_without_convection() {
        let c = case(CaseTag::Test2, Overrides { beta: Some(Vec2::ZERO), ..Default::default() });
        for fam in MeshFamily::ALL {
            let m = generate_mesh(fam, 4, Rect::unit_square()).unwrap();
            let s = assemble(&m, &c, AssemblyOptions::default()).unwrap();
            assert!(s.max_asymmetry() < 1e-13, "{fam}");
        }
        let c = case(CaseTag::Test2, Overrides::default());
        let m = generate_mesh(MeshFamily::Squares, 4, Rect::unit_square()).unwrap();
        assert!(assemble(&m, &c, AssemblyOptions::default()).unwrap().max_asymmetry() > 1e-3);
    }

    #[test]
    fn calibrated_stabilization_matches_l2_on_square() {
        let m = unit_cell();
        let c = case(CaseTag::Patch, Overrides::default());
        let opts = AssemblyOptions {
            stabilization: Stabilization::Calibrated,
            ..Default::default()
        };
        let lf = local_forms(&m, 0, &c, opts).unwrap();
        let field = crate::vemspace::interpolate_tensor(&m, |x| Tensor2::new(x.x - 0.5, 0.0, 0.0, 0.0));
        let v = field.local(&lf.ops.dofs);
        assert!(lf.ops.project(&v).max_abs() < 1e-14);
        assert!((bilinear(&lf.s, &v, &v) - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn variant_names() {
        assert_eq!("scaled".parse::<Stabilization>().unwrap(), Stabilization::Scaled);
        assert_eq!(Stabilization::default().name(), "calibrated");
        assert_eq!("c_nu_off".parse::<ConvectiveScaling>().unwrap(), ConvectiveScaling::Unit);
        assert!("bogus".parse::<Stabilization>().is_err());
    }

    #[test]
    fn coordinate_dump() {
        let c = case(CaseTag::Patch, Overrides::default());
        let s = assemble(&unit_cell(), &c, AssemblyOptions::default()).unwrap();
        let mut buf = Vec::new();
        s.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("11 11 {}", s.nnz()));
        assert_eq!(lines.count(), s.nnz());
    }

    #[test]
    fn rejects_mismatched_locals() {
        let c = case(CaseTag::Patch, Overrides::default());
        let m = two_cells();
        let mut locals = all_local_forms(&m, &c, AssemblyOptions::default()).unwrap();
        locals.swap(0, 1);
        assert!(matches!(assemble_global(&m, &locals), Err(AssemblyError::DofMap(_))));
        locals.pop();
        assert!(matches!(assemble_global(&m, &locals), Err(AssemblyError::DofMap(_))));
    }
}
