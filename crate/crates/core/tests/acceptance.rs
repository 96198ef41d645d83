//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use pseudovem::experiment::{run_level, LevelRun};
use pseudovem::geom::{Rect, Tensor2, Vec2};
use pseudovem::mesh::{generate_mesh_seeded, MeshFamily, PolyMesh};
use pseudovem::polybasis::polygon_rule;
use pseudovem::postprocess::{convergence_rates, ConvergenceRecord};
use pseudovem::problems::{build_unchecked, residual_check, CaseTag, OseenCase, Overrides};
use pseudovem::vemspace::{div_from_dofs, interpolate_tensor, interpolate_tensor_with_degree, pi_projection, LocalOperators, VirtualTensorField};
use pseudovem::{build_case, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Every solve of the suite, kept for the zero-mean check.
#[derive(Default)]
struct Solves {
    worst_trace: f64,
    worst_pressure: f64,
    count: usize,
}

impl Solves {
    fn record(&mut self, run: &LevelRun) {
        self.worst_trace = self.worst_trace.max(run.trace_integral.abs() / run.sigma_norm);
        self.worst_pressure = self.worst_pressure.max(run.pressure_integral.abs());
        self.count += 1;
    }
}

fn sweep(test: CaseTag, family: MeshFamily, ns: &[usize], overrides: Overrides, solves: &mut Solves) -> Vec<ConvergenceRecord> {
    let case = build_case(test, overrides).expect("case builds");
    let mut cfg = RunConfig::new(test, family);
    cfg.overrides = overrides;
    let mut records: Vec<ConvergenceRecord> = ns
        .iter()
        .map(|&n| {
            let run = run_level(&case, &cfg, n, None).expect("level solves");
            solves.record(&run);
            run.record
        })
        .collect();
    convergence_rates(&mut records).expect("rates");
    records
}

fn rates_in(records: &[ConvergenceRecord], lo: f64, hi: f64) -> (bool, Vec<[f64; 3]>) {
    let last: Vec<[f64; 3]> = records[records.len() - 3..]
        .iter()
        .map(|r| [r.r_u.unwrap_or(f64::NAN), r.r_sigma.unwrap_or(f64::NAN), r.r_p.unwrap_or(f64::NAN)])
        .collect();
    let ok = last.iter().flatten().all(|r| (lo..=hi).contains(r));
    (ok, last)
}

fn fmt_rates(rows: &[[f64; 3]]) -> String {
    rows.iter()
        .map(|r| format!("({:.3} {:.3} {:.3})", r[0], r[1], r[2]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Test 1 on T1 and T2, six levels down to h ≈ 0.015.
fn criterion_1(solves: &mut Solves) -> Verdict {
    let t0 = Instant::now();
    let ns = [48, 64, 96, 128, 160, 192];
    let mut pass = true;
    let mut detail = String::new();
    for family in [MeshFamily::Triangles, MeshFamily::Squares] {
        let recs = sweep(CaseTag::Test1, family, &ns, Overrides::default(), solves);
        let (ok, last) = rates_in(&recs, 0.90, 1.10);
        pass &= ok;
        detail += &format!("{family} h={:.4} r(u,σ,p) {}; ", recs.last().unwrap().h, fmt_rates(&last));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    detail += &format!("{secs:.0} s");
    Verdict { pass, detail }
}

/// Test 1 on T2 with cell side 0.05.
fn criterion_2(solves: &mut Solves) -> Verdict {
    let r = &sweep(CaseTag::Test1, MeshFamily::Squares, &[40], Overrides::default(), solves)[0];
    let (ref_u, ref_s) = (0.0530, 0.0606);
    let within = |e: f64, r: f64| e <= 3.0 * r && e >= r / 3.0;
    Verdict {
        pass: within(r.e_u, ref_u) && within(r.e_sigma, ref_s),
        detail: format!("side 0.05 (diameter {:.4}): e(u)={:.4} vs {ref_u}, e(σ)={:.4} vs {ref_s}", r.h, r.e_u, r.e_sigma),
    }
}

fn criterion_3(solves: &mut Solves) -> Verdict {
    let mut worst: f64 = 0.0;
    for family in MeshFamily::ALL {
        for n in [2, 4] {
            let r = &sweep(CaseTag::Patch, family, &[n], Overrides::default(), solves)[0];
            worst = worst.max(r.e_u).max(r.e_sigma).max(r.e_p);
        }
    }
    Verdict {
        pass: worst <= 1e-9,
        detail: format!("max error over 6 families, n ∈ {{2,4}}: {worst:.2e}"),
    }
}

fn random_element(rng: &mut ChaCha8Rng, family: MeshFamily) -> (PolyMesh, usize) {
    let n = match family {
        MeshFamily::Voronoi => rng.gen_range(4..80),
        MeshFamily::Hexagons => rng.gen_range(2..10),
        _ => rng.gen_range(1..12),
    };
    let (x0, y0) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let domain = Rect::new(x0, x0 + rng.gen_range(0.2..3.0), y0, y0 + rng.gen_range(0.2..3.0));
    let mesh = generate_mesh_seeded(family, n, domain, rng.gen()).expect("mesh");
    let cell = rng.gen_range(0..mesh.n_cells());
    (mesh, cell)
}

/// Flux sum over the boundary of `cell`, orienting each edge from the cell's
/// own vertex loop rather than from the stored edge signs.
fn boundary_flux(mesh: &PolyMesh, field: &VirtualTensorField, cell: usize) -> Vec2 {
    let verts = mesh.vertices();
    let loop_ = mesh.cell(cell);
    let mut sum = Vec2::ZERO;
    for i in 0..loop_.len() {
        let (a, b) = (loop_[i], loop_[(i + 1) % loop_.len()]);
        let (e, edge) = mesh
            .edges()
            .iter()
            .enumerate()
            .find(|(_, e)| e.vertices == [a, b] || e.vertices == [b, a])
            .expect("edge present");
        let outward = (verts[b] - verts[a]).rot_cw();
        let global = (verts[edge.vertices[1]] - verts[edge.vertices[0]]).rot_cw();
        let s = outward.dot(global).signum();
        sum += Vec2::new(field.values[2 * e], field.values[2 * e + 1]) * s;
    }
    sum
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let (mut div_gap, mut pi_gap, mut cd_gap) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..500 {
        let family = MeshFamily::ALL[i % MeshFamily::ALL.len()];
        let (mesh, cell) = random_element(&mut rng, family);
        let ops = LocalOperators::new(&mesh, cell).expect("operators");
        let area = ops.geom.area;

        let values: Vec<f64> = (0..2 * mesh.n_edges()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = VirtualTensorField::from_values(&mesh, values).unwrap();
        let flux = boundary_flux(&mesh, &field, cell);
        let div = div_from_dofs(&field, &mesh, cell).unwrap() * area;
        div_gap = div_gap.max((div - flux).max_abs() / flux.max_abs().max(1.0));

        let c = Tensor2::from_flat(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let pi = pi_projection(&interpolate_tensor(&mesh, |_| c), &mesh, cell).unwrap();
        let mut d = pi;
        for r in 0..2 {
            for k in 0..2 {
                d.0[r][k] -= c.0[r][k];
            }
        }
        pi_gap = pi_gap.max(d.max_abs());

        let (a, b, w) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
        let sigma = |x: Vec2| Tensor2([[(a * x.x).sin() * x.y, (b * x.y).cos() + w * x.x], [(x.x * x.y).sin(), x.y * x.y - (b * x.x).sin()]]);
        let div_sigma = |x: Vec2| {
            Vec2::new(
                a * (a * x.x).cos() * x.y - b * (b * x.y).sin(),
                x.y * (x.x * x.y).cos() + 2.0 * x.y,
            )
        };
        // Elements here reach a few units across, so both sides use rules
        // accurate enough that only the identity itself is being measured.
        let rule = polygon_rule(&ops.geom, 24).unwrap();
        let mean = Vec2::new(rule.integrate(|x| div_sigma(x).x), rule.integrate(|x| div_sigma(x).y)) * (1.0 / area);
        let dh = div_from_dofs(&interpolate_tensor_with_degree(&mesh, sigma, 24), &mesh, cell).unwrap();
        cd_gap = cd_gap.max((dh - mean).max_abs());
    }
    Verdict {
        pass: div_gap <= 1e-12 && pi_gap <= 1e-12 && cd_gap <= 1e-10,
        detail: format!("500 elements: divergence {div_gap:.1e}, Π on constants {pi_gap:.1e}, commuting diagram {cd_gap:.1e}"),
    }
}

fn criterion_5(solves: &mut Solves) -> Verdict {
    let mut eu = Vec::new();
    let mut detail = String::from("T2 n=32:");
    for kappa in [1.0, 1e2, 1e4, 1e6] {
        let o = Overrides {
            kappa: Some(kappa),
            ..Default::default()
        };
        let r = &sweep(CaseTag::Test3, MeshFamily::Squares, &[32], o, solves)[0];
        detail += &format!(" κ={kappa:.0e} e(u)={:.4} e(σ)={:.3} e(p)={:.3};", r.e_u, r.e_sigma, r.e_p);
        eu.push(r.e_u);
    }
    let ratio = eu.iter().cloned().fold(0.0, f64::max) / eu.iter().cloned().fold(f64::INFINITY, f64::min);
    Verdict {
        pass: ratio < 2.0,
        detail: format!("{detail} e(u) max/min {ratio:.3}"),
    }
}

/// Least-squares slope of `ln e` against `ln h`.
fn slope(records: &[ConvergenceRecord], e: impl Fn(&ConvergenceRecord) -> f64) -> f64 {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.h.ln(), e(r).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Test 5 on squares over the tabulated range. The velocity and
/// pseudostress rates must trend at or above one (least-squares slope over
/// all rows) and the pressure rate must reach 1.5 on at least half the rows.
fn criterion_6(solves: &mut Solves) -> Verdict {
    let ns: Vec<usize> = (60..=200).step_by(10).collect();
    let recs = sweep(CaseTag::Test5, MeshFamily::Squares, &ns, Overrides::default(), solves);
    let (su, ss) = (slope(&recs, |r| r.e_u), slope(&recs, |r| r.e_sigma));
    let rp: Vec<f64> = recs.iter().filter_map(|r| r.r_p).collect();
    let high = rp.iter().filter(|&&r| r >= 1.5).count();
    let span = |f: &dyn Fn(&ConvergenceRecord) -> Option<f64>| {
        let v: Vec<f64> = recs.iter().filter_map(f).collect();
        let (lo, hi) = (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(0.0, f64::max));
        format!("{lo:.2}..{hi:.2}")
    };
    Verdict {
        pass: su >= 1.0 && ss >= 1.0 && 2 * high >= rp.len(),
        detail: format!(
            "slope u {su:.3}, σ {ss:.3}; r(p) ≥ 1.5 on {high}/{} rows; pairwise r(u) {}, r(σ) {}, r(p) {}",
            rp.len(),
            span(&|r| r.r_u),
            span(&|r| r.r_sigma),
            span(&|r| r.r_p)
        ),
    }
}

fn criterion_7() -> Verdict {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for tag in [CaseTag::Test1, CaseTag::Test2, CaseTag::Test3, CaseTag::Test4, CaseTag::Test5] {
        let case: OseenCase = build_unchecked(tag, Overrides::default()).unwrap();
        let r = residual_check(&case, 256).max();
        worst = worst.max(r);
        detail += &format!("{tag} {r:.1e} ");
    }
    Verdict {
        pass: worst <= 1e-6,
        detail,
    }
}

fn criterion_8(solves: &Solves) -> Verdict {
    Verdict {
        pass: solves.count > 0 && solves.worst_trace <= 1e-10 && solves.worst_pressure <= 1e-12,
        detail: format!(
            "{} solves: max |∫tr σ_h|/‖σ_h‖ {:.1e}, max |∫p_h| {:.1e}",
            solves.count, solves.worst_trace, solves.worst_pressure
        ),
    }
}

fn main() -> ExitCode {
    // Under `cargo test -- <filter>` or `--list`, behave like an empty test binary.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut solves = Solves::default();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, v: Verdict| {
        println!("criterion {id} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    };
    report(7, "manufactured residuals", criterion_7());
    report(4, "projector identities", criterion_4());
    report(3, "patch test", criterion_3(&mut solves));
    report(2, "error magnitude", criterion_2(&mut solves));
    report(5, "reaction robustness", criterion_5(&mut solves));
    report(1, "test 1 rates", criterion_1(&mut solves));
    report(6, "test 5 rates", criterion_6(&mut solves));
    report(8, "zero-mean constraints", criterion_8(&solves));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
