//! Configuration-driven convergence sweeps with CSV, metadata and field
//! output.

mod config;
mod csv;
mod vtk;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use self::config::{default_refinements, ConfigError, RunConfig, KEYS};
pub use self::csv::{read_csv, write_csv, CSV_HEADER};
pub use self::vtk::{export_fields, write_vtk, CELL_ARRAYS};

use crate::assembly::{assemble, AssemblyError};
use crate::mesh::{generate_mesh_seeded, MeshError, PolyMesh};
use crate::postprocess::{
    compute_errors, convergence_rates, ConvergenceRecord, DiscreteSolution, ErrorReport, NormPolicy, PostprocessError,
};
use crate::problems::{build_case, CaseTag, OseenCase, ProblemError};
use crate::solver::{solve, SolveReport, SolverError};

pub const CSV_FILE: &str = "convergence.csv";
pub const METADATA_FILE: &str = "metadata.txt";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("mesh generation failed at n = {n}: {source}")]
    Mesh { n: usize, source: MeshError },
    #[error("assembly failed at n = {n}: {source}")]
    Assembly { n: usize, source: AssemblyError },
    #[error("solve failed at n = {n}: {source}")]
    Solver { n: usize, source: SolverError },
    #[error(transparent)]
    Postprocess(#[from] PostprocessError),
    #[error("cannot export fields of an empty mesh")]
    EmptyMesh,
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Path { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Errors of a case are relative except where the exact field vanishes
/// identically, which only happens for the pressure of the patch case.
pub fn norm_policy(tag: CaseTag) -> NormPolicy {
    match tag {
        CaseTag::Patch => NormPolicy::AbsoluteIfZero,
        _ => NormPolicy::Relative,
    }
}

/// One solved refinement level.
#[derive(Debug)]
pub struct LevelRun {
    pub n: usize,
    pub mesh: PolyMesh,
    pub report: SolveReport,
    pub errors: ErrorReport,
    pub record: ConvergenceRecord,
    /// `∫_Ω tr σ_h` and `∫_Ω p_h` after the solve.
    pub trace_integral: f64,
    pub pressure_integral: f64,
    pub sigma_norm: f64,
}

impl LevelRun {
    pub fn solution<'a>(&'a self, case: &'a OseenCase) -> Result<DiscreteSolution<'a>, PostprocessError> {
        DiscreteSolution::from_report(&self.mesh, case, &self.report)
    }
}

/// Mesh, assemble, solve and measure one level. When `dump` is given the
/// assembled matrix is written there in coordinate format.
pub fn run_level(case: &OseenCase, config: &RunConfig, n: usize, dump: Option<&Path>) -> Result<LevelRun, ExperimentError> {
    let mesh = generate_mesh_seeded(config.family, n, case.domain, config.seed)
        .map_err(|source| ExperimentError::Mesh { n, source })?;
    let t0 = Instant::now();
    let system = assemble(&mesh, case, config.options).map_err(|source| ExperimentError::Assembly { n, source })?;
    let t_assemble_s = t0.elapsed().as_secs_f64();
    if let Some(path) = dump {
        let file = File::create(path).map_err(|source| ExperimentError::Path {
            path: path.to_path_buf(),
            source,
        })?;
        system.write_coordinate(BufWriter::new(file))?;
    }
    let t1 = Instant::now();
    let report = solve(&system).map_err(|source| ExperimentError::Solver { n, source })?;
    let t_solve_s = t1.elapsed().as_secs_f64();
    let sol = DiscreteSolution::from_report(&mesh, case, &report)?;
    let errors = compute_errors(&sol, norm_policy(case.tag))?;
    let (trace_integral, pressure_integral, sigma_norm) =
        (sol.trace_integral(), sol.pressure_integral(), sol.sigma_projection_norm());
    drop(sol);
    let record = ConvergenceRecord {
        h: mesh.mesh_size(),
        e_u: errors.e_u,
        e_sigma: errors.e_sigma,
        e_p: errors.e_p,
        e_star: errors.e_star,
        n_sigma_dofs: system.n_sigma,
        n_u_dofs: system.n_u,
        t_assemble_s,
        t_solve_s,
        ..Default::default()
    };
    Ok(LevelRun {
        n,
        mesh,
        report,
        errors,
        record,
        trace_integral,
        pressure_integral,
        sigma_norm,
    })
}

/// Key-value description of a run, written next to the CSV.
pub fn metadata(config: &RunConfig, case: &OseenCase) -> Vec<(String, String)> {
    let p = &case.params;
    let d = case.domain;
    let beta = match p.beta {
        crate::problems::Beta::Constant(b) => format!("{:e}, {:e}", b.x, b.y),
        crate::problems::Beta::Field(_) => "field".to_string(),
    };
    let refinements: Vec<String> = config.refinements.iter().map(|n| n.to_string()).collect();
    let mut m = vec![
        ("test", config.test.to_string()),
        ("family", config.family.to_string()),
        ("refinements", refinements.join(", ")),
        ("domain", format!("({:e}, {:e}) x ({:e}, {:e})", d.min.x, d.max.x, d.min.y, d.max.y)),
        ("nu", format!("{:e}", p.nu)),
        ("kappa", format!("{:e}", p.kappa)),
        ("beta", beta),
        ("stabilization", config.options.stabilization.to_string()),
        ("stabilization_factor", format!("{:e}", config.options.stabilization.factor(p.nu))),
        ("c_nu", config.options.convective.to_string()),
        ("c_nu_factor", format!("{:e}", config.options.convective.factor(p.nu))),
        ("smallness_theta", format!("{:.6e}", case.smallness())),
        ("seed", format!("{:#x}", config.seed)),
        ("velocity_space", "piecewise constants".to_string()),
        ("h_definition", "maximum element diameter".to_string()),
        ("sigma_error", "against the elementwise projection of sigma_h".to_string()),
        ("norm_policy", format!("{:?}", norm_policy(config.test))),
        ("load_degree", case.load_degree.to_string()),
        ("error_degree", case.error_degree.to_string()),
        ("timings", config.timings.to_string()),
    ];
    if config.test == CaseTag::Test1 {
        m.push(("test1_domain", "(-1, 1)^2".to_string()));
    }
    m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn write_metadata<W: Write>(mut w: W, entries: &[(String, String)]) -> io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<ConvergenceRecord>,
    pub metadata: Vec<(String, String)>,
    pub csv_path: PathBuf,
    pub metadata_path: PathBuf,
}

fn write_outputs(config: &RunConfig, records: &[ConvergenceRecord], meta: &[(String, String)]) -> Result<(PathBuf, PathBuf), ExperimentError> {
    let csv_path = config.output.join(CSV_FILE);
    let meta_path = config.output.join(METADATA_FILE);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Path { path, source }
    };
    let f = File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(BufWriter::new(f), records, config.timings).map_err(io_err(&csv_path))?;
    let f = File::create(&meta_path).map_err(io_err(&meta_path))?;
    write_metadata(BufWriter::new(f), meta).map_err(io_err(&meta_path))?;
    Ok((csv_path, meta_path))
}

/// Runs every refinement level in order, then writes the CSV and metadata
/// into `config.output`. If a level fails, the rows computed so far are still
/// written before the error is returned. `progress` is called after each
/// level.
pub fn run_experiment(config: &RunConfig, progress: impl FnMut(&LevelRun)) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let case = build_case(config.test, config.overrides)?;
    fs::create_dir_all(&config.output).map_err(|source| ExperimentError::Path {
        path: config.output.clone(),
        source,
    })?;
    let meta = metadata(config, &case);
    sweep(config, meta, |n| {
        let dump = config.dump_matrix.then(|| config.output.join(format!("matrix_n{n}.txt")));
        run_level(&case, config, n, dump.as_deref())
    }, progress)
}

fn sweep(
    config: &RunConfig,
    meta: Vec<(String, String)>,
    mut level: impl FnMut(usize) -> Result<LevelRun, ExperimentError>,
    mut progress: impl FnMut(&LevelRun),
) -> Result<ExperimentOutput, ExperimentError> {
    let mut records = Vec::with_capacity(config.refinements.len());
    for &n in &config.refinements {
        match level(n) {
            Ok(run) => {
                progress(&run);
                records.push(run.record);
            }
            Err(e) => {
                let _ = convergence_rates(&mut records);
                write_outputs(config, &records, &meta)?;
                return Err(e);
            }
        }
    }
    let rates = convergence_rates(&mut records);
    let (csv_path, metadata_path) = write_outputs(config, &records, &meta)?;
    rates?;
    Ok(ExperimentOutput {
        records,
        metadata: meta,
        csv_path,
        metadata_path,
    })
}

/// Recomputes the rate columns of a CSV file.
pub fn recompute_rates(path: &Path) -> Result<Vec<ConvergenceRecord>, ExperimentError> {
    let file = File::open(path).map_err(|source| ExperimentError::Path {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = read_csv(io::BufReader::new(file))?;
    convergence_rates(&mut records)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshFamily;

    #[test]
    fn patch_single_level() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(CaseTag::Patch, MeshFamily::Voronoi);
        cfg.refinements = vec![16];
        cfg.output = dir.path().to_path_buf();
        let out = run_experiment(&cfg, |_| {}).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert!(r.e_u.max(r.e_sigma).max(r.e_p) <= 1e-9);
        let text = fs::read_to_string(&out.csv_path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let meta = fs::read_to_string(&out.metadata_path).unwrap();
        for key in ["stabilization = calibrated", "c_nu = c_nu", "smallness_theta", "norm_policy = AbsoluteIfZero"] {
            assert!(meta.contains(key), "{key}");
        }
    }

    #[test]
    fn partial_csv_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(CaseTag::Test1, MeshFamily::Squares);
        cfg.refinements = vec![2, 4, 8];
        cfg.output = dir.path().to_path_buf();
        let case = build_case(cfg.test, cfg.overrides).unwrap();
        let meta = metadata(&cfg, &case);
        let err = sweep(
            &cfg,
            meta,
            |n| {
                if n == 8 {
                    Err(ExperimentError::Solver { n, source: SolverError::Singular { index: 3 } })
                } else {
                    run_level(&case, &cfg, n, None)
                }
            },
            |_| {},
        )
        .unwrap_err();
        assert!(matches!(err, ExperimentError::Solver { n: 8, .. }));
        let back = recompute_rates(&dir.path().join(CSV_FILE)).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[1].r_u.is_some());
    }
}
