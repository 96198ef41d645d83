use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudovem::experiment::{self, export_fields, recompute_rates, run_level, write_csv, ExperimentError, LevelRun};
use pseudovem::mesh::{load_mesh, save_mesh, validate_mesh, PolyMesh};
use pseudovem::problems::ProblemError;
use pseudovem::{build_case, generate_mesh_seeded, MeshFamily, Rect, RunConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_RESIDUAL: u8 = 4;

#[derive(Parser)]
#[command(name = "pseudovem", version, about = "Mixed virtual element solver for the generalized Oseen problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, save or check polygonal meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Run a convergence sweep described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the `output` key of the config.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Solve one level and write the fields as a VTK file.
    Export {
        config: PathBuf,
        /// Resolution to solve at; defaults to the last refinement level.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the rate columns of a convergence CSV.
    Rates {
        input: PathBuf,
        /// Where to write the result; the input is rewritten when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshSpec {
    /// t1..t6 or a family name.
    #[arg(long, default_value = "t2")]
    family: MeshFamily,
    #[arg(long)]
    n: usize,
    /// Domain as `x0,x1,y0,y1`.
    #[arg(long, default_value = "0,1,0,1", value_parser = parse_rect)]
    domain: Rect,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

impl MeshSpec {
    fn build(&self) -> Result<PolyMesh, String> {
        let seed = self.seed.unwrap_or(pseudovem::mesh::DEFAULT_MESH_SEED);
        generate_mesh_seeded(self.family, self.n, self.domain, seed).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Print a summary of a generated mesh.
    Generate(MeshSpec),
    /// Generate a mesh and write it to a file.
    Save {
        #[command(flatten)]
        spec: MeshSpec,
        path: PathBuf,
    },
    /// Check the regularity conditions of a mesh file.
    Validate {
        path: PathBuf,
        /// Minimum ratio of edge length to element diameter. Voronoi meshes
        /// routinely have edges a few hundred times shorter than the cell.
        #[arg(long, default_value_t = 1e-3)]
        c: f64,
        /// Minimum star-shapedness radius over element diameter.
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
    },
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x0, x1, y0, y1] if x1 > x0 && y1 > y0 => Ok(Rect::new(x0, x1, y0, y1)),
        [_, _, _, _] => Err("need x0 < x1 and y0 < y1".into()),
        _ => Err("expected four numbers `x0,x1,y0,y1`".into()),
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    match t.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn exit_code(e: &ExperimentError) -> u8 {
    match e {
        ExperimentError::Config(_) => EXIT_CONFIG,
        ExperimentError::Problem(ProblemError::ResidualCheck { .. }) => EXIT_RESIDUAL,
        ExperimentError::Problem(_) => EXIT_CONFIG,
        ExperimentError::Solver { .. } => EXIT_SOLVER,
        _ => EXIT_FAILURE,
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

fn run(config: &Path, output: Option<PathBuf>, quiet: bool) -> Result<(), Failure> {
    let mut cfg = read_config(config)?;
    if let Some(o) = output {
        cfg.output = o;
    }
    if !quiet {
        println!("{:>6} {:>10} {:>11} {:>11} {:>11} {:>10}", "n", "h", "e_u", "e_sigma", "e_p", "dofs");
    }
    let progress = |l: &LevelRun| {
        if !quiet {
            let r = &l.record;
            println!(
                "{:>6} {:>10.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>10}",
                l.n,
                r.h,
                r.e_u,
                r.e_sigma,
                r.e_p,
                r.n_sigma_dofs + r.n_u_dofs
            );
        }
    };
    let out = experiment::run_experiment(&cfg, progress)?;
    if !quiet {
        println!();
        println!("{:>10} {:>8} {:>8} {:>8}", "h", "r_u", "r_sigma", "r_p");
        for r in &out.records {
            println!("{:>10.4e} {:>8} {:>8} {:>8}", r.h, fmt_rate(r.r_u), fmt_rate(r.r_sigma), fmt_rate(r.r_p));
        }
        println!("wrote {} and {}", out.csv_path.display(), out.metadata_path.display());
    }
    Ok(())
}

fn export(config: &Path, n: Option<usize>, out: &Path) -> Result<(), Failure> {
    let cfg = read_config(config)?;
    let n = n.or_else(|| cfg.refinements.last().copied()).unwrap_or(1);
    let case = build_case(cfg.test, cfg.overrides).map_err(ExperimentError::from)?;
    let level = run_level(&case, &cfg, n, None)?;
    let sol = level.solution(&case).map_err(ExperimentError::from)?;
    export_fields(&sol, out)?;
    println!("wrote {} ({} cells)", out.display(), level.mesh.n_cells());
    Ok(())
}

fn rates(input: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let records = recompute_rates(input)?;
    let target = out.unwrap_or(input);
    let io_fail = |e: io::Error| Failure::new(EXIT_FAILURE, format!("{}: {e}", target.display()));
    let file = File::create(target).map_err(io_fail)?;
    let timings = records.iter().any(|r| r.t_assemble_s != 0.0 || r.t_solve_s != 0.0);
    write_csv(BufWriter::new(file), &records, timings).map_err(io_fail)?;
    Ok(())
}

fn mesh(cmd: MeshCommand) -> Result<(), Failure> {
    let summary = |m: &PolyMesh| {
        println!(
            "cells {}  vertices {}  edges {} ({} on boundary)  h {:.6e}  area {:.6e}",
            m.n_cells(),
            m.n_vertices(),
            m.n_edges(),
            m.n_boundary_edges(),
            m.mesh_size(),
            m.total_area()
        );
    };
    match cmd {
        MeshCommand::Generate(spec) => {
            let m = spec.build().map_err(|e| Failure::new(EXIT_CONFIG, e))?;
            summary(&m);
        }
        MeshCommand::Save { spec, path } => {
            let m = spec.build().map_err(|e| Failure::new(EXIT_CONFIG, e))?;
            save_mesh(&m, &path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
            summary(&m);
        }
        MeshCommand::Validate { path, c, eta } => {
            let m = load_mesh(&path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
            summary(&m);
            let r = validate_mesh(&m, c, eta);
            println!("min edge ratio {:.4}  min star radius {:.4}", r.min_edge_ratio, r.min_star_radius);
            if !r.passed() {
                return Err(Failure::new(
                    EXIT_FAILURE,
                    format!(
                        "{} cells below edge ratio {c}, {} cells below star radius {eta}",
                        r.edge_ratio_violations.len(),
                        r.star_violations.len()
                    ),
                ));
            }
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(cmd) => mesh(cmd),
        Command::Run { config, output, quiet } => run(&config, output, quiet),
        Command::Export { config, n, out } => export(&config, n, &out),
        Command::Rates { input, out } => rates(&input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
