//! Command-line interface: mesh generation, exact cohomology tables, the full
//! verification battery, linearized torsion/curvature computations, and
//! matrix export.
//!
//! Exit codes: 0 on success, 1 when a mathematical check fails, 2 on usage or
//! input-format errors.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use regge::assembly::{assemble_complex, write_matrix_market, Assembler, ComplexId};
use regge::cartan::{CartanOps, Field, PotentialResult};
use regge::homology::de_rham_betti;
use regge::mesh::{generate_mesh, parse_mesh, write_mesh, MeshKind, SimplicialComplex3};
use regge::rational::fmt_q;
use regge::verify::{expected_cohomology, run_all};

#[derive(Parser)]
#[command(
    name = "regge",
    version,
    about = "Exact discrete elasticity and de Rham complexes on tetrahedral meshes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mesh utilities
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// Compute the cohomology table of one complex and compare with theory
    Cohomology(CohomologyArgs),
    /// Run verification checks and report a machine-readable verdict
    Verify(VerifyArgs),
    /// Linearized torsion/curvature operations on coefficient fields
    Cartan(CartanArgs),
    /// Export one differential as a MatrixMarket file with rational entries
    ExportMatrix(ExportArgs),
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Generate a built-in mesh and print its counts
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// single reference tetrahedron
    Tet,
    /// box of unit cubes, each split into six tetrahedra (needs --n)
    Box,
    /// 3x3x1 box with the center cube removed
    Tunnel,
    /// 3x3x3 box with the center cube removed
    Cavity,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// box subdivisions NX NY NZ (box kind only)
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
    n: Option<Vec<usize>>,
    /// write the mesh file here (prints counts either way)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct CohomologyArgs {
    /// mesh file produced by `mesh gen --out`
    #[arg(long)]
    mesh: String,
    /// complex identifier (regge, twisted, vh_row, wh_row, x_rm, rm_aux,
    /// ned, nedc, p1n, p0n, hessian, whitney)
    #[arg(long)]
    complex: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    mesh: String,
    /// run every check (default when no --check is given)
    #[arg(long)]
    all: bool,
    /// run only checks whose id starts with this prefix (repeatable)
    #[arg(long)]
    check: Vec<String>,
    /// seed for the randomized identity and injectivity checks
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CartanArgs {
    #[arg(long)]
    mesh: String,
    /// coframe perturbation field file (forward mode, with --gamma)
    #[arg(long)]
    theta: Option<String>,
    /// connection perturbation field file (forward mode, with --theta)
    #[arg(long)]
    gamma: Option<String>,
    /// torsion field file (solve mode, with --curvature and --solve)
    #[arg(long)]
    torsion: Option<String>,
    /// curvature field file (solve mode)
    #[arg(long)]
    curvature: Option<String>,
    /// metric perturbation by edge values; outputs its linearized curvature
    #[arg(long)]
    metric: Option<String>,
    /// reconstruct a potential for the given torsion/curvature pair
    #[arg(long)]
    solve: bool,
    /// write the JSON result here instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    mesh: String,
    #[arg(long)]
    complex: String,
    /// which differential, counting from 0
    #[arg(long)]
    degree: usize,
    #[arg(long)]
    out: Option<String>,
}

/// An error that should surface as a usage/input problem (exit code 2).
struct UsageError(String);

macro_rules! usage_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for UsageError {
            fn from(e: $ty) -> Self {
                UsageError(e.to_string())
            }
        }
    )*};
}

usage_from!(
    regge::mesh::MeshError,
    regge::assembly::AssemblyError,
    regge::cartan::CartanError
);

fn load_mesh(path: &str) -> Result<SimplicialComplex3, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}")))?;
    parse_mesh(&text).map_err(|e| UsageError(format!("{path}: {e}")))
}

fn load_field(path: &str) -> Result<Field, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}")))?;
    Field::from_json(&text).map_err(|e| UsageError(format!("{path}: {e}")))
}

fn emit(out: &Option<String>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| UsageError(format!("{path}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_mesh_gen(args: &GenArgs) -> Result<ExitCode, UsageError> {
    let kind = match (args.kind, &args.n) {
        (KindArg::Tet, None) => MeshKind::Tet,
        (KindArg::Box, Some(n)) => MeshKind::Box(n[0], n[1], n[2]),
        (KindArg::Tunnel, None) => MeshKind::Tunnel,
        (KindArg::Cavity, None) => MeshKind::Cavity,
        (KindArg::Box, None) => return Err(UsageError("--kind box requires --n NX NY NZ".into())),
        (_, Some(_)) => return Err(UsageError("--n is only valid with --kind box".into())),
    };
    let mesh = generate_mesh(kind)?;
    println!(
        "vertices {} edges {} faces {} tets {}",
        mesh.points.len(),
        mesh.num_edges(),
        mesh.faces.len(),
        mesh.num_tets()
    );
    println!(
        "interior: vertices {} edges {} faces {}",
        mesh.interior_vertices().len(),
        mesh.interior_edges().len(),
        mesh.interior_faces().len()
    );
    if let Some(path) = &args.out {
        fs::write(path, write_mesh(&mesh)).map_err(|e| UsageError(format!("{path}: {e}")))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CohomologyVerdict {
    complex: String,
    space_dims: Vec<usize>,
    cohomology: Vec<usize>,
    expected: Option<Vec<usize>>,
    pass: bool,
}

fn cmd_cohomology(args: &CohomologyArgs) -> Result<ExitCode, UsageError> {
    let id = ComplexId::parse(&args.complex)
        .ok_or_else(|| UsageError(format!("unknown complex `{}`", args.complex)))?;
    let mesh = load_mesh(&args.mesh)?;
    let asm = Assembler::new(&mesh);
    let complex = assemble_complex(id, &asm)?;
    let report = complex.cohomology();
    let betti = de_rham_betti(&mesh);
    let expected = expected_cohomology(id, &mesh, &betti).ok();
    let pass = expected.as_ref().is_none_or(|e| *e == report.cohomology);
    let verdict = CohomologyVerdict {
        complex: id.as_str().to_string(),
        space_dims: report.space_dims,
        cohomology: report.cohomology,
        expected,
        pass,
    };
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&verdict).unwrap()),
        Format::Text => {
            println!("complex {}", verdict.complex);
            println!("space dims {:?}", verdict.space_dims);
            println!("cohomology {:?}", verdict.cohomology);
            match &verdict.expected {
                Some(e) => println!("expected   {e:?}"),
                None => println!("expected   (no closed-form prediction)"),
            }
            println!("{}", if verdict.pass { "PASS" } else { "FAIL" });
        }
    }
    Ok(if verdict.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, UsageError> {
    let mesh = load_mesh(&args.mesh)?;
    let mut report = run_all(&mesh, &args.mesh, args.seed);
    if !args.check.is_empty() {
        report
            .checks
            .retain(|c| args.check.iter().any(|p| c.id.starts_with(p.as_str())));
        if report.checks.is_empty() {
            return Err(UsageError(format!(
                "no check matches any of {:?}",
                args.check
            )));
        }
        report.all_passed = report.checks.iter().all(|c| c.passed);
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Text => {
            println!("mesh {} betti {:?}", report.mesh, report.betti);
            for c in &report.checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.detail
                );
            }
        }
    }
    Ok(if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct ForwardOutput {
    torsion: serde_json::Value,
    curvature: serde_json::Value,
}

fn field_value(f: &Field) -> serde_json::Value {
    serde_json::from_str(&f.to_json()).unwrap()
}

fn cmd_cartan(args: &CartanArgs) -> Result<ExitCode, UsageError> {
    let mesh = load_mesh(&args.mesh)?;
    let asm = Assembler::new(&mesh);
    let ops = CartanOps::new(&asm)?;

    if let Some(metric_path) = &args.metric {
        let metric = load_field(metric_path)?;
        let curv = ops.regge_metric_curvature(&metric)?;
        emit(&args.out, &curv.to_json())?;
        return Ok(ExitCode::SUCCESS);
    }

    if args.solve {
        let (tp, cp) = match (&args.torsion, &args.curvature) {
            (Some(t), Some(c)) => (t, c),
            _ => return Err(UsageError("--solve needs --torsion and --curvature".into())),
        };
        let t = load_field(tp)?;
        let r = load_field(cp)?;
        let result = ops.potential_solve(&t, &r)?;
        let (text, code) = match result {
            PotentialResult::Solution { theta, gamma } => {
                let v = serde_json::json!({
                    "status": "solution",
                    "theta": field_value(&theta),
                    "gamma": field_value(&gamma),
                });
                (serde_json::to_string_pretty(&v).unwrap(), ExitCode::SUCCESS)
            }
            PotentialResult::NoSolution {
                residual,
                certificate,
            } => {
                let v = serde_json::json!({
                    "status": "no_solution",
                    "residual": residual.as_ref().map(field_value),
                    "certificate": certificate
                        .map(|c| c.iter().map(fmt_q).collect::<Vec<_>>()),
                });
                (serde_json::to_string_pretty(&v).unwrap(), ExitCode::FAILURE)
            }
        };
        emit(&args.out, &text)?;
        return Ok(code);
    }

    let (tp, gp) = match (&args.theta, &args.gamma) {
        (Some(t), Some(g)) => (t, g),
        _ => {
            return Err(UsageError(
                "need --theta and --gamma, or --solve with --torsion and --curvature, \
                 or --metric"
                    .into(),
            ))
        }
    };
    let theta = load_field(tp)?;
    let gamma = load_field(gp)?;
    let (t, r) = ops.torsion_curvature(&theta, &gamma)?;
    let out = ForwardOutput {
        torsion: field_value(&t),
        curvature: field_value(&r),
    };
    emit(&args.out, &serde_json::to_string_pretty(&out).unwrap())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(args: &ExportArgs) -> Result<ExitCode, UsageError> {
    let id = ComplexId::parse(&args.complex)
        .ok_or_else(|| UsageError(format!("unknown complex `{}`", args.complex)))?;
    let mesh = load_mesh(&args.mesh)?;
    let asm = Assembler::new(&mesh);
    let complex = assemble_complex(id, &asm)?;
    let m = complex.d.get(args.degree).ok_or_else(|| {
        UsageError(format!(
            "complex `{}` has differentials 0..{}, got degree {}",
            id.as_str(),
            complex.d.len() - 1,
            args.degree
        ))
    })?;
    emit(&args.out, &write_matrix_market(m))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Mesh {
            cmd: MeshCmd::Gen(args),
        } => cmd_mesh_gen(args),
        Cmd::Cohomology(args) => cmd_cohomology(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Cartan(args) => cmd_cartan(args),
        Cmd::ExportMatrix(args) => cmd_export(args),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
