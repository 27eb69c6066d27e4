use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adq_core::functionals::{curvature_atoms, dual_intrinsic_volume, psi};
use adq_core::grassmann::Subspace;
use adq_core::io::{self, Body, Provenance};
use adq_core::solver::{hemisphere_check, solve_discrete_lp, solve_general, solve_symmetric, GeneralInput};
use adq_core::transforms::{bidual_intersection_radial, intersection_body_radial, section_power, tabulate};
use adq_core::{verify, Budgets, Error, SolveConfig, SolveReport, SolveStatus, StarBody};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adq", version, about = "Affine dual quermassintegrals and their Minkowski problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Minkowski problem for a discrete measure.
    Solve(SolveArgs),
    /// Evaluate functionals and transforms on a body.
    Eval(EvalArgs),
    /// Run the acceptance checks.
    Verify {
        #[arg(long)]
        filter: Option<String>,
    },
    /// Export a body as an OBJ mesh (space) or CSV polygon (plane).
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget_sphere: Option<usize>,
    #[arg(long)]
    budget_grassmann: Option<usize>,
    #[arg(long)]
    budget_sub: Option<usize>,
}

impl BudgetArgs {
    fn budgets(&self, n: usize) -> Budgets {
        let mut b = Budgets::for_dim(n);
        b.seed = self.seed;
        if let Some(v) = self.budget_sphere {
            b.sphere = v;
        }
        if let Some(v) = self.budget_grassmann {
            b.grassmann = v;
        }
        if let Some(v) = self.budget_sub {
            b.sub = v;
        }
        b
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Use the origin-symmetric solver (even measures).
    #[arg(long)]
    symmetric: bool,
    /// Route through the general solver with this discretization resolution.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Body file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file to write.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Proceed when subspace concentration fails or p is below the guaranteed range.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    budgets: BudgetArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Psi,
    Atoms,
    Vq,
    Ibody,
    Bidual,
    Profile,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    quantity: Quantity,
    #[arg(long)]
    body: PathBuf,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Exponent of the dual intrinsic volume (defaults to n).
    #[arg(long)]
    q: Option<f64>,
    /// Number of directions for radial tables.
    #[arg(long, default_value_t = 64)]
    directions: usize,
    /// CSV file for radial tables.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budgets: BudgetArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Obj,
    Csv,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Obj)]
    format: ExportFormat,
}

fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn solve_exit(err: &Error) -> u8 {
    match err {
        Error::InadmissibleMeasure { .. } => 2,
        Error::ExcludedExponent { .. } | Error::ExponentBelowGuarantee { .. } => 3,
        Error::NoConvergence(_) => 4,
        _ => 1,
    }
}

fn write_outputs(args: &SolveArgs, report: &SolveReport, budgets: Budgets) -> anyhow::Result<()> {
    if let Some(path) = &args.out {
        let prov = Provenance::new("solve", args.budgets.seed, budgets);
        write_atomic(path, &io::polytope_to_string(&report.polytope, Some(&prov)))?;
    }
    if let Some(path) = &args.report {
        write_atomic(path, &io::report_to_string(report, "solve"))?;
    }
    Ok(())
}

fn summarize(report: &SolveReport) {
    println!(
        "status {:?} after {} iterations; lagrange residual {:e}, measure residual {:e}, psi {}",
        report.status, report.iterations, report.lagrange_residual, report.measure_residual, report.psi_value
    );
    for flag in &report.flags {
        println!("flag: {flag}");
    }
    for (u, t) in report.polytope.normals().iter().zip(report.polytope.supports()) {
        println!("  {:?} -> {t}", u.coords());
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<u8> {
    let mu = io::parse_measure(&read(&args.measure)?).map_err(anyhow::Error::new)?;
    let n = mu.n();
    let budgets = args.budgets.budgets(n);
    let mut cfg = SolveConfig::new(n, args.p, args.m);
    cfg.budgets = budgets;
    cfg.seed = args.budgets.seed;
    cfg.force = args.force;
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(k) = args.max_iters {
        cfg.max_iters = k;
    }

    let hemi = hemisphere_check(&mu)?;
    if !hemi.admissible {
        let w = hemi.witness.unwrap_or_default();
        eprintln!("inadmissible measure: all atoms lie in a closed hemisphere");
        println!("witness {w:?}");
        return Ok(2);
    }

    let result = if args.symmetric {
        solve_symmetric(&mu, &cfg)
    } else if let Some(res) = args.resolution {
        solve_general(&GeneralInput::Discrete(&mu), res, &cfg)
    } else {
        solve_discrete_lp(&mu, &cfg)
    };
    match result {
        Ok(report) => {
            summarize(&report);
            write_outputs(&args, &report, budgets)?;
            Ok(match report.status {
                SolveStatus::Converged => 0,
                SolveStatus::BudgetExhausted => 4,
            })
        }
        Err(Error::NoConvergence(report)) => {
            eprintln!("solver did not converge");
            summarize(&report);
            write_outputs(&args, &report, budgets)?;
            Ok(4)
        }
        Err(e) => {
            if let Error::InadmissibleMeasure { witness: Some(w) } = &e {
                println!("witness {w:?}");
            }
            eprintln!("error: {e}");
            Ok(solve_exit(&e))
        }
    }
}

fn echo(args: &EvalArgs, b: &Budgets) {
    println!(
        "# m={} p={} seed={} budgets sphere={} grassmann={} sub={} refine={} facet_tol={:e}",
        args.m, args.p, b.seed, b.sphere, b.grassmann, b.sub, b.refine, b.facet_tol
    );
}

fn emit_table(args: &EvalArgs, rows: &[(Vec<f64>, f64)]) -> anyhow::Result<()> {
    let csv = io::radial_csv(rows)?;
    match &args.out {
        Some(path) => write_atomic(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<u8> {
    let (body, _) = io::parse_body(&read(&args.body)?)?;
    let n = body.dim();
    let b = args.budgets.budgets(n);
    let star: &(dyn StarBody + Sync) = match &body {
        Body::Polytope(p) => p,
        Body::Ball(ball) => ball,
    };
    echo(&args, &b);
    match args.quantity {
        Quantity::Psi => println!("psi {}", psi(star, args.m, &b)?),
        Quantity::Vq => {
            let q = args.q.unwrap_or(n as f64);
            println!("vq q={q} {}", dual_intrinsic_volume(star, q, &b)?);
        }
        Quantity::Atoms => {
            let Body::Polytope(p) = &body else {
                bail!("atoms need a polytope body");
            };
            let atoms = curvature_atoms(p, args.p, args.m, &b)?;
            println!("index,normal,support,mass");
            for (i, (u, mass)) in atoms.normals.iter().zip(&atoms.masses).enumerate() {
                println!("{i},{:?},{},{mass}", u.coords(), p.supports()[i]);
            }
            println!("total {}", atoms.total());
        }
        Quantity::Ibody => {
            let rows = tabulate(n, args.directions, |u| intersection_body_radial(star, u))?;
            emit_table(&args, &rows)?;
        }
        Quantity::Bidual => {
            let rows = tabulate(n, args.directions, |u| bidual_intersection_radial(star, u, args.m, b.sub.max(1)))?;
            emit_table(&args, &rows)?;
        }
        Quantity::Profile => {
            if args.m != 1 && args.m + 1 != n {
                bail!("profile tables are indexed by a direction and need m = 1 or m = n - 1");
            }
            let f = section_power(star, args.m, n as i32 - 1);
            let rows = tabulate(n, args.directions, |u| {
                let xi = if args.m == 1 { Subspace::line(u) } else { Subspace::plane_orthogonal_to(u) };
                Ok(f.eval(&xi))
            })?;
            emit_table(&args, &rows)?;
        }
    }
    Ok(0)
}

fn cmd_verify(filter: Option<String>) -> u8 {
    let results = verify::run(filter.as_deref());
    if results.is_empty() {
        eprintln!("no suite matches; suites: {}", verify::suite_names().join(", "));
        return 1;
    }
    let mut failing = Vec::new();
    for r in &results {
        println!("{}", r.line());
        if r.counts_as_failure() {
            failing.push(r.name);
        }
    }
    if failing.is_empty() {
        println!("all checks passed");
        0
    } else {
        eprintln!("failing: {}", failing.join(", "));
        1
    }
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<u8> {
    let (body, _) = io::parse_body(&read(&args.body)?)?;
    let Body::Polytope(p) = body else {
        bail!("export needs a polytope body");
    };
    let text = match (args.format, p.dim()) {
        (ExportFormat::Obj, 3) => io::mesh_to_obj(&io::polytope_mesh(&p)?),
        (ExportFormat::Obj, _) => bail!("OBJ export needs a body in space; use --format csv for polygons"),
        (ExportFormat::Csv, 2) => io::polygon_csv(&p)?,
        (ExportFormat::Csv, _) => bail!("CSV export needs a polygon"),
    };
    write_atomic(&args.out, &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Verify { filter } => Ok(cmd_verify(filter)),
        Command::Export(a) => cmd_export(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
