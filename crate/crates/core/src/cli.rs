//! Command-line front end. Every subcommand writes UTF-8 CSV files into an
//! output directory together with a JSON run manifest.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    compare_meshes, convergence_study_with, csv_row, interp_study, loglog_slope, rate_reference,
    solve_on_mesh, table_sigma, MeshPair, SolveOptions, SolverMethod, StudyConfig, StudyRegion,
    CSV_HEADER,
};
use crate::interp::{error_norms_with_points, error_points, Norm, StudyTarget};
use crate::linalg::{PrecondKind, SolverConfig};
use crate::mesh::{build_1d, build_tensor_mesh, verify_mesh_properties, MeshConfig, MeshVariant};
use crate::problems::{problem_by_name, verify_coefficient_conditions, PROBLEM_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("manifest serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "layerfem", version, about = "Layer-adapted Q_k finite elements for convection-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a 1D layer-adapted mesh and check its grading properties.
    Mesh(MeshArgs),
    /// Solve one problem instance and report the errors.
    Solve(SolveArgs),
    /// Sweep eps x N and write a convergence table.
    Convergence(ConvergenceArgs),
    /// Energy errors on both mesh families over an N list.
    CompareMeshes(CompareArgs),
    /// Interpolation error rates of the layer decomposition.
    InterpStudy(InterpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Bakhvalov,
    BakhvalovShishkin,
}

impl From<VariantArg> for MeshVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Bakhvalov => MeshVariant::BakhvalovType,
            VariantArg::BakhvalovShishkin => MeshVariant::BakhvalovShishkin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Gmres,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    L2,
    H1semi,
    Energy,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeshArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    /// Grading exponent; defaults to k + 1.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Decay rate for the x-direction mesh.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Also emit a y-direction mesh with this decay rate.
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Bakhvalov)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Exit with status 1 when a property check fails.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Gmres)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub restart: usize,
    /// none, jacobi, ilu0 or ilut.
    #[arg(long, default_value = "ilut", value_parser = parse_precond)]
    #[serde(serialize_with = "ser_display")]
    pub precond: PrecondKind,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Do not retry with the direct solver when GMRES fails.
    #[arg(long)]
    pub no_fallback: bool,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, CliError> {
        let gmres = SolverConfig {
            restart: self.restart,
            tol: self.tol,
            max_iter: self.max_iter,
            precond: self.precond,
        };
        gmres
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(SolveOptions {
            method: match self.solver {
                SolverArg::Gmres => SolverMethod::Gmres,
                SolverArg::Direct => SolverMethod::Direct,
            },
            gmres,
            fallback_to_direct: !self.no_fallback,
            error_points: None,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long, default_value = "benchmark")]
    pub problem: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long = "N", default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Bakhvalov)]
    pub variant: VariantArg,
    /// Grading exponent; defaults to k + 1.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use the grading exponent fitted to the reference tables instead of k + 1.
    #[arg(long, conflicts_with = "sigma")]
    pub tuned_sigma: bool,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Check c + div(b)/2 >= gamma on a sampling grid and fail if violated.
    #[arg(long)]
    pub gamma_check: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the system matrix in MatrixMarket format.
    #[arg(long)]
    pub dump_matrix: bool,
    /// Write the GMRES residual history.
    #[arg(long)]
    pub residual_history: bool,
    /// Write nodal values `i,s,j,t,x,y,value`.
    #[arg(long)]
    pub dump_solution: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergenceArgs {
    #[arg(long, default_value = "benchmark")]
    pub problem: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Bakhvalov)]
    pub variant: VariantArg,
    /// Comma-separated; defaults to 1e-4,...,1e-8.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Vec<f64>,
    /// Comma-separated doubling sequence; defaults to 8..256 (k = 1) or 8..128.
    #[arg(long = "N-list", value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use the grading exponent fitted to the reference tables instead of k + 1.
    #[arg(long, conflicts_with = "sigma")]
    pub tuned_sigma: bool,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value = "benchmark")]
    pub problem: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long = "N-list", value_delimiter = ',', default_value = "8,16,32,64,128")]
    pub n_list: Vec<usize>,
    /// Grading exponent of the Bakhvalov-type mesh.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use the grading exponent fitted to the reference tables instead of k + 1.
    #[arg(long, conflicts_with = "sigma")]
    pub tuned_sigma: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InterpArgs {
    /// E1, E2, E12, u-lagrange, u-pi or P1.
    #[arg(long, default_value = "E1", value_parser = parse_target)]
    #[serde(serialize_with = "ser_display")]
    pub target: StudyTarget,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    pub norm: NormArg,
    /// all or outside-strip.
    #[arg(long, default_value = "all", value_parser = parse_region)]
    pub region: StudyRegion,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long = "N-list", value_delimiter = ',', default_value = "16,32,64,128")]
    pub n_list: Vec<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_precond(s: &str) -> Result<PrecondKind, String> {
    s.parse()
}

fn parse_target(s: &str) -> Result<StudyTarget, String> {
    s.parse()
}

fn parse_region(s: &str) -> Result<StudyRegion, String> {
    s.parse()
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Parameters, version and outputs of one run. Written with status
/// `incomplete` before any output and rewritten as `complete` at the end.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub version: String,
    pub timestamp: u64,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub status: String,
}

struct Run {
    dir: PathBuf,
    manifest_path: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn start<P: Serialize>(command: &str, params: &P, dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let manifest = RunManifest {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            threads: rayon::current_num_threads(),
            outputs: Vec::new(),
            status: "incomplete".into(),
        };
        let run = Self {
            dir: dir.to_path_buf(),
            manifest_path: dir.join(format!("{command}.manifest.json")),
            manifest,
        };
        run.save()?;
        Ok(run)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.manifest.outputs.push(p.display().to_string());
        p
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        fs::write(&p, contents)?;
        self.save()?;
        Ok(p)
    }

    fn save(&self) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        fs::write(&self.manifest_path, s)?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.manifest.status = "complete".into();
        self.save()
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Mesh(a) => cmd_mesh(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Convergence(a) => cmd_convergence(&a),
        Command::CompareMeshes(a) => cmd_compare_meshes(&a),
        Command::InterpStudy(a) => cmd_interp_study(&a),
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn check_problem(name: &str) -> Result<(), CliError> {
    if problem_by_name(name, 0.5).is_ok() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "unknown problem '{name}' (known: {})",
            PROBLEM_NAMES.join(", ")
        )))
    }
}

fn check_n_list(n_list: &[usize]) -> Result<(), CliError> {
    if n_list.is_empty() {
        return Err(CliError::Usage("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(CliError::Usage(format!("N list must double: {n_list:?}")));
    }
    if let Some(n) = n_list.iter().find(|&&n| n < 2 || n % 2 == 1) {
        return Err(CliError::Usage(format!("N must be even and at least 2, got {n}")));
    }
    Ok(())
}

fn mesh_csv(points: &[f64]) -> String {
    let mut s = String::from("i,x_i,h_i\n");
    for (i, x) in points.iter().enumerate() {
        match points.get(i + 1) {
            Some(next) => s.push_str(&format!("{i},{x:.17e},{:.17e}\n", next - x)),
            None => s.push_str(&format!("{i},{x:.17e},\n")),
        }
    }
    s
}

/// `None` means `k + 1`.
fn pick_sigma(sigma: Option<f64>, tuned: bool, k: usize) -> Option<f64> {
    if tuned {
        Some(table_sigma(k))
    } else {
        sigma
    }
}

pub fn cmd_mesh(a: &MeshArgs) -> Result<(), CliError> {
    let variant = MeshVariant::from(a.variant);
    let sigma = a.sigma.unwrap_or((a.k + 1) as f64);
    let mut run = Run::start("mesh", a, &a.output.out)?;
    let mut failed = Vec::new();
    let mut directions = vec![("x", a.beta)];
    if let Some(b2) = a.beta2 {
        directions.push(("y", b2));
    }
    for (dir, beta) in directions {
        let cfg = MeshConfig::new(a.n, a.eps, sigma, beta, variant);
        let mesh = build_1d(&cfg, a.k).map_err(usage)?;
        run.write(&format!("mesh_{dir}.csv"), &mesh_csv(mesh.points()))?;
        let report = verify_mesh_properties(&mesh, &cfg);
        for c in &report.checks {
            println!(
                "{dir}: {:<40} {:>12.5e} in [{:.5e}, {:.5e}]  {}",
                c.name,
                c.value,
                c.lower,
                c.upper,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
        for r in &report.ratios {
            println!("{dir}: ratio {:<34} {:>12.5e}", r.name, r.value);
        }
        for s in &report.skipped {
            println!("{dir}: skipped {s}");
        }
        failed.extend(report.failures().map(|c| format!("{dir}: {}", c.name)));
        run.write(
            &format!("mesh_{dir}_properties.json"),
            &(serde_json::to_string_pretty(&report)? + "\n"),
        )?;
    }
    run.finish()?;
    if a.strict && !failed.is_empty() {
        return Err(CliError::Numerical(format!(
            "mesh property checks failed: {}",
            failed.join("; ")
        )));
    }
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    check_problem(&a.problem)?;
    let opts = a.solver.options()?;
    let mut problem = problem_by_name(&a.problem, a.eps).map_err(usage)?;
    if let Some(b) = a.beta1 {
        problem.beta1 = b;
    }
    if let Some(b) = a.beta2 {
        problem.beta2 = b;
    }
    let variant = MeshVariant::from(a.variant);
    let sigma = pick_sigma(a.sigma, a.tuned_sigma, a.k);
    let meshes = MeshPair::for_problem(&problem, a.n, a.k, variant, sigma);
    let mesh = build_tensor_mesh(&meshes.x, &meshes.y, a.k).map_err(usage)?;
    let mut run = Run::start("solve", a, &a.output.out)?;

    if a.gamma_check {
        let r = verify_coefficient_conditions(&problem);
        for (name, m) in [("b1", &r.b1), ("b2", &r.b2), ("c + div(b)/2", &r.reaction)] {
            println!(
                "min {name} = {} at ({}, {}), required {}: {}",
                m.value,
                m.at[0],
                m.at[1],
                m.required,
                if m.holds() { "ok" } else { "violated" }
            );
        }
        if !r.reaction.holds() {
            run.finish()?;
            return Err(CliError::Numerical(format!(
                "c + div(b)/2 >= {} violated (min {})",
                problem.gamma, r.reaction.value
            )));
        }
    }

    let (sol, failure) = solve_on_mesh(&problem, &mesh, a.k, &opts)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    info!(
        "dimension {}, solver {}, residual {:e}",
        sol.solver.dimension,
        sol.solver.path.label(),
        sol.solver.residual
    );
    if a.dump_matrix {
        let p = run.path("matrix.mtx");
        let mut w = BufWriter::new(File::create(p)?);
        sol.system.matrix.write_matrix_market(&mut w)?;
        w.flush()?;
    }
    if a.residual_history {
        let mut s = String::from("iteration,residual\n");
        for (i, r) in sol.solver.history.iter().enumerate() {
            s.push_str(&format!("{i},{r:.6e}\n"));
        }
        run.write("residual_history.csv", &s)?;
    }
    if a.dump_solution {
        let dofs = &sol.solution.dofs;
        let mut s = String::from("i,s,j,t,x,y,value\n");
        for (g, v) in sol.solution.coefficients.iter().enumerate() {
            let (i, si, j, tj) = dofs.node_indices(g);
            let (x, y) = dofs.node_coordinates(g);
            s.push_str(&format!("{i},{si},{j},{tj},{x:.17e},{y:.17e},{v:.17e}\n"));
        }
        run.write("solution.csv", &s)?;
    }

    let report = match &problem.exact {
        Some(exact) => {
            let norms = error_norms_with_points(
                &exact.as_field(),
                &sol.solution,
                None,
                error_points(a.k),
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            Some(crate::analysis::ErrorReport {
                epsilon: a.eps,
                n: a.n,
                k: a.k,
                variant,
                l2: norms.l2(),
                h1_semi: norms.h1_semi(),
                energy: norms.energy(a.eps),
                solver: sol.solver.clone(),
            })
        }
        None => None,
    };
    let row = csv_row(a.eps, a.n, a.k, variant, report.as_ref(), None);
    println!("{CSV_HEADER}\n{row}");
    run.write("solve.csv", &format!("{CSV_HEADER}\n{row}\n"))?;
    run.finish()?;
    if let Some(e) = failure {
        return Err(CliError::Numerical(format!("solver failed: {e}")));
    }
    Ok(())
}

pub fn cmd_convergence(a: &ConvergenceArgs) -> Result<(), CliError> {
    check_problem(&a.problem)?;
    let mut config = StudyConfig::benchmark_defaults(a.k);
    config.problem = a.problem.clone();
    config.variant = a.variant.into();
    if !a.eps_list.is_empty() {
        config.eps_list = a.eps_list.clone();
    }
    if !a.n_list.is_empty() {
        config.n_list = a.n_list.clone();
    }
    check_n_list(&config.n_list)?;
    if let Some(e) = config.eps_list.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(CliError::Usage(format!("epsilon must lie in (0, 1), got {e}")));
    }
    config.sigma = pick_sigma(a.sigma, a.tuned_sigma, a.k);
    config.beta1 = a.beta1;
    config.beta2 = a.beta2;
    config.solve = a.solver.options()?;

    let mut run = Run::start("convergence", a, &a.output.out)?;
    let csv_path = run.path("convergence.csv");
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    writeln!(csv, "{CSV_HEADER}")?;
    csv.flush()?;
    run.save()?;
    let mut io_err = None;
    let table = convergence_study_with(&config, |t, row| {
        let r = write!(csv, "{}", t.row_csv(row)).and_then(|_| csv.flush());
        if let Err(e) = r {
            io_err.get_or_insert(e);
        }
        let eps = row.first().map(|c| c.epsilon).unwrap_or(f64::NAN);
        println!("eps = {eps:e} done");
    })
    .map_err(usage)?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    drop(csv);
    let md = table.to_markdown();
    print!("{md}");
    run.write("convergence.md", &md)?;
    run.finish()?;
    let failed: Vec<String> = table
        .rows
        .iter()
        .flatten()
        .filter_map(|c| c.failure.as_ref().map(|f| format!("eps={:e} N={}: {f}", c.epsilon, c.n)))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} cell(s) failed: {}",
            failed.len(),
            failed.join("; ")
        )));
    }
    Ok(())
}

pub fn cmd_compare_meshes(a: &CompareArgs) -> Result<(), CliError> {
    check_problem(&a.problem)?;
    check_n_list(&a.n_list)?;
    let opts = a.solver.options()?;
    let sigma = pick_sigma(a.sigma, a.tuned_sigma, a.k);
    let mut run = Run::start("compare-meshes", a, &a.output.out)?;
    let cmp = compare_meshes(&a.problem, a.k, a.eps, &a.n_list, sigma, &opts)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let csv = cmp.to_csv();
    print!("{csv}");
    run.write("compare_meshes.csv", &csv)?;
    let first = cmp.rows.first().map(|r| r.bakhvalov).unwrap_or(1.0);
    let mut rates = String::from("N,optimal,with_log_factor\n");
    for s in rate_reference(a.k, a.eps, &a.n_list, first) {
        rates.push_str(&format!("{},{:.6e},{:.6e}\n", s.n, s.optimal, s.with_log_factor));
    }
    run.write("reference_rates.csv", &rates)?;
    run.finish()
}

pub fn cmd_interp_study(a: &InterpArgs) -> Result<(), CliError> {
    check_n_list(&a.n_list)?;
    let norm = match a.norm {
        NormArg::L2 => Norm::L2,
        NormArg::H1semi => Norm::H1Semi,
        NormArg::Energy => Norm::Energy { epsilon: a.eps },
    };
    let mut run = Run::start("interp-study", a, &a.output.out)?;
    let rows = interp_study(a.target, norm, a.region, a.k, a.eps, &a.n_list, a.sigma)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut csv = String::from("N,norm,region,error,order\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.6e},{}\n",
            r.n,
            norm.label(),
            a.region.label(),
            r.error,
            r.order.map(|o| format!("{o:.4}")).unwrap_or_default()
        ));
    }
    print!("{csv}");
    if let Some(slope) = loglog_slope(&rows) {
        println!("log-log slope: {slope:.4}");
    }
    run.write("interp_study.csv", &csv)?;
    run.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["layerfem", "solve", "--N", "16", "--k", "2"]).unwrap();
        match cli.command {
            Command::Solve(a) => {
                assert_eq!(a.n, 16);
                assert_eq!(a.k, 2);
                assert_eq!(a.solver.precond, PrecondKind::Ilut);
            }
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::try_parse_from([
            "layerfem",
            "convergence",
            "--eps-list",
            "1e-4,1e-6",
            "--N-list",
            "8,16",
        ])
        .unwrap();
        match cli.command {
            Command::Convergence(a) => {
                assert_eq!(a.eps_list, vec![1e-4, 1e-6]);
                assert_eq!(a.n_list, vec![8, 16]);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["layerfem", "solve", "--N", "x"]), EXIT_USAGE);
        assert_eq!(run_from(["layerfem", "nonsense"]), EXIT_USAGE);
        assert_eq!(
            run_from(["layerfem", "interp-study", "--target", "nope"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn n_list_validation() {
        assert!(matches!(check_n_list(&[]), Err(CliError::Usage(_))));
        assert!(matches!(check_n_list(&[8, 12]), Err(CliError::Usage(_))));
        assert!(matches!(check_n_list(&[3, 6]), Err(CliError::Usage(_))));
        assert!(check_n_list(&[8, 16, 32]).is_ok());
    }

    #[test]
    fn mesh_csv_layout() {
        let s = mesh_csv(&[0.0, 0.5, 1.0]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "i,x_i,h_i");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(','));
    }
}
