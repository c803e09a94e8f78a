//! The `sfield` command line.
//!
//! ```text
//! sfield sample       --mesh rect:1,1,32,32 --gamma matern:kappa=10,nu=1 --n 100 --seed 7 --out run/
//! sfield oracle-check --mesh interval:0,pi,51 --gamma matern:kappa=5,nu=1 --n 200000
//! sfield convergence  --mesh interval:0,pi,16 --gamma power:exponent=1 --levels 4
//! sfield mesh-info    --mesh icosphere:1,1
//! ```
//!
//! Exit codes: 0 success, 1 validation or numerical failure, 2 bad input.
//! `SF_THREADS` caps the number of worker threads.

mod spec;
mod vtk;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    assumption_audit, covariance_standard_errors, fem_spectral_error, truncation_tail, AnalyticSpectrum,
    AuditParams, AuditReport, ConvergenceReport, CovarianceAccumulator, FemErrorOptions, FemErrorStudy,
    TAIL_CUTOFF,
};
use crate::error::{Error, Result};
use crate::fem::{Discretization, OperatorCoeffs};
use crate::mesh::{Mesh, MeshStats};
use crate::sampler::{
    dense_oracle, write_binary, write_csv, ChebyshevSampler, FieldSampleBatch, MassMode, SamplerConfig,
};
use crate::spectral::SpectralInterval;

pub use spec::{GammaSpec, MeshSpec};
pub use vtk::{vtk_string, write_vtk};

#[derive(Debug, Parser)]
#[command(name = "sfield", version, about = "Finite element Gaussian random fields")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Draw weight vectors and write CSV, binary, VTK and metadata files.
    Sample(RunArgs),
    /// Compare a sampled covariance with the dense reference.
    OracleCheck(RunArgs),
    /// Truncation and finite element error studies on [0, pi]^d.
    Convergence(RunArgs),
    /// Print mesh statistics as JSON.
    MeshInfo(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// interval:a,b,n | rect:lx,ly,nx,ny | icosphere:r,k | path to .off or node/element file
    #[arg(long)]
    mesh: String,
    /// name:key=val,... with name one of matern, spde, spde-poly, power, const
    #[arg(long, default_value = "matern:kappa=1,nu=1,sigma2=1")]
    gamma: String,
    /// Number of samples.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chebyshev approximation tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Refinement levels for convergence studies.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Use the consistent mass in the dense reference and error studies.
    #[arg(long)]
    exact_mass: bool,
    /// Keep boundary vertices as unknowns instead of imposing zero values.
    #[arg(long)]
    natural_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Sample,
    OracleCheck,
    Convergence,
    MeshInfo,
}

/// A fully parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub mesh: MeshSpec,
    pub gamma: GammaSpec,
    pub seed: u64,
    pub n_samples: usize,
    pub tol: f64,
    pub out: PathBuf,
    pub levels: usize,
    pub exact_mass: bool,
    pub dirichlet: bool,
}

impl RunSpec {
    fn from_args(command: Command, a: RunArgs) -> Result<Self> {
        Ok(RunSpec {
            command,
            mesh: a.mesh.parse()?,
            gamma: a.gamma.parse()?,
            seed: a.seed,
            n_samples: a.n,
            tol: a.tol,
            out: a.out,
            levels: a.levels,
            exact_mass: a.exact_mass,
            dirichlet: !a.natural_boundary,
        })
    }

    fn mass_mode(&self) -> MassMode {
        if self.exact_mass {
            MassMode::Exact
        } else {
            MassMode::Lumped
        }
    }
}

/// Metadata written as `run.json` by `sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub mesh: String,
    pub gamma: String,
    pub seed: u64,
    pub n_samples: usize,
    pub n_vertices: usize,
    pub n_dofs: usize,
    pub order: usize,
    pub interval: SpectralInterval,
    pub approximation_error: f64,
    pub mesh_hash: u64,
    pub seconds: f64,
    pub warnings: Vec<String>,
}

/// Written as `oracle_check.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub n_samples: usize,
    pub mass_mode: MassMode,
    pub max_abs_err: f64,
    /// Five standard errors at the entry with the largest error.
    pub max_allowed: f64,
    /// Largest `|error| / standard error` over all entries.
    pub max_z: f64,
    pub frobenius_rel: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub truncation: ConvergenceReport,
    pub fem: FemErrorStudy,
    pub audit: AuditReport,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(path, e))
}

fn discretize(spec: &RunSpec) -> Result<(Mesh, Discretization)> {
    let mesh = spec.mesh.build()?;
    let disc = Discretization::new(&mesh, &OperatorCoeffs::laplacian(), spec.dirichlet)?;
    Ok((mesh, disc))
}

/// Scatters dof rows to all mesh vertices.
fn to_vertices(disc: &Discretization, weights: &DMatrix<f64>) -> DMatrix<f64> {
    let mut full = DMatrix::zeros(disc.n_vertices, weights.ncols());
    for (row, &v) in disc.dofs.iter().enumerate() {
        full.row_mut(v).copy_from(&weights.row(row));
    }
    full
}

pub fn cmd_sample(spec: &RunSpec) -> Result<SampleRun> {
    let start = Instant::now();
    let (mesh, disc) = discretize(spec)?;
    let gamma = spec.gamma.build(mesh.dim())?;
    let mut warnings = Vec::new();
    if spec.gamma.is_zero() {
        warnings.push("gamma is identically zero; all samples are zero".to_string());
    }
    let sampler = ChebyshevSampler::new(&disc.s, &disc.lumped, &gamma, spec.tol)?;
    let cfg = SamplerConfig {
        seed: spec.seed,
        n_samples: spec.n_samples,
        tol: spec.tol,
        use_dirichlet: spec.dirichlet,
    };
    let batch = sampler.sample(&cfg)?.with_mesh(&mesh);
    let full = FieldSampleBatch {
        weights: to_vertices(&disc, &batch.weights),
        meta: batch.meta.clone(),
    };

    create_dir(&spec.out)?;
    write_csv(&full.weights, spec.out.join("weights.csv"))?;
    write_binary(&full, spec.out.join("weights.bin"))?;
    let first: Vec<f64> = full.weights.column(0).iter().cloned().collect();
    write_vtk(&mesh, "z", &first, spec.out.join("sample.vtk"))?;
    let run = SampleRun {
        mesh: spec.mesh.to_string(),
        gamma: spec.gamma.to_string(),
        seed: spec.seed,
        n_samples: spec.n_samples,
        n_vertices: mesh.n_vertices(),
        n_dofs: disc.n(),
        order: sampler.expansion().order(),
        interval: sampler.expansion().interval(),
        approximation_error: sampler.order_choice().achieved,
        mesh_hash: mesh.fingerprint(),
        seconds: start.elapsed().as_secs_f64(),
        warnings,
    };
    write_json(&run, &spec.out.join("run.json"))?;
    Ok(run)
}

pub fn cmd_oracle_check(spec: &RunSpec) -> Result<OracleReport> {
    let (mesh, disc) = discretize(spec)?;
    let gamma = spec.gamma.build(mesh.dim())?;
    let n = disc.n();
    let sigma = match (&spec.gamma, spec.mass_mode()) {
        // white noise scaled by c has covariance c^2 D^-1
        (GammaSpec::Constant { value }, MassMode::Lumped) => {
            DMatrix::from_fn(n, n, |i, j| if i == j { value * value / disc.lumped.diag[i] } else { 0.0 })
        }
        (_, mode) => dense_oracle(&disc.mass, &disc.stiffness, &disc.lumped, &gamma, mode)?.sigma_z,
    };
    let sampler = ChebyshevSampler::new(&disc.s, &disc.lumped, &gamma, spec.tol)?;
    let mut acc = CovarianceAccumulator::new(n);
    sampler.for_each_block(spec.seed, spec.n_samples, |_, block| acc.push_block(block))?;
    let empirical = acc.finish()?;
    let se = covariance_standard_errors(&sigma, spec.n_samples);
    let (mut max_abs_err, mut max_allowed, mut max_z) = (0.0, 0.0, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let err = (empirical[(i, j)] - sigma[(i, j)]).abs();
            let z = if se[(i, j)] > 0.0 {
                err / se[(i, j)]
            } else if err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_z = max_z.max(z);
            if err > max_abs_err {
                max_abs_err = err;
                max_allowed = 5.0 * se[(i, j)];
            }
        }
    }
    let norm = sigma.norm();
    let diff = (&empirical - &sigma).norm();
    let frobenius_rel = if norm > 0.0 { diff / norm } else { diff };
    let report = OracleReport {
        n,
        n_samples: spec.n_samples,
        mass_mode: spec.mass_mode(),
        max_abs_err,
        max_allowed,
        max_z,
        frobenius_rel,
        pass: max_z <= 5.0 && frobenius_rel <= 0.02,
    };
    create_dir(&spec.out)?;
    write_json(&report, &spec.out.join("oracle_check.json"))?;
    Ok(report)
}

pub fn cmd_convergence(spec: &RunSpec) -> Result<ConvergenceRun> {
    if spec.levels < 4 {
        return Err(Error::invalid(format!("need at least 4 levels, got {}", spec.levels)));
    }
    let meshes: Vec<Mesh> = (0..spec.levels)
        .map(|k| spec.mesh.refined(1 << k)?.build())
        .collect::<Result<_>>()?;
    let d = meshes[0].dim();
    let gamma = spec.gamma.build(d)?;
    let opts = FemErrorOptions {
        mass_mode: spec.mass_mode(),
        ..FemErrorOptions::default()
    };
    let fem = fem_spectral_error(&meshes, &gamma, &opts)?;
    let spectrum = AnalyticSpectrum::dirichlet_box(d, TAIL_CUTOFF)?;
    let truncation = truncation_tail(&gamma, &spectrum, &[16, 32, 64, 128, 256, 512])?;
    let audit = assumption_audit(
        &spectrum,
        &gamma,
        &AuditParams {
            meshes,
            ..AuditParams::default()
        },
    );

    create_dir(&spec.out)?;
    truncation.write(&spec.out, "truncation")?;
    fem.total.write(&spec.out, "fem_total")?;
    fem.eigenvalue_error.write(&spec.out, "fem_eigenvalue_error")?;
    fem.eigenvalue_part.write(&spec.out, "fem_eigenvalue_part")?;
    fem.eigenvector_part.write(&spec.out, "fem_eigenvector_part")?;
    write_json(&fem.levels, &spec.out.join("fem_levels.json"))?;
    write_json(&audit, &spec.out.join("audit.json"))?;
    Ok(ConvergenceRun { truncation, fem, audit })
}

pub fn cmd_mesh_info(spec: &RunSpec) -> Result<MeshStats> {
    Ok(spec.mesh.build()?.stats())
}

/// Exit code for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::Parse { .. }
        | Error::DanglingIndex { .. }
        | Error::DegenerateElement { .. }
        | Error::NonManifold { .. }
        | Error::NotSpd { .. }
        | Error::DimensionMismatch { .. }
        | Error::DenseGuard { .. }
        | Error::Io { .. }
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SF_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| Error::invalid(format!("SF_THREADS must be a positive integer, got '{value}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn execute(spec: &RunSpec) -> Result<i32> {
    match spec.command {
        Command::Sample => {
            let run = cmd_sample(spec)?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&run)?);
            Ok(0)
        }
        Command::OracleCheck => {
            let report = cmd_oracle_check(spec)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Convergence => {
            let run = cmd_convergence(spec)?;
            println!(
                "truncation slope {:?}, total error slope {:?}, eigenvalue error slope {:?}",
                run.truncation.slope, run.fem.total.slope, run.fem.eigenvalue_error.slope
            );
            Ok(0)
        }
        Command::MeshInfo => {
            println!("{}", serde_json::to_string_pretty(&cmd_mesh_info(spec)?)?);
            Ok(0)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = match cli.command {
        CommandArgs::Sample(a) => (Command::Sample, a),
        CommandArgs::OracleCheck(a) => (Command::OracleCheck, a),
        CommandArgs::Convergence(a) => (Command::Convergence, a),
        CommandArgs::MeshInfo(a) => (Command::MeshInfo, a),
    };
    let result = configure_threads()
        .and_then(|_| RunSpec::from_args(command, args))
        .and_then(|spec| execute(&spec));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
