//! `sk`: solve, diagnose and figure reproduction for singular Krylov
//! experiments.

mod chart;
mod figures;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sk_core::dense::io::{read_matrix, read_vector};
use sk_core::problems::{
    ep_2x2, ep_diag_128, gp_2x2, near_ep_2x2, near_gp_2x2, strakos_gp_128, ProblemInstance,
};
use sk_core::solvers::{
    breakdown_without_solution, solve, trace_csv, Method, SolverConfig, Termination,
};
use sk_core::subspaces::{classify, ClassifyTolerance};
use sk_core::Error;

use figures::Figure;

#[derive(Parser)]
#[command(name = "sk", version, about = "GMRES and RR-GMRES on singular systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gmres,
    Rrgmres,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    #[value(name = "ep_2x2")]
    Ep2x2,
    #[value(name = "near_ep_2x2")]
    NearEp2x2,
    #[value(name = "ep_diag_128")]
    EpDiag128,
    #[value(name = "gp_2x2")]
    Gp2x2,
    #[value(name = "near_gp_2x2")]
    NearGp2x2,
    #[value(name = "strakos_gp_128")]
    StrakosGp128,
}

#[derive(Subcommand)]
enum Command {
    /// Run GMRES or RR-GMRES and write the per-iteration CSV trace.
    Solve {
        matrix: PathBuf,
        rhs: PathBuf,
        #[arg(long, value_enum, default_value = "gmres")]
        method: MethodArg,
        #[arg(long, default_value_t = 1000)]
        maxiter: usize,
        /// Breakdown tolerance: stop when h_{k+1,k} <= tol ||A||.
        #[arg(long, default_value_t = sk_core::arnoldi::DEFAULT_BREAKDOWN_TOL)]
        tol: f64,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the range/null-space classification of a square matrix.
    Diagnose { matrix: PathBuf },
    /// Regenerate the CSV traces and SVG charts of one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
    },
    /// Write a built-in test problem in the matrix text format.
    Export {
        #[arg(value_enum)]
        problem: ProblemArg,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
    },
}

enum Outcome {
    Done,
    NoSolution,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NoSolution) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Solve {
            matrix,
            rhs,
            method,
            maxiter,
            tol,
            x0,
            out,
        } => cmd_solve(&matrix, &rhs, method, maxiter, tol, x0.as_deref(), out.as_deref()),
        Command::Diagnose { matrix } => {
            let a = read_matrix(&matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let profile = classify(&a, ClassifyTolerance::default())?;
            print!("{}", profile.report());
            Ok(Outcome::Done)
        }
        Command::Reproduce { figure, outdir } => {
            for path in figures::reproduce(figure, &outdir)? {
                println!("{}", path.display());
            }
            Ok(Outcome::Done)
        }
        Command::Export {
            problem,
            eps,
            delta,
            gamma,
            rho,
            outdir,
        } => {
            let p = build_problem(problem, eps, delta, gamma, rho)?;
            for path in p.export(&outdir)? {
                println!("{}", path.display());
            }
            Ok(Outcome::Done)
        }
    }
}

fn cmd_solve(
    matrix: &Path,
    rhs: &Path,
    method: MethodArg,
    maxiter: usize,
    tol: f64,
    x0: Option<&Path>,
    out: Option<&Path>,
) -> Result<Outcome> {
    if maxiter == 0 {
        bail!("--maxiter must be at least 1");
    }
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be positive");
    }
    let a = read_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
    let b = read_vector(rhs).with_context(|| format!("reading {}", rhs.display()))?;
    let x0 = match x0 {
        Some(p) => read_vector(p).with_context(|| format!("reading {}", p.display()))?,
        None => vec![0.0; a.cols()],
    };
    let config = SolverConfig {
        max_iter: maxiter,
        breakdown_tol: tol,
        method: match method {
            MethodArg::Gmres => Method::Gmres,
            MethodArg::Rrgmres => Method::RrGmres,
        },
        ..SolverConfig::default()
    };
    let trace = match solve(&a, &b, &x0, &config) {
        Ok(t) => t,
        Err(e @ Error::StartVectorAnnihilated { .. }) => {
            eprintln!("{e}");
            return Ok(Outcome::NoSolution);
        }
        Err(e) => return Err(e.into()),
    };
    let csv = trace_csv(&trace);
    match out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    let summary = match trace.termination {
        Termination::Breakdown(c) => format!("breakdown at step {} ({:?})", c.step, c.kind),
        Termination::MaxIter => "iteration limit reached".to_string(),
        Termination::InitialResidualZero => "initial residual is zero".to_string(),
    };
    eprintln!(
        "{}: {} iterations, {summary}, ||A^T r||/||A^T b|| = {:e}",
        trace.method.name(),
        trace.iterations(),
        trace.final_normal_resnorm_rel(&a)
    );
    if breakdown_without_solution(&trace, &a) {
        eprintln!("breakdown without a least squares solution");
        return Ok(Outcome::NoSolution);
    }
    Ok(Outcome::Done)
}

fn need(v: Option<f64>, flag: &str, problem: &str) -> Result<f64> {
    v.with_context(|| format!("{problem} needs --{flag}"))
}

fn build_problem(
    problem: ProblemArg,
    eps: Option<f64>,
    delta: Option<f64>,
    gamma: Option<f64>,
    rho: Option<f64>,
) -> Result<ProblemInstance> {
    let p = match problem {
        ProblemArg::Ep2x2 => ep_2x2(need(eps, "eps", "ep_2x2")?),
        ProblemArg::NearEp2x2 => near_ep_2x2(
            need(delta, "delta", "near_ep_2x2")?,
            need(eps, "eps", "near_ep_2x2")?,
        ),
        ProblemArg::EpDiag128 => ep_diag_128(
            need(gamma, "gamma", "ep_diag_128")?,
            need(delta, "delta", "ep_diag_128")?,
        ),
        ProblemArg::Gp2x2 => gp_2x2(need(eps, "eps", "gp_2x2")?),
        ProblemArg::NearGp2x2 => near_gp_2x2(
            need(delta, "delta", "near_gp_2x2")?,
            need(eps, "eps", "near_gp_2x2")?,
        ),
        ProblemArg::StrakosGp128 => strakos_gp_128(need(rho, "rho", "strakos_gp_128")?),
    };
    Ok(p?)
}
