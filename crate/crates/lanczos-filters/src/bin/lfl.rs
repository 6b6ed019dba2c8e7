//! Thin command-line front end over [`lanczos_filters::harness`].
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use lanczos_filters::bidiag::Reorth;
use lanczos_filters::harness::{
    cmd_filters, cmd_generate, cmd_run, cmd_verify, CSpec, ProblemKind, RunConfig,
};
use lanczos_filters::problems::GravitySolution;
use lanczos_filters::Error;

#[derive(Parser)]
#[command(
    name = "lfl",
    about = "CGNE / CG-Tikhonov experiments on discrete ill-posed problems",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the problem container (JSON) and the matrix (CSV)
    Generate(CommonArgs),
    /// CGNE/CGT sweeps, discrepancy stop, and a summary JSON
    Run(CommonArgs),
    /// Filter tables: damping factors, truncation filters, coefficients
    Filters(CommonArgs),
    /// Identity battery; exits nonzero if any check fails
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Test problem kernel
    #[arg(long, value_parser = parse_problem, default_value = "shaw")]
    problem: ProblemKind,

    /// Problem container path (for --problem file)
    #[arg(long)]
    file: Option<PathBuf>,

    /// Gravity true-solution profile
    #[arg(long, value_parser = parse_solution, default_value = "piecewise-linear")]
    solution: GravitySolution,

    /// Discretization size (defaults: shaw 400, gravity 200)
    #[arg(long)]
    n: Option<usize>,

    /// Relative noise level
    #[arg(long, default_value_t = 1e-4)]
    noise: f64,

    /// Noise realization seed
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Deepest iteration of the sweeps
    #[arg(long = "m-max", default_value_t = 30)]
    m_max: usize,

    /// Tikhonov shift: a number, `opt`, or `ladder:A:B:K`
    #[arg(long = "c", default_value = "opt")]
    c_spec: String,

    /// Discrepancy safety factor (>= 1)
    #[arg(long, default_value_t = 1.0)]
    tau: f64,

    /// Reorthogonalization policy
    #[arg(long, value_parser = parse_reorth, default_value = "full")]
    reorth: Reorth,

    /// Output directory
    #[arg(long = "out", default_value = "out")]
    output_dir: PathBuf,

    /// Parallel evaluation of independent (m, c) grid cells
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Suppress timestamp lines so re-runs are byte-identical
    #[arg(long, default_value_t = false)]
    reproducible: bool,

    /// Read the whole config from a JSON file (file wins over flags)
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    match s {
        "shaw" => Ok(ProblemKind::Shaw),
        "gravity" => Ok(ProblemKind::Gravity),
        "file" => Ok(ProblemKind::File),
        other => Err(format!("unknown problem `{other}` (shaw|gravity|file)")),
    }
}

fn parse_solution(s: &str) -> Result<GravitySolution, String> {
    match s {
        "smooth" => Ok(GravitySolution::Smooth),
        "piecewise-linear" | "piecewise_linear" => Ok(GravitySolution::PiecewiseLinear),
        other => Err(format!(
            "unknown solution `{other}` (smooth|piecewise-linear)"
        )),
    }
}

fn parse_reorth(s: &str) -> Result<Reorth, String> {
    match s {
        "full" => Ok(Reorth::Full),
        "none" => Ok(Reorth::None),
        other => Err(format!("unknown reorth policy `{other}` (full|none)")),
    }
}

impl CommonArgs {
    fn into_config(self) -> Result<RunConfig, i32> {
        let c_spec = CSpec::from_str(&self.c_spec).map_err(|e| {
            eprintln!("lfl: {e}");
            1
        })?;
        let flags = RunConfig {
            problem: self.problem,
            file: self.file,
            solution: self.solution,
            n: self.n.unwrap_or_else(|| RunConfig::default_n(self.problem)),
            rel_noise: self.noise,
            seed: self.seed,
            m_max: self.m_max,
            c_spec,
            tau: self.tau,
            reorth: self.reorth,
            output_dir: self.output_dir,
            jobs: self.jobs,
            reproducible: self.reproducible,
        };
        let cfg = match &self.config {
            None => flags,
            Some(path) => {
                let data = std::fs::read(path).map_err(|e| {
                    eprintln!("lfl: cannot read config {}: {e}", path.display());
                    3
                })?;
                let from_file: RunConfig = serde_json::from_slice(&data).map_err(|e| {
                    eprintln!("lfl: malformed config {}: {e}", path.display());
                    1
                })?;
                if from_file != flags {
                    eprintln!(
                        "lfl: warning: --config {} overrides conflicting command-line flags",
                        path.display()
                    );
                }
                from_file
            }
        };
        cfg.validate().map_err(|e| {
            eprintln!("lfl: {e}");
            1
        })?;
        Ok(cfg)
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Unsupported(_) => 1,
        Error::Io { .. } | Error::Format { .. } => 3,
        _ => 2,
    }
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(args) => match args.into_config() {
            Err(code) => return code,
            Ok(cfg) => cmd_generate(&cfg).map(|paths| {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }),
        },
        Command::Run(args) => match args.into_config() {
            Err(code) => return code,
            Ok(cfg) => cmd_run(&cfg).map(|summary| {
                println!(
                    "{} n={} noise={:e} seed={}",
                    summary.problem, summary.n, summary.rel_noise, summary.seed
                );
                println!(
                    "  discrepancy stop: m = {}{}",
                    summary.m_discr,
                    if summary.discrepancy_capped {
                        " (capped)"
                    } else {
                        ""
                    }
                );
                if let Some(e) = summary.cgne_discrepancy_error {
                    println!("  cgne error at stop: {e:.6e}");
                }
                println!(
                    "  best cgt at m = {}: c = {:.6e}, error = {:.6e}",
                    summary.best_cgt.m, summary.best_cgt.c, summary.best_cgt.error
                );
                println!(
                    "  optimal direct Tikhonov: c = {:.6e}, error = {:.6e}",
                    summary.c_opt, summary.tikhonov_error_at_c_opt
                );
            }),
        },
        Command::Filters(args) => match args.into_config() {
            Err(code) => return code,
            Ok(cfg) => cmd_filters(&cfg).map(|()| println!("filter tables written")),
        },
        Command::Verify(args) => match args.into_config() {
            Err(code) => return code,
            Ok(cfg) => match cmd_verify(&cfg) {
                Err(e) => Err(e),
                Ok(report) => {
                    for check in &report.checks {
                        println!(
                            "{} {:<34} measured {:>12.4e}  tolerance {:>9.1e}",
                            if check.pass { "PASS" } else { "FAIL" },
                            check.name,
                            check.measured,
                            check.tolerance
                        );
                    }
                    if !report.passed {
                        let failing: Vec<&str> = report
                            .checks
                            .iter()
                            .filter(|c| !c.pass)
                            .map(|c| c.name.as_str())
                            .collect();
                        eprintln!("lfl: identity checks failed: {}", failing.join(", "));
                        return 2;
                    }
                    Ok(())
                }
            },
        },
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lfl: {e}");
            error_code(&e)
        }
    }
}

fn main() {
    std::process::exit(real_main());
}
