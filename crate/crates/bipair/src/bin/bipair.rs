//! Command-line surface: scans and verification suites as CSV-producing
//! subcommands.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-validation
//! failure, 4 non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use bipair::dynamics::SteadyMethod;
use bipair::error::Error;
use bipair::output::write_atomic;
use bipair::scan::{self, ScanConfig, SteadyConfig};
use bipair::verify::VerifyConfig;

#[derive(Parser)]
#[command(name = "bipair", version, about = "SU(1,1) x SU(1,1) coherent states: \
coefficient tables, photon statistics, overlap kernels, and dissipative steady states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// First-factor charge.
    #[arg(long, default_value_t = 0)]
    q1: u32,
    /// Second-factor charge.
    #[arg(long, default_value_t = 0)]
    q2: u32,
    /// Coupling index (coupled charge is q1 + q2 + 2n + 1).
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Relative tail mass dropped by the series truncation.
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized property checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.25)]
    zeta_min: f64,
    #[arg(long, default_value_t = 1.75)]
    zeta_max: f64,
    /// Number of grid points (inclusive endpoints).
    #[arg(long, default_value_t = 7)]
    steps: usize,
}

#[derive(Args)]
struct ZetaArgs {
    /// |zeta| with phase 0.
    #[arg(long, conflicts_with_all = ["zeta_re", "zeta_im"])]
    zeta_abs: Option<f64>,
    #[arg(long)]
    zeta_re: Option<f64>,
    #[arg(long)]
    zeta_im: Option<f64>,
}

impl ZetaArgs {
    fn resolve(&self, default: C64) -> C64 {
        if let Some(abs) = self.zeta_abs {
            return C64::new(abs, 0.0);
        }
        if self.zeta_re.is_some() || self.zeta_im.is_some() {
            return C64::new(self.zeta_re.unwrap_or(0.0), self.zeta_im.unwrap_or(0.0));
        }
        default
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Evolve,
    Nullspace,
}

#[derive(Subcommand)]
enum Command {
    /// Mandel-Q and mode-a mean over a |zeta| grid.
    Qscan {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Pair-count distribution at one |zeta| with the equal-mean Poissonian.
    Pk {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        zeta: ZetaArgs,
    },
    /// Coupling-coefficient table: closed form vs lowest-weight construction.
    Cg {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest ladder level in the table.
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Run every module's invariant suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Lattice cutoff for the steady-state checks.
        #[arg(long, default_value_t = 8)]
        steady_cutoff: usize,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.2)]
        g: f64,
    },
    /// Master-equation steady state with trajectory diagnostics.
    Steady {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.3)]
        g: f64,
        #[arg(long, default_value_t = 12)]
        n1_cut: usize,
        #[arg(long, default_value_t = 12)]
        n2_cut: usize,
        /// RK4 step; defaults to the stability bound.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 400_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Evolve)]
        method: MethodArg,
        /// Trajectory logging interval in steps.
        #[arg(long, default_value_t = 2000)]
        log_every: usize,
        /// Largest coupling index in the dark-family decomposition.
        #[arg(long, default_value_t = 2)]
        dark_nmax: u32,
    },
    /// Analytic overlap kernel vs lattice overlap on sample points.
    Overlap {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        zeta: ZetaArgs,
        /// Number of sample points.
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

fn scan_config(common: &CommonArgs, grid: Option<&GridArgs>) -> ScanConfig {
    let mut config = ScanConfig {
        q1: common.q1,
        q2: common.q2,
        n: common.n,
        tail_tol: common.tail_tol,
        seed: common.seed,
        ..ScanConfig::default()
    };
    if let Some(grid) = grid {
        config.zeta_min = grid.zeta_min;
        config.zeta_max = grid.zeta_max;
        config.steps = grid.steps;
    }
    config
}

fn emit(doc: &bipair::output::CsvDocument, out: &Option<PathBuf>) -> bipair::Result<()> {
    match out {
        Some(path) => doc.write_atomic(path),
        None => {
            print!("{}", doc.render());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Qscan { common, grid } => {
            let config = scan_config(&common, Some(&grid));
            let doc = scan::qscan(&config)?;
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Pk { common, zeta } => {
            let config = scan_config(&common, None);
            let z = zeta.resolve(C64::new(2.0, 0.0));
            let doc = scan::pk_scan(&config, z.norm())?;
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Cg { common, kmax } => {
            let config = scan_config(&common, None);
            let doc = scan::cg_table(&config, kmax)?;
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Verify {
            common,
            steady_cutoff,
            kappa,
            g,
        } => {
            let cfg = VerifyConfig {
                seed: common.seed,
                tail_tol: common.tail_tol,
                steady_cutoff,
                kappa,
                g,
            };
            let (table, pass) = scan::verify_report_table(&cfg)?;
            match &common.out {
                Some(path) => write_atomic(path, &table)?,
                None => print!("{table}"),
            }
            Ok(if pass { 0 } else { 3 })
        }
        Command::Steady {
            common,
            kappa,
            g,
            n1_cut,
            n2_cut,
            dt,
            max_steps,
            method,
            log_every,
            dark_nmax,
        } => {
            let config = SteadyConfig {
                kappa,
                g,
                q1: common.q1,
                q2: common.q2,
                n1_cut,
                n2_cut,
                dt,
                max_steps,
                method: match method {
                    MethodArg::Evolve => SteadyMethod::Evolve,
                    MethodArg::Nullspace => SteadyMethod::Nullspace,
                },
                log_every,
                dark_nmax,
            };
            let outcome = scan::steady_run(&config)?;
            match &common.out {
                Some(path) => {
                    outcome.doc.write_atomic(path)?;
                    print!("{}", outcome.summary);
                }
                None => {
                    print!("{}", outcome.doc.render());
                    eprint!("{}", outcome.summary);
                }
            }
            Ok(0)
        }
        Command::Overlap {
            common,
            zeta,
            samples,
        } => {
            let config = scan_config(&common, None);
            let z = zeta.resolve(C64::new(0.8, 0.5));
            let doc = scan::overlap_scan(&config, z, samples)?;
            emit(&doc, &common.out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
