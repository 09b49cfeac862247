//! `spps` — spectral parameter power series toolkit.
//!
//! Every subcommand reads one `[section]` config file (see `config`) plus
//! optional flag overrides, computes with `spps-core`, and writes results to
//! stdout and/or CSV files. Exit codes: 0 success, 2 configuration or I/O
//! error, 3 numerical non-convergence.

mod commands;
mod config;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;
use config::{CommandConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "spps",
    about = "Eigenvalue solver and transmutation-kernel toolkit for one-dimensional \
             Schrodinger-type operators, built on spectral parameter power series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Sturm-Liouville boundary eigenvalue problem; eigenvalues go
    /// to stdout, one `re im` pair per line.
    SolveSl {
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
    },
    /// Find the discrete levels of a finite potential well matched to
    /// decaying exponentials at both edges.
    SolveWell {
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
    },
    /// Tabulate |characteristic function| on a rectangle in the spectral
    /// plane as CSV.
    CharMap {
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
        /// Worker threads for the grid evaluation; the output bytes do not
        /// depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Tabulate the formal power family (phi or psi) for a potential.
    Powers {
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
    },
    /// Build or transform transmutation kernels (CSV in, CSV out).
    Kernel {
        #[arg(value_enum)]
        mode: KernelMode,
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
    },
    /// Integrate a one-dimensional Dirac system at fixed energy.
    Dirac {
        config: PathBuf,
        #[command(flatten)]
        flags: FlagOverrides,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelMode {
    /// Closed-form kernel for a constant potential.
    Constant,
    /// Solve the kernel equation for a sampled potential.
    Goursat,
    /// Move an existing kernel to a new parameter h.
    Reparam,
    /// One commutation step applied to an existing kernel.
    Darboux,
    /// Iterated commutation ladder from the zero kernel.
    Chain,
    /// Apply a kernel's integral operator to a sampled function.
    Apply,
}

impl KernelMode {
    fn section(self) -> &'static str {
        match self {
            KernelMode::Constant => "kernel-constant",
            KernelMode::Goursat => "kernel-goursat",
            KernelMode::Reparam => "kernel-reparam",
            KernelMode::Darboux => "kernel-darboux",
            KernelMode::Chain => "kernel-chain",
            KernelMode::Apply => "kernel-apply",
        }
    }
}

#[derive(Args, Default)]
struct FlagOverrides {
    /// Series truncation order (config key `n`).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Grid intervals for sampled functions (config key `m`).
    #[arg(long = "M")]
    m: Option<usize>,
    /// Iteration tolerance (config key `tol`).
    #[arg(long)]
    tol: Option<f64>,
    /// Output file path (config key `out`).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    re_min: Option<f64>,
    #[arg(long)]
    re_max: Option<f64>,
    #[arg(long)]
    im_min: Option<f64>,
    #[arg(long)]
    im_max: Option<f64>,
    /// Grid points along the real axis (config key `nx`).
    #[arg(long)]
    nx: Option<usize>,
    /// Grid points along the imaginary axis (config key `ny`).
    #[arg(long)]
    ny: Option<usize>,
}

impl FlagOverrides {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            m: self.m,
            tol: self.tol,
            out: self.out.clone(),
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: self.im_min,
            im_max: self.im_max,
            nx: self.nx,
            ny: self.ny,
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (section, path, flags, threads) = match &cli.command {
        Command::SolveSl { config, flags } => ("solve-sl", config, flags, 1),
        Command::SolveWell { config, flags } => ("solve-well", config, flags, 1),
        Command::CharMap {
            config,
            flags,
            threads,
        } => ("char-map", config, flags, *threads),
        Command::Powers { config, flags } => ("powers", config, flags, 1),
        Command::Kernel { mode, config, flags } => (mode.section(), config, flags, 1),
        Command::Dirac { config, flags } => ("dirac", config, flags, 1),
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config `{}`: {e}", path.display()))
    })?;
    let cfg = CommandConfig::load(section, &text, &flags.overrides())?;
    let stdout = std::io::stdout();
    commands::run(&cfg, threads, &mut stdout.lock())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
