mod commands;
mod config;
mod plot;
mod table;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netsense_core::{Case, Error};

const AFTER_HELP: &str = "\
Every table is written as CSV: one '#' metadata line (package version, SHA-256
of the config file or 'none', the value of hbar, frequency interpretation),
then a header row, then data rows.

Schemas:
  state         entry,branch,mode,re,im   (entry = coefficient | amplitude)
  entropy       tau,s_l_closed,s_l_gram
  qfim          quantity,i,j,value        (Q, Q_inverse, trace_inverse, variance_bound)
  crb           platform,case,n_nodes,n_exc,mu,form,variance,rms,variance_unit,rms_unit
  measure       quantity,i,j,value        (probability, cfim, qfim, gap_eigenvalue)
  sample        quantity,index,value      (truth, mean, std_error, bias_sigma,
                                           empirical_trace, bound, ratio)
  figure2/3     panel,platform,n_nodes,n_exc,value,rms,unit
  oracle-check  check,n_nodes,value,threshold,status

Frequencies are read as angular (rad/s). Parameter indices are 0-based and
parameter p belongs to node p+1; node 0 is the reference.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical tolerance
failure, 3 case-condition violation. Set RAYON_NUM_THREADS to bound the
worker threads used by Monte Carlo runs.";

#[derive(Parser)]
#[command(name = "netsense", version, about = "Stroboscopic sensor-network estimation toolkit", after_help = AFTER_HELP)]
struct Cli {
    /// Write the CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write a matplotlib script that plots the CSV given by --out
    /// (entropy, figure2 and figure3 only).
    #[arg(long, global = true, requires = "out")]
    plot_script: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::One => Case::Case1,
            CaseArg::Two => Case::Case2,
        }
    }
}

#[derive(Args)]
pub struct ConfigArg {
    /// Network description in TOML (see configs/network.toml).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form branch state at time tau.
    State {
        #[command(flatten)]
        config: ConfigArg,
        /// Dimensionless time Ωt; accepts a 'pi' suffix such as 2pi.
        #[arg(long, value_parser = commands::parse_angle)]
        tau: f64,
    },
    /// Linear entropy over a time grid, closed form and Gram route.
    Entropy {
        #[command(flatten)]
        config: ConfigArg,
        /// Grid START:STOP:STEP, inclusive; values accept a 'pi' suffix.
        #[arg(long, value_parser = commands::parse_grid)]
        tau_grid: commands::Grid,
    },
    /// Quantum Fisher information matrix of the stroboscopic state.
    Qfim {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        case: CaseArg,
        /// Use central finite differences instead of the closed form.
        #[arg(long)]
        numeric: bool,
        /// Scaled finite-difference step; the step is epsilon / max|β|.
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
        /// Repetitions used for the per-parameter variance bounds.
        #[arg(long, default_value_t = 1)]
        mu: u64,
    },
    /// Cramér–Rao bound in SI units for a platform preset.
    Crb {
        /// fabry-perot, levitated, cold-atoms or spin-mechanical.
        #[arg(long)]
        platform: String,
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        n_nodes: u32,
        #[arg(long)]
        n_exc: u32,
        #[arg(long)]
        mu: u64,
        /// Case 2 only: the N dimensionless couplings k_j. When given, the
        /// exact Σ(k_j⁺)⁻² form is used instead of k_j⁺ ≈ 2k.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        couplings: Option<Vec<f64>>,
    },
    /// Outcome probabilities and CFIM of the Gram–Schmidt measurement.
    Measure {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        case: CaseArg,
        /// Reference phases ϑ_1..ϑ_{N-1}, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        refs: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
    },
    /// Monte Carlo two-stage adaptive estimation against the bound.
    Sample {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        mu: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Share of the shots spent in the first stage.
        #[arg(long, default_value_t = 0.5)]
        stage1_fraction: f64,
        /// First-stage detuning, in units of 1/max|β|.
        #[arg(long, default_value_t = 0.05)]
        detuning: f64,
        /// Second-stage offset in first-stage standard errors.
        #[arg(long, default_value_t = 3.0)]
        margin: f64,
    },
    /// Case 1 gravimetry sweeps (factor map, N sweep, N_exc sweep).
    Figure2 {
        #[arg(long, default_value_t = netsense_core::platforms::FIGURE_MU)]
        mu: u64,
    },
    /// Case 2 coupling sweeps (factor map, N sweep, N_exc sweep).
    Figure3 {
        #[arg(long, default_value_t = netsense_core::platforms::FIGURE_MU)]
        mu: u64,
    },
    /// Compare the closed forms against truncated-Fock evolution for N = 2, 3.
    OracleCheck {
        /// Fock cutoff per mechanical mode.
        #[arg(long, default_value_t = 30)]
        fock_dim: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Tolerance(String),
    Case(String),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Case(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Tolerance(m) | CliError::Case(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::CaseConditionViolated(_) | Error::SingularBeta { .. } => CliError::Case(message),
            Error::TruncationInsufficient { .. }
            | Error::InvalidFisherMatrix(_)
            | Error::DegenerateProbability { .. }
            | Error::NotConverged { .. }
            | Error::AmbiguousLikelihood { .. }
            | Error::Inconsistent(_) => CliError::Tolerance(message),
            _ => CliError::Config(message),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let plot_kind = match &cli.command {
        Command::Entropy { .. } => Some(plot::PlotKind::Entropy),
        Command::Figure2 { .. } | Command::Figure3 { .. } => Some(plot::PlotKind::Figure),
        _ => None,
    };
    let (table, failure) = match cli.command {
        Command::State { config, tau } => (commands::state(&config.config, tau)?, None),
        Command::Entropy { config, tau_grid } => (commands::entropy(&config.config, &tau_grid)?, None),
        Command::Qfim { config, case, numeric, epsilon, mu } => {
            (commands::qfim(&config.config, case.into(), numeric, epsilon, mu)?, None)
        }
        Command::Crb { platform, case, n_nodes, n_exc, mu, couplings } => {
            (commands::crb(&platform, case.into(), n_nodes, n_exc, mu, couplings.as_deref())?, None)
        }
        Command::Measure { config, case, refs, epsilon } => {
            (commands::measure(&config.config, case.into(), &refs, epsilon)?, None)
        }
        Command::Sample { config, case, mu, trials, seed, stage1_fraction, detuning, margin } => {
            let options = netsense_core::sampler::SaturationOptions {
                stage1_fraction,
                stage1_detuning: detuning,
                stage2_margin: margin,
            };
            (commands::sample(&config.config, case.into(), mu, trials, seed, options)?, None)
        }
        Command::Figure2 { mu } => (commands::figure(Case::Case1, mu)?, None),
        Command::Figure3 { mu } => (commands::figure(Case::Case2, mu)?, None),
        Command::OracleCheck { fock_dim } => commands::oracle_check(fock_dim)?,
    };

    match &cli.out {
        Some(path) => table.write_to(BufWriter::new(File::create(path)?))?,
        None => table.write_to(io::stdout().lock())?,
    }
    if let Some(script) = &cli.plot_script {
        let kind = plot_kind.ok_or_else(|| {
            CliError::Config("--plot-script is available for entropy, figure2 and figure3 only".into())
        })?;
        let csv = cli.out.as_ref().expect("clap enforces --out");
        std::fs::write(script, plot::script(kind, csv))?;
    }
    match failure {
        Some(message) => Err(CliError::Tolerance(message)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netsense: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
