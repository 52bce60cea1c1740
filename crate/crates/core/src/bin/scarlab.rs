use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scarlab::cli::{self, Command, InitialState, RunConfig};
use scarlab::ScarError;

/// Exact simulation of the biased PXP ring.
///
/// Exit status: 0 on success, 1 when a check fails or a run errors, 2 on
/// invalid usage.
#[derive(Parser)]
#[command(name = "scarlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the blockaded sector (optionally dump H_g in coordinate format)
    Basis {
        #[command(flatten)]
        common: Common,
        /// Write H_g for the first --g value as `row col value` lines
        #[arg(long)]
        dump_operator: Option<PathBuf>,
    },
    /// Spectrum of H_0 and the isospectrality check against each H_g
    Spectrum(Common),
    /// Néel return probabilities from an initial basis state
    Evolve {
        #[command(flatten)]
        common: Common,
        /// z2bar, z2, vacuum, or a basis index
        #[arg(long, default_value = "z2bar")]
        initial: InitialState,
    },
    /// Néel overlaps and scar flags of every H_0 eigenvector
    Scars(Common),
    /// Up-spin weight distributions of every right eigenvector
    Pnup(Common),
    /// Half-chain entanglement entropy of every right eigenvector
    Entropy(Common),
    /// Néel return traces for g = -1, 0, 1 (default L = 18)
    Fig2(Common),
    /// Up-spin distributions for g = -1, 0, 1 (default L = 16)
    Fig3(Common),
    /// Entanglement entropies for g = -1, 0, 1 (default L = 16)
    Fig4(Common),
    /// Run the invariant suite (L <= 12) and print a pass/fail table
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Number of sites L (even)
    #[arg(long)]
    length: Option<usize>,
    /// Bias g; repeat for several values [default: -1 0 1]
    #[arg(long = "g", allow_negative_numbers = true)]
    g: Vec<f64>,
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.02)]
    t_step: f64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// First site of the entanglement cut
    #[arg(long, default_value_t = 0)]
    cut_start: usize,
    /// Pass/fail threshold override (similarity residual for `verify`,
    /// spectral distance for `spectrum`)
    #[arg(long)]
    tolerance: Option<f64>,
}

impl Common {
    fn into_config(self, command: Command) -> RunConfig {
        let mut config = RunConfig::new(command);
        if let Some(l) = self.length {
            config.length = l;
        }
        if !self.g.is_empty() {
            config.g_list = self.g;
        }
        config.t_max = self.t_max;
        config.t_step = self.t_step;
        config.out_dir = self.out;
        config.cut_start = self.cut_start;
        config.tolerance = self.tolerance;
        config
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Cmd::Basis { common, dump_operator } => {
            let mut config = common.into_config(Command::Basis);
            config.dump_operator = dump_operator;
            config
        }
        Cmd::Spectrum(c) => c.into_config(Command::Spectrum),
        Cmd::Evolve { common, initial } => {
            let mut config = common.into_config(Command::Evolve);
            config.initial = initial;
            config
        }
        Cmd::Scars(c) => c.into_config(Command::Scars),
        Cmd::Pnup(c) => c.into_config(Command::Pnup),
        Cmd::Entropy(c) => c.into_config(Command::Entropy),
        Cmd::Fig2(c) => c.into_config(Command::Fig2),
        Cmd::Fig3(c) => c.into_config(Command::Fig3),
        Cmd::Fig4(c) => c.into_config(Command::Fig4),
        Cmd::Verify { common, inject_sign_flip } => {
            let mut config = common.into_config(Command::Verify);
            config.inject_sign_flip = inject_sign_flip;
            config
        }
    };

    if let Err(err) = config.validate() {
        eprintln!("error: {err}");
        return ExitCode::from(2);
    }
    if let Err(err) = cli::configure_threads() {
        eprintln!("error: {err}");
        return ExitCode::from(2);
    }

    match cli::run(&config) {
        Ok(outcome) => {
            for check in &outcome.checks {
                println!("{check}");
            }
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", outcome.manifest_path.display());
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                let failed = outcome.checks.iter().filter(|c| !c.passed).count();
                eprintln!("{failed} check(s) failed");
                ExitCode::from(1)
            }
        }
        Err(err @ ScarError::Config(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
