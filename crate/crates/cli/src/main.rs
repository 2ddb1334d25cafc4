//! `qcorr` command-line front end. Results go to stdout as JSON, errors to
//! stderr as `{"error": {"kind", "message"}}`.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcorr::state::DEFAULT_MAX_QUBITS;

use crate::io::{with_manifest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "qcorr", version, about = "Correlation tensors, anti-states and entanglement checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Base seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest accepted register size.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_QUBITS)]
    pub cap_qubits: usize,
    /// Overrides the numerical tolerance of the check being run.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build states of the supported families.
    #[command(subcommand)]
    State(StateCmd),
    /// Correlation tensor entries of the requested orders.
    Tensor {
        #[arg(long)]
        state: PathBuf,
        /// `full`, `all` or a list such as `1,3`.
        #[arg(long, default_value = "full")]
        orders: String,
    },
    /// Length of correlation (sum of squared full-order entries).
    Length {
        #[arg(long)]
        state: PathBuf,
    },
    /// Anti-state checks.
    #[command(subcommand)]
    Anti(AntiCmd),
    /// Simulated-annealing anti-state search.
    Anneal(AnnealArgs),
    /// Genuine multipartite entanglement tests.
    #[command(subcommand)]
    Gme(GmeCmd),
    /// Conditioned Clauser–Horne inequality.
    #[command(subcommand)]
    Bell(BellCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    W,
    Antiw,
    Dicke,
    DickeMixture,
    Even4,
    Ghz,
    Bell,
    Basis,
}

#[derive(Debug, Subcommand)]
pub enum StateCmd {
    Build {
        #[arg(long, value_enum)]
        family: Family,
        /// Family parameters as a JSON object.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Also write the bare state file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AntiCmd {
    Check {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
    },
    /// σ_y conjugation plus partial transposition on an odd subset.
    Unot {
        #[arg(long)]
        state: PathBuf,
        /// 1-based qubit positions, e.g. `1,3,5`.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        /// Write the output state here when it is physical.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnealObjective {
    /// Length of correlation of the even mixture.
    Length,
    /// Flip the even orders and the full order, preserve the other odd orders.
    EvenFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    Evidence,
}

#[derive(Debug, Args)]
pub struct AnnealArgs {
    /// Target state; optional in co-anneal mode when `--n` is given.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Register size for co-anneal mode.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of independent seeds, counting up from the base seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Annealer configuration as JSON; missing keys take defaults.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum, default_value_t = AnnealObjective::Length)]
    pub objective: AnnealObjective,
    /// CSV trace of the best run.
    #[arg(long)]
    pub emit_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GmeMethodArg {
    Auto,
    Ppt,
    Biproduct,
    Subspace,
    Mimic,
}

#[derive(Debug, Subcommand)]
pub enum GmeCmd {
    Certify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = GmeMethodArg::Auto)]
        method: GmeMethodArg,
        /// Even-family parameters `{"alphas": [...], "phi": "10"}` for the
        /// subspace method; defaults to uniform weights and `phi = 10…0`.
        #[arg(long)]
        family_params: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BellCmd {
    Eval {
        #[arg(long)]
        state: PathBuf,
        /// Settings file; defaults to σ_z on leading parties and the
        /// optimal equatorial CH settings.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Refine the CH settings with this many random restarts.
        #[arg(long)]
        refine: Option<usize>,
    },
    Noise {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    let start = Instant::now();

    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("{}", serde_json::json!({ "error": { "kind": "threads", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    }

    match commands::run(&cli) {
        Ok(outcome) => {
            let manifest =
                RunManifest::new(argv, &outcome.config, outcome.seed, rayon::current_num_threads(), start.elapsed());
            let output = with_manifest(outcome.result, &manifest);
            println!("{}", serde_json::to_string_pretty(&output).expect("JSON values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
