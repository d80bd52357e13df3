//! Command-line surface: subcommands, flags, and their defaults.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlap_core::evolution::{EvolutionBackend, TrotterOrder};
use qlap_core::qpe::{ReadoutMode, StatePrep};
use qlap_core::NormalizationMode;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "qlap",
    version,
    about = "Spectral graph partitioning through simulated quantum phase estimation",
    long_about = "Analyzes graph Laplacians two ways: a dense classical \
eigensolver (the oracle) and a statevector-simulated quantum phase \
estimation pipeline. Graphs are plain-text edge lists; reports are JSON \
(or a short table when stdout is a terminal)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Laplacian spectrum: full classical decomposition or a quantum
    /// eigenvalue histogram
    Spectrum(SpectrumArgs),
    /// Bisect (or k-way partition) a graph along its Fiedler vector
    Partition(PartitionArgs),
    /// Count connected components by union-find, classical spectrum, and
    /// quantum kernel degeneracy
    Components(ComponentsArgs),
    /// Forecast qubit and oracle costs from closed-form formulas (no
    /// simulation; streams arbitrarily large edge lists)
    Estimate(EstimateArgs),
    /// Run the classical and quantum engines side by side and report
    /// eigenvalue deviations and partition agreement
    Compare(CompareArgs),
    /// Write the built-in benchmark corpus as edge-list files
    Corpus(CorpusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Classical,
    Quantum,
}

impl std::fmt::Display for EngineArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineArg::Classical => write!(f, "classical"),
            EngineArg::Quantum => write!(f, "quantum"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrotterOrderArg {
    First,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadoutArg {
    Trace,
    Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Gershgorin,
    Exact,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Seed for every randomized stage; fixed seed means byte-identical
    /// reports (combine with --no-timestamp)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for shot-level parallelism (0 = library default);
    /// results do not depend on the thread count
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Write the JSON report to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp and wall-clock fields so repeated runs emit
    /// byte-identical reports
    #[arg(long)]
    pub no_timestamp: bool,
}

/// Flags configuring the quantum engine.
#[derive(Debug, Args)]
pub struct QuantumArgs {
    /// Evolution backend for the controlled powers
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Trotter steps per unit-time application (trotter backend only)
    #[arg(long, default_value_t = 64)]
    pub trotter_steps: usize,
    /// Product-formula order (trotter backend only)
    #[arg(long, value_enum, default_value_t = TrotterOrderArg::Symmetric)]
    pub trotter_order: TrotterOrderArg,
    /// Histogram shots
    #[arg(long, default_value_t = 4096)]
    pub shots: u64,
    /// Post-selected samples per eigenvector readout
    #[arg(long, default_value_t = 4096)]
    pub n_samples: u64,
    /// Eigenvector readout: trace (simulator-privileged) or sampling
    /// (measurement statistics plus interference signs)
    #[arg(long, value_enum, default_value_t = ReadoutArg::Trace)]
    pub readout: ReadoutArg,
    /// Laplacian normalization placing eigenvalues in [0, 1)
    #[arg(long, value_enum, default_value_t = NormArg::Gershgorin)]
    pub norm: NormArg,
}

impl QuantumArgs {
    pub fn backend(&self) -> EvolutionBackend {
        match self.backend {
            BackendArg::Exact => EvolutionBackend::Exact,
            BackendArg::Trotter => EvolutionBackend::Trotter {
                steps: self.trotter_steps,
                order: match self.trotter_order {
                    TrotterOrderArg::First => TrotterOrder::First,
                    TrotterOrderArg::Symmetric => TrotterOrder::Symmetric,
                },
            },
        }
    }

    pub fn readout(&self) -> ReadoutMode {
        match self.readout {
            ReadoutArg::Trace => ReadoutMode::Trace,
            ReadoutArg::Sampling => ReadoutMode::Sampling,
        }
    }

    pub fn normalization(&self) -> NormalizationMode {
        match self.norm {
            NormArg::Gershgorin => NormalizationMode::GershgorinPow2,
            NormArg::Exact => NormalizationMode::Exact,
        }
    }
}

/// Parses `--state-prep` values: `uniform`, `random`, `deflated`
/// (random orthogonal to the all-ones kernel direction), or `basis:<k>`.
pub fn parse_state_prep(text: &str, dim: usize) -> Result<StatePrep, String> {
    match text {
        "uniform" => Ok(StatePrep::Uniform),
        "random" => Ok(StatePrep::RandomReal),
        "deflated" => {
            let ones = vec![1.0 / (dim as f64).sqrt(); dim];
            Ok(StatePrep::OrthogonalRandom(vec![ones]))
        }
        other => match other.strip_prefix("basis:") {
            Some(index) => {
                let k: usize = index
                    .parse()
                    .map_err(|_| format!("basis index {index:?} is not an integer"))?;
                if k >= dim {
                    return Err(format!(
                        "basis index {k} out of range for {dim} padded vertices"
                    ));
                }
                Ok(StatePrep::Basis(k))
            }
            None => Err(format!(
                "unknown state preparation {other:?} (expected uniform, random, deflated, or basis:<k>)"
            )),
        },
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Edge-list file
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Classical)]
    pub engine: EngineArg,
    /// Target eigenvalue precision δ in normalized units (quantum engine)
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub delta: f64,
    /// Initial system state: uniform | random | deflated | basis:<k>
    #[arg(long, default_value = "deflated")]
    pub state_prep: String,
    #[command(flatten)]
    pub quantum: QuantumArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Edge-list file
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Classical)]
    pub engine: EngineArg,
    /// Number of blocks (classical engine; the quantum engine bisects)
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Target eigenvalue precision δ in normalized units (quantum engine)
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub delta: f64,
    #[command(flatten)]
    pub quantum: QuantumArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ComponentsArgs {
    /// Edge-list file
    pub graph: PathBuf,
    /// Target eigenvalue precision δ; the finer default sharpens the
    /// zero-bin projection the degeneracy count relies on
    #[arg(long, default_value_t = 1.0 / 256.0)]
    pub delta: f64,
    #[command(flatten)]
    pub quantum: QuantumArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Edge-list file (streamed; never materialized)
    pub graph: PathBuf,
    /// Target eigenvalue precision δ, in (0, 1)
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub delta: f64,
    /// Evolution-oracle tolerance ε, in (0, 1)
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Edge-list file
    pub graph: PathBuf,
    /// Target eigenvalue precision δ in normalized units
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub delta: f64,
    #[command(flatten)]
    pub quantum: QuantumArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Directory to write the edge-list files into (created if missing)
    #[arg(long, default_value = "corpus")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}
