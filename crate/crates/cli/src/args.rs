use std::path::PathBuf;

use bipartite_control::io::{HamiltonianJson, StateJson};
use bipartite_control::sim::{DetourMode, LiftDirection};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "bpctl", version, about = "Time-optimal control and stabilization of bipartite entanglement")]
pub struct Cli {
    /// JSON file with defaults for the subcommand's options; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for the stochastic oracles; recorded in output headers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for sweeps and brute-force searches.
    #[arg(long, global = true, env = "BPCTL_JOBS", default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form speed limit with a brute-force cross-check.
    SpeedLimit(SpeedLimitArgs),
    /// Two-segment plan from the product state to a target on the Schmidt sphere.
    Plan(PlanArgs),
    /// Simulate a lifted protocol in the full system.
    Lift(LiftArgs),
    /// Integrate the Schrödinger equation for a coupling and a constant local control.
    Simulate(SimulateArgs),
    /// Detour cost on a log grid of offsets.
    SweepEps(SweepArgs),
    /// Detour cost for a single offset.
    Cost(CostArgs),
    /// Check that a stabilizing control holds the singular values.
    Stabilize(StabilizeArgs),
    /// Schmidt decomposition of a state or coefficient matrix of a coupling.
    Decompose(DecomposeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SpeedLimit(_) => "speed-limit",
            Self::Plan(_) => "plan",
            Self::Lift(_) => "lift",
            Self::Simulate(_) => "simulate",
            Self::SweepEps(_) => "sweep-eps",
            Self::Cost(_) => "cost",
            Self::Stabilize(_) => "stabilize",
            Self::Decompose(_) => "decompose",
        }
    }
}

/// A JSON input given either as a path or inline in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Input<T> {
    Path(PathBuf),
    Inline(T),
}

fn parse_input<T>(s: &str) -> Result<Input<T>, String> {
    Ok(Input::Path(PathBuf::from(s)))
}

pub type HamiltonianInput = Input<HamiltonianJson>;
pub type StateInput = Input<StateJson>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CaseArg {
    Auto,
    TwoQubit,
    Bosonic,
    Fermionic,
    Qutrit,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedLimitArgs {
    /// Coupling Hamiltonian JSON.
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub hamiltonian: Option<HamiltonianInput>,
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    /// Skip the brute-force search.
    #[arg(long)]
    #[serde(default)]
    pub no_brute_force: bool,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanArgs {
    /// Target singular values `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    /// Qutrit coupling `A ⊗ B` used for the speed limit.
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub hamiltonian: Option<HamiltonianInput>,
    /// Speed limit used instead of a Hamiltonian.
    #[arg(long)]
    pub omega_star: Option<f64>,
    /// Plan JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reduced trajectory CSV output.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LiftCase {
    TwoQubit,
    Qutrit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    Entangle,
    Disentangle,
}

impl From<DirectionArg> for LiftDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Entangle => Self::Entangle,
            DirectionArg::Disentangle => Self::Disentangle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    StateDependent,
    TimeDependent,
    Constant,
}

impl From<ModeArg> for DetourMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::StateDependent => Self::StateDependent,
            ModeArg::TimeDependent => Self::TimeDependent,
            ModeArg::Constant => Self::Constant,
        }
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftArgs {
    #[arg(long, value_enum)]
    pub case: Option<LiftCase>,
    /// Coupling JSON (required for two qubits; qutrits default to diag(1, 0, -1) factors).
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub coupling: Option<HamiltonianInput>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Detour offset for qutrits.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Qutrit run length; defaults to the optimal time.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Local control `E ⊗ 1 + 1 ⊗ F` for `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalControlJson {
    #[serde(rename = "E")]
    pub e: bipartite_control::io::ComplexMatrixJson,
    #[serde(rename = "F")]
    pub f: bipartite_control::io::ComplexMatrixJson,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub hamiltonian: Option<HamiltonianInput>,
    #[arg(long, value_parser = parse_input::<StateJson>)]
    pub state: Option<StateInput>,
    /// Constant local control; config file only.
    #[arg(skip)]
    pub control: Option<LocalControlJson>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizeCase {
    Qutrit,
    TwoQubitDiagonal,
    TwoQubitProductSafe,
    Fermionic,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeArgs {
    #[arg(long, value_enum)]
    pub case: Option<StabilizeCase>,
    /// Two-qubit coupling JSON.
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub coupling: Option<HamiltonianInput>,
    /// Schmidt angle of the held state.
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Single-particle levels `l1,l2,l3,l4` for the fermionic case.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eigs: Option<Vec<f64>>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeArgs {
    #[arg(long, value_parser = parse_input::<StateJson>)]
    pub state: Option<StateInput>,
    #[arg(long, value_parser = parse_input::<HamiltonianJson>)]
    pub hamiltonian: Option<HamiltonianInput>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
