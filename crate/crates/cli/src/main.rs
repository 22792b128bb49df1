mod parse;
mod report;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use dualrail::channels::KrausChannel;
use dualrail::elements::{Circuit, CircuitFile};
use dualrail::fock::{FockSpace, PureState};
use dualrail::regen::{
    self, DualRailQubit, LinkConfig, TransmitMode, DEFAULT_CUTOFF, SIGNAL_MODES,
};
use dualrail::trajectories::{self, LossModel};

use report::{CliError, ExperimentReport, OutputFormat};

/// Dual-rail qubit loss and regeneration experiments.
#[derive(Debug, Parser)]
#[command(name = "dualrail", version)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single photon through a beamsplitter, balanced loss and the inverse splitter.
    Interferometer(InterferometerArgs),
    /// Balanced amplitude damping on a dual-rail qubit, or a circuit file run exactly.
    Channel(ChannelArgs),
    /// Loss followed by one regeneration station.
    Regenerate(RegenerateArgs),
    /// Multi-segment link with periodic regeneration.
    Transmit(TransmitArgs),
    /// Quantum-jump ensemble compared with the exact channel.
    Trajectories(TrajectoriesArgs),
    /// Quadratic-loss survival with and without regeneration after every step.
    Watchdog(WatchdogArgs),
    /// Erasure channel capacities.
    Capacity(CapacityArgs),
    /// Classical interferometer visibility for unequal arm losses.
    Visibility(VisibilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exact,
    Trajectory,
}

#[derive(Debug, Args, Serialize)]
struct QubitArgs {
    /// Amplitude of |01>, e.g. 0.6, -0.3+0.4j. With --c0-phase, the magnitude.
    #[arg(long, default_value = "0.7071067811865476", value_parser = parse::parse_complex)]
    #[serde(serialize_with = "ser_complex")]
    c0: Complex64,
    /// Amplitude of |10>.
    #[arg(long, default_value = "0.7071067811865476", value_parser = parse::parse_complex)]
    #[serde(serialize_with = "ser_complex")]
    c1: Complex64,
    /// Phase of c0 in radians; --c0 is then read as a magnitude.
    #[arg(long)]
    c0_phase: Option<f64>,
    /// Phase of c1 in radians; --c1 is then read as a magnitude.
    #[arg(long)]
    c1_phase: Option<f64>,
    /// Rescale amplitudes that are far from normalized instead of failing.
    #[arg(long)]
    allow_renormalize: bool,
}

#[derive(Debug, Args, Serialize)]
struct SamplingArgs {
    /// Trajectory shots.
    #[arg(long, default_value_t = 100_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trajectory shots; results do not depend on it.
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct InterferometerArgs {
    /// First beamsplitter angle.
    #[arg(long, default_value_t = FRAC_PI_4)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
}

#[derive(Debug, Args, Serialize)]
struct ChannelArgs {
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Circuit JSON to run on --input instead of the damping channel.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Input occupations for --circuit, comma separated; vacuum by default.
    #[arg(long, value_delimiter = ',')]
    input: Option<Vec<usize>>,
    #[command(flatten)]
    qubit: QubitArgs,
}

#[derive(Debug, Args, Serialize)]
struct RegenerateArgs {
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    #[command(flatten)]
    qubit: QubitArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Debug, Args, Serialize)]
struct LossArgs {
    /// Quadratic loss coefficient: survival 1 - eps t^2 between stations.
    #[arg(long, conflicts_with = "gamma")]
    eps: Option<f64>,
    /// Exponential loss per step: survival exp(-gamma) per step.
    #[arg(long)]
    gamma: Option<f64>,
}

impl LossArgs {
    fn model(&self) -> LossModel {
        match (self.eps, self.gamma) {
            (Some(eps), _) => LossModel::quadratic(eps),
            (None, Some(gamma)) => LossModel::Exponential {
                gamma_per_step: gamma,
            },
            (None, None) => LossModel::quadratic(0.001),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct TransmitArgs {
    #[arg(long, default_value_t = 10)]
    segments: usize,
    /// Station after every n segments; 0 checks only at the receiver.
    #[arg(long, default_value_t = 0)]
    regenerate_every: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    qubit: QubitArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Debug, Args, Serialize)]
struct TrajectoriesArgs {
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Circuit JSON to unravel instead of the loss link.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Input occupations for --circuit, comma separated; vacuum by default.
    #[arg(long, value_delimiter = ',')]
    input: Option<Vec<usize>>,
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    qubit: QubitArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Debug, Args, Serialize)]
struct WatchdogArgs {
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Also simulate both links with this many trajectories.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct CapacityArgs {
    /// Delivery probability of the erasure channel.
    #[arg(long)]
    alpha: f64,
}

#[derive(Debug, Args, Serialize)]
struct VisibilityArgs {
    #[arg(long)]
    gamma_a: f64,
    #[arg(long)]
    gamma_b: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Amplitudes typed to a few digits count as normalized.
const TYPED_NORM_TOL: f64 = 1e-3;

impl QubitArgs {
    fn qubit(&self) -> Result<DualRailQubit, CliError> {
        let c0 = polar("c0", self.c0, self.c0_phase)?;
        let c1 = polar("c1", self.c1, self.c1_phase)?;
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > TYPED_NORM_TOL && !self.allow_renormalize {
            return Err(CliError::Domain(dualrail::Error::NotNormalized(norm)));
        }
        Ok(DualRailQubit::normalized(c0, c1)?)
    }
}

fn polar(name: &str, z: Complex64, phase: Option<f64>) -> Result<Complex64, CliError> {
    match phase {
        None => Ok(z),
        Some(phi) if z.im == 0.0 && z.re >= 0.0 => Ok(Complex64::from_polar(z.re, phi)),
        Some(_) => Err(CliError::Usage(format!(
            "--{name} must be a nonnegative magnitude when a phase is given"
        ))),
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: CircuitFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Circuit::from_file(&file)?)
}

fn circuit_input(space: FockSpace, input: &Option<Vec<usize>>) -> Result<PureState, CliError> {
    match input {
        Some(occ) => Ok(PureState::basis(space, occ)?),
        None => Ok(PureState::vacuum(space)),
    }
}

fn transmit_mode(mode: Mode, sampling: &SamplingArgs) -> TransmitMode {
    match mode {
        Mode::Exact => TransmitMode::Exact,
        Mode::Trajectory => TransmitMode::Trajectory {
            shots: sampling.shots,
            seed: sampling.seed,
        },
    }
}

fn seed_of(mode: Mode, sampling: &SamplingArgs) -> Option<u64> {
    (mode == Mode::Trajectory).then_some(sampling.seed)
}

fn run(command: &Command) -> Result<ExperimentReport, CliError> {
    match command {
        Command::Interferometer(a) => {
            let out = regen::balanced_interferometer(a.theta, a.gamma, a.cutoff)?;
            let results = json!({
                "p_10": out.p_10,
                "p_01": out.p_01,
                "p_vacuum": out.p_vacuum,
                "p_10_given_detection": out.p_10_given_detection(),
                "output_density_matrix": out.output.to_record(),
            });
            Ok(ExperimentReport::new("interferometer", a, None, results))
        }
        Command::Channel(a) => {
            let (input, output, probability) = match &a.circuit {
                Some(path) => {
                    let circuit = load_circuit(path)?;
                    let input = circuit_input(*circuit.space(), &a.input)?.to_density();
                    let run = circuit.run_density(&input)?;
                    (input, run.state, run.probability)
                }
                None => {
                    let psi = a.qubit.qubit()?.state(a.cutoff)?;
                    let rho = psi.to_density();
                    let out = KrausChannel::balanced_damping(*psi.space(), &SIGNAL_MODES, a.gamma)?
                        .apply(&rho)?;
                    (rho, Some(out), 1.0)
                }
            };
            let results = json!({
                "probability": probability,
                "purity": output.as_ref().map(|r| r.purity()),
                "input_density_matrix": input.to_record(),
                "output_density_matrix": output.as_ref().map(|r| r.to_record()),
            });
            Ok(ExperimentReport::new("channel", a, None, results))
        }
        Command::Regenerate(a) => {
            let link = LinkConfig {
                segments: 1,
                loss: LossModel::Exponential {
                    gamma_per_step: a.gamma,
                },
                regenerate_every: 1,
            };
            let q = a.qubit.qubit()?;
            let mode = transmit_mode(a.mode, &a.sampling);
            let r = regen::transmit_with_workers(&q, &link, mode, a.cutoff, a.sampling.workers)?;
            Ok(ExperimentReport::new(
                "regenerate",
                a,
                seed_of(a.mode, &a.sampling),
                r,
            ))
        }
        Command::Transmit(a) => {
            let link = LinkConfig {
                segments: a.segments,
                loss: a.loss.model(),
                regenerate_every: a.regenerate_every,
            };
            let q = a.qubit.qubit()?;
            let mode = transmit_mode(a.mode, &a.sampling);
            let r = regen::transmit_with_workers(&q, &link, mode, a.cutoff, a.sampling.workers)?;
            Ok(ExperimentReport::new(
                "transmit",
                a,
                seed_of(a.mode, &a.sampling),
                r,
            ))
        }
        Command::Trajectories(a) => {
            let (circuit, input) = match &a.circuit {
                Some(path) => {
                    let circuit = load_circuit(path)?;
                    let input = circuit_input(*circuit.space(), &a.input)?;
                    (circuit, input)
                }
                None => {
                    let input = a.qubit.qubit()?.state(a.cutoff)?;
                    let circuit = trajectories::loss_circuit(
                        *input.space(),
                        &SIGNAL_MODES,
                        &a.loss.model(),
                        a.steps,
                    )?;
                    (circuit, input)
                }
            };
            let s = &a.sampling;
            let ens = trajectories::run_ensemble_with_workers(
                &input, &circuit, s.shots, s.seed, s.workers,
            )?;
            let exact = circuit.run_density(&input.to_density())?;
            let distance = match &exact.state {
                Some(rho) => Some(rho.trace_distance(&ens.avg_density)?),
                None => None,
            };
            let results = json!({
                "ensemble": ens.report(),
                "survival_std_error": ens.survival_std_error(),
                "mean_weight": ens.mean_weight,
                "exact_probability": exact.probability,
                "trace_distance_to_exact": distance,
            });
            Ok(ExperimentReport::new(
                "trajectories",
                a,
                Some(s.seed),
                results,
            ))
        }
        Command::Watchdog(a) => {
            let table = regen::watchdog(a.eps, a.steps, a.cutoff)?;
            let mut results = serde_json::to_value(&table).expect("serializable table");
            if let Some(shots) = a.shots {
                let q = DualRailQubit::new(
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                )?;
                let mode = TransmitMode::Trajectory {
                    shots,
                    seed: a.seed,
                };
                for (key, every) in [("unregenerated_simulated", 0), ("regenerated_simulated", 1)] {
                    let link = LinkConfig {
                        segments: a.steps,
                        loss: LossModel::quadratic(a.eps),
                        regenerate_every: every,
                    };
                    let r = regen::transmit_with_workers(&q, &link, mode, a.cutoff, a.workers)?;
                    results[key] = json!({"p_success": r.p_success, "std_error": r.std_error});
                }
            }
            let seed = a.shots.map(|_| a.seed);
            Ok(ExperimentReport::new("watchdog", a, seed, results))
        }
        Command::Capacity(a) => {
            let c = dualrail::erasure_capacity(a.alpha)?;
            Ok(ExperimentReport::new("capacity", a, None, c))
        }
        Command::Visibility(a) => {
            let v = dualrail::classical_visibility(a.gamma_a, a.gamma_b)?;
            Ok(ExperimentReport::new(
                "visibility",
                a,
                None,
                json!({ "visibility": v }),
            ))
        }
    }
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let start = Instant::now();
    let result = run(&cli.command).and_then(|r| r.emit(cli.output, cli.out.as_deref()));
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
