//! Monte-Carlo wavefunction unraveling of amplitude damping.
//!
//! Each loss step on a pure state samples, mode by mode, how many photons the
//! mode loses, with probability equal to the squared norm of the matching
//! Kraus branch, then renormalizes. For single-photon states this is the usual
//! quantum jump: the annihilation operator on the sampled mode, or the
//! no-jump operator `exp(-gamma n / 2)`. Averaging `|psi><psi|` over
//! trajectories reproduces the Kraus channel exactly in expectation.
//!
//! Every trajectory draws from its own ChaCha8 stream keyed by
//! `(seed, trajectory index)` and ensembles are reduced in fixed chunks in
//! index order, so results do not depend on the number of worker threads.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{damping_kraus_local, DampingParams};
use crate::elements::{Circuit, CircuitElement};
use crate::error::{Error, Result};
use crate::fock::{
    apply_with_layout, DensityMatrix, DensityRecord, FockSpace, ModeLayout, PureState, ZERO,
};

/// Trajectories per reduction chunk. Fixed so the floating-point summation
/// order never depends on the thread pool.
pub const CHUNK_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub step: usize,
    pub mode: usize,
    pub photons: usize,
}

/// Random stream for trajectory `index` of an ensemble seeded with `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One loss step with per-photon loss probability `p_jump` on each of `modes`.
pub fn trajectory_step<R: Rng + ?Sized>(
    state: &PureState,
    modes: &[usize],
    p_jump: f64,
    rng: &mut R,
    step: usize,
) -> Result<(PureState, Vec<JumpEvent>)> {
    let params = DampingParams::from_loss_probability(p_jump)?;
    trajectory_step_gamma(state, modes, params, rng, step)
}

pub(crate) fn trajectory_step_gamma<R: Rng + ?Sized>(
    state: &PureState,
    modes: &[usize],
    params: DampingParams,
    rng: &mut R,
    step: usize,
) -> Result<(PureState, Vec<JumpEvent>)> {
    let space = *state.space();
    space.check_modes(modes)?;
    let kraus = damping_kraus_local(space.cutoff(), params);
    let mut amps = state.amplitudes().clone();
    let mut jumps = Vec::new();
    for &mode in modes {
        let layout = ModeLayout::new(&space, &[mode]);
        let (photons, branch) = sample_branch(&layout, &kraus, &amps, rng)?;
        if photons > 0 {
            jumps.push(JumpEvent {
                step,
                mode,
                photons,
            });
        }
        amps = branch;
    }
    Ok((PureState::from_parts_unchecked(space, amps), jumps))
}

/// Picks Kraus branch `k` with probability `||K_k psi||^2` and returns the
/// renormalized branch.
fn sample_branch<R: Rng + ?Sized>(
    layout: &ModeLayout,
    kraus: &[DMatrix<Complex64>],
    amps: &DVector<Complex64>,
    rng: &mut R,
) -> Result<(usize, DVector<Complex64>)> {
    let branches: Vec<DVector<Complex64>> = kraus
        .iter()
        .map(|k| apply_with_layout(layout, k, amps))
        .collect();
    let weights: Vec<f64> = branches.iter().map(|b| b.norm_squared()).collect();
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        chosen = Some(k);
        acc += w;
        if u < acc {
            break;
        }
    }
    let k = chosen.expect("a normalized state has a branch with positive weight");
    let w = weights[k];
    assert!(w > 0.0, "zero-norm branch selected");
    Ok((k, branches.into_iter().nth(k).unwrap().unscale(w.sqrt())))
}

/// Hazard rate `2 eps t / (1 - eps t^2)` whose survival is `1 - eps t^2`.
pub fn quadratic_jump_rate(t: f64, epsilon: f64) -> Result<f64> {
    check_quadratic(t, epsilon)?;
    Ok(2.0 * epsilon * t / (1.0 - epsilon * t * t))
}

pub fn quadratic_survival(t: f64, epsilon: f64) -> Result<f64> {
    check_quadratic(t, epsilon)?;
    Ok(1.0 - epsilon * t * t)
}

fn check_quadratic(t: f64, epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain("epsilon", epsilon, "must be finite and >= 0"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("t", t, "must be finite and >= 0"));
    }
    if epsilon * t * t >= 1.0 {
        return Err(Error::domain(
            "epsilon",
            epsilon,
            "quadratic model needs eps * t^2 < 1",
        ));
    }
    Ok(())
}

/// Per-photon loss over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossModel {
    /// Constant loss exponent per step, survival `exp(-gamma n)`.
    Exponential { gamma_per_step: f64 },
    /// Survival `1 - eps t^2` since the last reset, `t = steps * step_duration`.
    Quadratic { epsilon: f64, step_duration: f64 },
}

impl LossModel {
    pub fn quadratic(epsilon: f64) -> Self {
        Self::Quadratic {
            epsilon,
            step_duration: 1.0,
        }
    }

    pub fn step_duration(&self) -> f64 {
        match self {
            Self::Exponential { .. } => 1.0,
            Self::Quadratic { step_duration, .. } => *step_duration,
        }
    }

    /// Checks the parameters for `steps` consecutive steps without reset.
    pub fn validate(&self, steps: usize) -> Result<()> {
        match *self {
            Self::Exponential { gamma_per_step } => DampingParams::new(gamma_per_step).map(|_| ()),
            Self::Quadratic {
                epsilon,
                step_duration,
            } => {
                if !(step_duration > 0.0 && step_duration.is_finite()) {
                    return Err(Error::domain(
                        "step_duration",
                        step_duration,
                        "must be positive",
                    ));
                }
                check_quadratic(steps as f64 * step_duration, epsilon)
            }
        }
    }

    /// Loss exponent of the step that starts `elapsed` steps after the last
    /// reset. Quadratic hazard is integrated with the midpoint rule.
    pub fn step_gamma(&self, elapsed: usize) -> Result<f64> {
        match *self {
            Self::Exponential { gamma_per_step } => Ok(DampingParams::new(gamma_per_step)?.gamma()),
            Self::Quadratic {
                epsilon,
                step_duration,
            } => {
                self.validate(elapsed + 1)?;
                let mid = (elapsed as f64 + 0.5) * step_duration;
                Ok(quadratic_jump_rate(mid, epsilon)? * step_duration)
            }
        }
    }

    /// Closed-form per-photon survival after `steps` steps without reset.
    pub fn survival(&self, steps: usize) -> Result<f64> {
        self.validate(steps)?;
        match *self {
            Self::Exponential { gamma_per_step } => Ok((-gamma_per_step * steps as f64).exp()),
            Self::Quadratic {
                epsilon,
                step_duration,
            } => quadratic_survival(steps as f64 * step_duration, epsilon),
        }
    }
}

/// Circuit of `steps` loss elements on `modes`, clock starting at zero.
pub fn loss_circuit(
    space: FockSpace,
    modes: &[usize],
    model: &LossModel,
    steps: usize,
) -> Result<Circuit> {
    model.validate(steps)?;
    let elements = (0..steps)
        .map(|k| {
            Ok(CircuitElement::Loss {
                modes: modes.to_vec(),
                gamma: model.step_gamma(k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Circuit::new(space, elements)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub shots: usize,
    pub seed: u64,
    pub steps: usize,
    pub loss_model: LossModel,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::domain("shots", 0.0, "need at least one shot"));
        }
        if self.steps == 0 {
            return Err(Error::domain("steps", 0.0, "need at least one step"));
        }
        self.loss_model.validate(self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `None` if a post-selection in the circuit failed.
    pub final_state: Option<PureState>,
    /// Product of post-selection probabilities.
    pub weight: f64,
    pub jump_events: Vec<JumpEvent>,
    pub survived: bool,
}

pub fn simulate_trajectory(
    initial: &PureState,
    circuit: &Circuit,
    seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = trajectory_rng(seed, index);
    let run = circuit.run_pure(initial, Some(&mut rng))?;
    Ok(TrajectoryRecord {
        survived: run.jumps.is_empty(),
        final_state: run.state,
        weight: run.weight,
        jump_events: run.jumps,
    })
}

/// Runs `per_chunk` over `[0, shots)` split into [`CHUNK_SIZE`] ranges and
/// returns the chunk results in index order.
pub(crate) fn map_chunks<A, F>(shots: usize, workers: Option<usize>, per_chunk: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(Range<usize>) -> Result<A> + Sync,
{
    let ranges: Vec<Range<usize>> = (0..shots)
        .step_by(CHUNK_SIZE)
        .map(|s| s..(s + CHUNK_SIZE).min(shots))
        .collect();
    let run = || {
        ranges
            .into_par_iter()
            .map(&per_chunk)
            .collect::<Result<Vec<A>>>()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    }
}

struct Accumulator {
    density: DMatrix<Complex64>,
    weight: f64,
    survived: usize,
    histogram: Vec<u64>,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Self {
            density: DMatrix::from_element(dim, dim, ZERO),
            weight: 0.0,
            survived: 0,
            histogram: Vec::new(),
        }
    }

    fn add(&mut self, rec: &TrajectoryRecord) {
        let jumps = rec.jump_events.len();
        if self.histogram.len() <= jumps {
            self.histogram.resize(jumps + 1, 0);
        }
        self.histogram[jumps] += 1;
        if rec.survived {
            self.survived += 1;
        }
        if let Some(psi) = &rec.final_state {
            let v = psi.amplitudes();
            self.density.gerc(
                Complex64::new(rec.weight, 0.0),
                v,
                v,
                Complex64::new(1.0, 0.0),
            );
            self.weight += rec.weight;
        }
    }

    fn merge(&mut self, other: Accumulator) {
        self.density += other.density;
        self.weight += other.weight;
        self.survived += other.survived;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
    }
}

/// Ensemble statistics of a trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub shots: usize,
    pub seed: u64,
    /// Fraction of trajectories with no jump at all.
    pub survival_fraction: f64,
    /// `jump_histogram[k]` counts trajectories with exactly `k` jump events.
    pub jump_histogram: Vec<u64>,
    /// Mean post-selection weight per shot.
    pub mean_weight: f64,
    /// `sum w_i |psi_i><psi_i| / sum w_i`.
    pub avg_density: DensityMatrix,
}

impl EnsembleResult {
    /// Binomial standard error of `survival_fraction`.
    pub fn survival_std_error(&self) -> f64 {
        let p = self.survival_fraction;
        (p * (1.0 - p) / self.shots as f64).sqrt()
    }

    pub fn report(&self) -> EnsembleReport {
        EnsembleReport {
            shots: self.shots,
            seed: self.seed,
            survival_fraction: self.survival_fraction,
            jump_histogram: self.jump_histogram.clone(),
            avg_density_matrix: self.avg_density.to_record(),
        }
    }
}

/// JSON ensemble report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub shots: usize,
    pub seed: u64,
    pub survival_fraction: f64,
    pub jump_histogram: Vec<u64>,
    pub avg_density_matrix: DensityRecord,
}

pub fn run_ensemble(
    initial: &PureState,
    circuit: &Circuit,
    shots: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    run_ensemble_with_workers(initial, circuit, shots, seed, None)
}

/// Like [`run_ensemble`] on a dedicated pool of `workers` threads
/// (`None` uses the global pool). The result is identical for any choice.
pub fn run_ensemble_with_workers(
    initial: &PureState,
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<EnsembleResult> {
    if shots == 0 {
        return Err(Error::domain("shots", 0.0, "need at least one shot"));
    }
    let dim = circuit.space().dim();
    let chunks = map_chunks(shots, workers, |range| {
        let mut acc = Accumulator::new(dim);
        for i in range {
            acc.add(&simulate_trajectory(initial, circuit, seed, i as u64)?);
        }
        Ok(acc)
    })?;
    let mut total = Accumulator::new(dim);
    for c in chunks {
        total.merge(c);
    }
    if total.weight <= 0.0 {
        return Err(Error::ZeroSuccess);
    }
    let avg =
        DensityMatrix::from_parts_unchecked(*circuit.space(), total.density.unscale(total.weight))?;
    Ok(EnsembleResult {
        shots,
        seed,
        survival_fraction: total.survived as f64 / shots as f64,
        jump_histogram: total.histogram,
        mean_weight: total.weight / shots as f64,
        avg_density: avg,
    })
}

/// Ensemble for `config.steps` loss steps of `config.loss_model` on `modes`.
pub fn run_link(
    initial: &PureState,
    modes: &[usize],
    config: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    config.validate()?;
    let circuit = loss_circuit(*initial.space(), modes, &config.loss_model, config.steps)?;
    run_ensemble(initial, &circuit, config.shots, config.seed)
}

/// Jump records of every trajectory, in index order.
pub fn trajectory_records(
    initial: &PureState,
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Vec<JumpEvent>>> {
    let chunks = map_chunks(shots, workers, |range| {
        range
            .map(|i| Ok(simulate_trajectory(initial, circuit, seed, i as u64)?.jump_events))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}
