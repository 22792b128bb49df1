//! Dual-rail qubits and their regeneration by a balanced QND measurement.
//!
//! A dual-rail qubit is one photon shared by modes `a` (0) and `ā` (1):
//! `c0|01> + c1|10>`. Balanced loss either leaves it untouched or sends it to
//! `|00>`. The regenerator adjoins a probe in `|10>` on modes `b` (2) and
//! `b̄` (3) and runs
//!
//! ```text
//! BS(pi/4)[b, b̄] -> Kerr(pi)[a, b] -> Kerr(pi)[ā, b] -> BS(pi/4)^-1[b, b̄] -> read (b, b̄)
//! ```
//!
//! The probe picks up a pi phase iff the signal holds exactly one photon, so it
//! exits in `|01>` for legal states (accept) and `|10>` for `|00>` (reject),
//! without learning which rail holds the photon.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channels::{damp_mode, DampingParams};
use crate::elements::{apply_unitary, post_select_density, Circuit, CircuitElement};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockSpace, ModeOperator, PureState, ZERO};
use crate::trajectories::{map_chunks, trajectory_rng, trajectory_step_gamma, LossModel};
use crate::{ALGEBRA_TOL, IMPOSSIBLE_TOL};

pub const SIGNAL_MODES: [usize; 2] = [0, 1];
pub const PROBE_MODES: [usize; 2] = [2, 3];
pub const DEFAULT_CUTOFF: usize = 3;

/// Probe reading that certifies one photon in the signal.
pub const ACCEPT_PROBE: [usize; 2] = [0, 1];
/// Probe reading produced by an empty signal.
pub const REJECT_PROBE: [usize; 2] = [1, 0];

fn signal_space(cutoff: usize) -> Result<FockSpace> {
    FockSpace::new(2, cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRailQubit {
    c0: Complex64,
    c1: Complex64,
}

impl DualRailQubit {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let n2 = c0.norm_sqr() + c1.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { c0, c1 })
    }

    /// Rescales `(c0, c1)` to unit norm.
    pub fn normalized(c0: Complex64, c1: Complex64) -> Result<Self> {
        let n = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized(n * n));
        }
        Self::new(c0 / n, c1 / n)
    }

    /// Haar-random qubit from a normalized complex Gaussian pair.
    pub fn haar_random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (a, b) = (g(), g());
        Self::normalized(a, b).expect("gaussian pair is nonzero")
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    /// `c0|01> + c1|10>` on a two-mode space.
    pub fn state(&self, cutoff: usize) -> Result<PureState> {
        PureState::from_terms(
            signal_space(cutoff)?,
            &[(self.c0, &[0, 1]), (self.c1, &[1, 0])],
        )
    }

    /// Beamsplitter and phase shifter that prepare this qubit from `|10>`.
    pub fn encoding_circuit(&self, cutoff: usize) -> Result<Circuit> {
        let theta = self.c1.norm().atan2(self.c0.norm());
        let phi = self.c1.arg() - self.c0.arg();
        Circuit::new(
            signal_space(cutoff)?,
            vec![
                CircuitElement::BeamSplitter {
                    modes: SIGNAL_MODES,
                    theta,
                },
                CircuitElement::PhaseShift { mode: 0, phi },
            ],
        )
    }

    /// Extracts the qubit from a two-mode state in the one-photon manifold.
    pub fn from_state(state: &PureState) -> Result<Self> {
        let space = state.space();
        if space.modes() != 2 {
            return Err(Error::InvalidSpace(
                "dual-rail state needs exactly two modes".into(),
            ));
        }
        let c0 = state.amplitude(&[0, 1])?;
        let c1 = state.amplitude(&[1, 0])?;
        let outside = state.norm_squared() - c0.norm_sqr() - c1.norm_sqr();
        if outside > ALGEBRA_TOL {
            return Err(Error::RepresentationViolation(outside));
        }
        Self::normalized(c0, c1)
    }

    pub fn fidelity(&self, other: &DualRailQubit) -> f64 {
        (self.c0.conj() * other.c0 + self.c1.conj() * other.c1).norm_sqr()
    }
}

/// Prepares `c0|01> + c1|10>` by running the encoding circuit on `|10>`.
///
/// The circuit output carries the global phase `exp(-i arg c0)`, which is
/// removed so the returned amplitudes are exactly `c0` and `c1`.
pub fn encode(c0: Complex64, c1: Complex64, cutoff: usize) -> Result<PureState> {
    let qubit = DualRailQubit::new(c0, c1)?;
    let circuit = qubit.encoding_circuit(cutoff)?;
    let input = PureState::basis(*circuit.space(), &[1, 0])?;
    let mut out = input;
    for e in circuit.elements() {
        out = apply_unitary(&out, e)?;
    }
    let phase = Complex64::from_polar(1.0, c0.arg());
    PureState::new(*out.space(), out.amplitudes() * phase)
}

/// The regenerator circuit on a four-mode space `(a, ā, b, b̄)`, ending with
/// the accepting post-selection `b b̄ = 01`.
pub fn build_regenerator(space: &FockSpace) -> Result<Circuit> {
    if space.modes() != 4 {
        return Err(Error::InvalidSpace(format!(
            "regenerator needs 4 modes (a, ā, b, b̄), got {}",
            space.modes()
        )));
    }
    let [a, a_bar] = SIGNAL_MODES;
    let [b, b_bar] = PROBE_MODES;
    Circuit::new(
        *space,
        vec![
            CircuitElement::BeamSplitter {
                modes: [b, b_bar],
                theta: FRAC_PI_4,
            },
            CircuitElement::KerrCrossPhase {
                modes: [a, b],
                phi: PI,
            },
            CircuitElement::KerrCrossPhase {
                modes: [a_bar, b],
                phi: PI,
            },
            CircuitElement::BeamSplitter {
                modes: [b, b_bar],
                theta: PI - FRAC_PI_4,
            },
            CircuitElement::PostSelect {
                modes: PROBE_MODES.to_vec(),
                occ: ACCEPT_PROBE.to_vec(),
            },
        ],
    )
}

/// Result of regenerating a (possibly mixed) signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Regeneration {
    pub p_accept: f64,
    pub p_reject: f64,
    /// Signal state conditional on acceptance.
    pub accepted: Option<DensityMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegenOutcome {
    Accepted {
        state: DensityMatrix,
        probability: f64,
    },
    Rejected {
        probability: f64,
    },
}

impl RegenOutcome {
    pub fn probability(&self) -> f64 {
        match self {
            Self::Accepted { probability, .. } | Self::Rejected { probability } => *probability,
        }
    }
}

impl Regeneration {
    /// Accepted state as a qubit, when it is pure.
    pub fn accepted_qubit(&self) -> Option<DualRailQubit> {
        let rho = self.accepted.as_ref()?;
        DualRailQubit::from_state(&rho.as_pure(1e-10)?).ok()
    }

    pub fn outcomes(&self) -> Vec<RegenOutcome> {
        let mut out = Vec::with_capacity(2);
        if let Some(state) = &self.accepted {
            out.push(RegenOutcome::Accepted {
                state: state.clone(),
                probability: self.p_accept,
            });
        }
        if self.p_reject >= IMPOSSIBLE_TOL {
            out.push(RegenOutcome::Rejected {
                probability: self.p_reject,
            });
        }
        out
    }
}

/// Regenerator for a given cutoff, with the circuit compiled into its two
/// measurement operators on the signal modes.
#[derive(Debug, Clone)]
pub struct Regenerator {
    cutoff: usize,
    circuit: Circuit,
    accept: DMatrix<Complex64>,
    reject: DMatrix<Complex64>,
}

impl Regenerator {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidSpace(
                "dual-rail qubits need cutoff >= 2".into(),
            ));
        }
        let joint = FockSpace::new(4, cutoff)?;
        let circuit = build_regenerator(&joint)?;
        let unitary = circuit.prefix(4);
        let signal = signal_space(cutoff)?;
        let probe = PureState::basis(signal, &[1, 0])?;
        let d2 = signal.dim();
        let mut accept = DMatrix::from_element(d2, d2, ZERO);
        let mut reject = DMatrix::from_element(d2, d2, ZERO);
        for j in 0..d2 {
            let occ = signal.index_basis(j)?;
            let input = PureState::basis(signal, occ.as_slice())?.tensor(&probe)?;
            let out = unitary.unitary_trace(&input)?.pop().expect("four elements");
            for i in 0..d2 {
                let sig = signal.index_basis(i)?;
                let mut acc = sig.as_slice().to_vec();
                acc.extend(ACCEPT_PROBE);
                let mut rej = sig.as_slice().to_vec();
                rej.extend(REJECT_PROBE);
                accept[(i, j)] = out.amplitude(&acc)?;
                reject[(i, j)] = out.amplitude(&rej)?;
            }
        }
        Ok(Self {
            cutoff,
            circuit,
            accept,
            reject,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Signal-space operators `<01|_probe U |10>_probe` and `<10|_probe U |10>_probe`.
    pub fn measurement_operators(&self) -> (&DMatrix<Complex64>, &DMatrix<Complex64>) {
        (&self.accept, &self.reject)
    }

    fn check_signal(&self, space: &FockSpace) -> Result<()> {
        if space.modes() != 2 || space.cutoff() != self.cutoff {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Runs the full four-mode circuit on a signal density matrix.
    pub fn regenerate(&self, rho: &DensityMatrix) -> Result<Regeneration> {
        self.check_signal(rho.space())?;
        check_support(rho)?;
        let probe = PureState::basis(*rho.space(), &[1, 0])?.to_density();
        let joint = rho.tensor(&probe)?;
        let evolved = self
            .circuit
            .prefix(4)
            .run_density(&joint)?
            .state
            .expect("unitary circuit");
        let acc = post_select_density(&evolved, &PROBE_MODES, &ACCEPT_PROBE)?;
        let rej = post_select_density(&evolved, &PROBE_MODES, &REJECT_PROBE)?;
        let stray = 1.0 - acc.probability - rej.probability;
        debug_assert!(
            stray.abs() < 1e-12,
            "probe left the one-photon sector: {stray}"
        );
        let accepted = acc
            .state
            .map(|s| s.partial_trace(&SIGNAL_MODES))
            .transpose()?;
        Ok(Regeneration {
            p_accept: acc.probability,
            p_reject: rej.probability,
            accepted,
        })
    }

    pub fn regenerate_pure(&self, psi: &PureState) -> Result<Regeneration> {
        self.regenerate(&psi.to_density())
    }

    /// Acceptance probability of a pure signal via the compiled operators.
    pub fn accept_probability(&self, psi: &PureState) -> Result<f64> {
        self.check_signal(psi.space())?;
        Ok((&self.accept * psi.amplitudes()).norm_squared())
    }

    /// Samples the probe readout; `Some(state)` on acceptance.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        psi: &PureState,
        rng: &mut R,
    ) -> Result<Option<PureState>> {
        self.check_signal(psi.space())?;
        check_support(&psi.to_density())?;
        let accepted: DVector<Complex64> = &self.accept * psi.amplitudes();
        let p = accepted.norm_squared();
        if p >= IMPOSSIBLE_TOL && rng.random::<f64>() < p {
            Ok(Some(PureState::normalized(*psi.space(), accepted)?))
        } else {
            Ok(None)
        }
    }
}

/// Rejects signals with weight outside `span{|00>, |01>, |10>}`.
fn check_support(rho: &DensityMatrix) -> Result<()> {
    let space = rho.space();
    let outside: f64 = (0..space.dim())
        .filter(|&i| space.photons_in(i, &SIGNAL_MODES) > 1)
        .map(|i| rho.matrix()[(i, i)].re)
        .sum();
    if outside > ALGEBRA_TOL {
        Err(Error::RepresentationViolation(outside))
    } else {
        Ok(())
    }
}

/// Eigen-check of `Q = a^+ a + ā^+ ā`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QndCheck {
    pub eigenvalue: Option<f64>,
    pub is_eigenstate: bool,
}

pub fn qnd_eigenstate_check(state: &PureState) -> Result<QndCheck> {
    let q = ModeOperator::total_number(*state.space(), &SIGNAL_MODES)?;
    let mean = q.expectation(state)?;
    let qpsi = q.apply(state)?;
    let residual = (qpsi - state.amplitudes() * Complex64::new(mean, 0.0)).norm();
    let is_eigenstate = residual <= ALGEBRA_TOL;
    Ok(QndCheck {
        eigenvalue: is_eigenstate.then_some(mean),
        is_eigenstate,
    })
}

/// Single-photon interferometer with equal loss in both arms.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    pub output: DensityMatrix,
    pub p_10: f64,
    pub p_01: f64,
    pub p_vacuum: f64,
}

impl Interferometer {
    /// Probability of `|10>` given that a photon was counted.
    pub fn p_10_given_detection(&self) -> Option<f64> {
        let detected = self.p_10 + self.p_01;
        (detected >= IMPOSSIBLE_TOL).then(|| self.p_10 / detected)
    }
}

/// `|10>` through `BS(theta)`, balanced loss `gamma`, and the inverse splitter.
pub fn balanced_interferometer(theta: f64, gamma: f64, cutoff: usize) -> Result<Interferometer> {
    let space = signal_space(cutoff)?;
    let circuit = Circuit::new(
        space,
        vec![
            CircuitElement::BeamSplitter {
                modes: SIGNAL_MODES,
                theta,
            },
            CircuitElement::Loss {
                modes: SIGNAL_MODES.to_vec(),
                gamma,
            },
            CircuitElement::BeamSplitter {
                modes: SIGNAL_MODES,
                theta: PI - theta,
            },
        ],
    )?;
    let input = PureState::basis(space, &[1, 0])?.to_density();
    let output = circuit
        .run_density(&input)?
        .state
        .expect("no post-selection");
    Ok(Interferometer {
        p_10: output.element(&[1, 0], &[1, 0])?.re,
        p_01: output.element(&[0, 1], &[0, 1])?.re,
        p_vacuum: output.element(&[0, 0], &[0, 0])?.re,
        output,
    })
}

/// A lossy link of `segments` unit steps with optional regeneration stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub segments: usize,
    pub loss: LossModel,
    /// Station after every `k` segments; 0 means only the receiver checks.
    pub regenerate_every: usize,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::domain("segments", 0.0, "need at least one segment"));
        }
        let span = if self.regenerate_every == 0 {
            self.segments
        } else {
            self.regenerate_every.min(self.segments)
        };
        self.loss.validate(span)
    }

    fn is_station(&self, segment: usize) -> bool {
        segment == self.segments
            || (self.regenerate_every > 0 && segment.is_multiple_of(self.regenerate_every))
    }

    /// 1-based segment numbers followed by a station; always ends at the receiver.
    pub fn stations(&self) -> Vec<usize> {
        (1..=self.segments)
            .filter(|&s| self.is_station(s))
            .collect()
    }

    /// Loss exponent of each segment; the loss clock restarts at every station.
    pub fn segment_gammas(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut elapsed = 0;
        let mut out = Vec::with_capacity(self.segments);
        for seg in 1..=self.segments {
            out.push(self.loss.step_gamma(elapsed)?);
            elapsed = if self.is_station(seg) { 0 } else { elapsed + 1 };
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum TransmitMode {
    Exact,
    Trajectory { shots: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station: usize,
    pub after_segment: usize,
    /// Acceptance probability given the qubit reached this station.
    pub p_accept: f64,
    /// Probability of having passed every station up to this one.
    pub cumulative_success: f64,
}

/// JSON transmission report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub mode: String,
    pub segments: usize,
    pub regenerate_every: usize,
    pub p_success: f64,
    /// `1 / p_success`; `null` when nothing gets through.
    pub expected_trials: Option<f64>,
    /// Mean fidelity of delivered qubits with the input.
    pub fidelity: Option<f64>,
    pub per_station: Vec<StationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Binomial standard error of `p_success` (trajectory mode).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
}

pub fn transmit(
    qubit: &DualRailQubit,
    link: &LinkConfig,
    mode: TransmitMode,
    cutoff: usize,
) -> Result<TransmissionReport> {
    transmit_with_workers(qubit, link, mode, cutoff, None)
}

pub fn transmit_with_workers(
    qubit: &DualRailQubit,
    link: &LinkConfig,
    mode: TransmitMode,
    cutoff: usize,
    workers: Option<usize>,
) -> Result<TransmissionReport> {
    let gammas = link.segment_gammas()?;
    let regen = Regenerator::new(cutoff)?;
    match mode {
        TransmitMode::Exact => transmit_exact(qubit, link, &gammas, &regen),
        TransmitMode::Trajectory { shots, seed } => {
            transmit_sampled(qubit, link, &gammas, &regen, shots, seed, workers)
        }
    }
}

fn transmit_exact(
    qubit: &DualRailQubit,
    link: &LinkConfig,
    gammas: &[f64],
    regen: &Regenerator,
) -> Result<TransmissionReport> {
    let input = qubit.state(regen.cutoff())?;
    let space = *input.space();
    let mut rho = Some(input.to_density());
    let mut cumulative = 1.0;
    let mut per_station = Vec::new();
    for (i, &gamma) in gammas.iter().enumerate() {
        let seg = i + 1;
        let params = DampingParams::new(gamma)?;
        rho = match rho {
            Some(r) => {
                let m = SIGNAL_MODES.iter().fold(r.matrix().clone(), |m, &mode| {
                    damp_mode(&m, &space, mode, params)
                });
                Some(DensityMatrix::new(space, m)?)
            }
            None => None,
        };
        if link.is_station(seg) {
            let (p, next) = match &rho {
                Some(r) => {
                    let out = regen.regenerate(r)?;
                    (out.p_accept, out.accepted)
                }
                None => (0.0, None),
            };
            cumulative *= p;
            rho = next;
            per_station.push(StationReport {
                station: per_station.len() + 1,
                after_segment: seg,
                p_accept: p,
                cumulative_success: cumulative,
            });
        }
    }
    let fidelity = rho.map(|r| r.fidelity_with_pure(&input)).transpose()?;
    Ok(TransmissionReport {
        mode: "exact".into(),
        segments: link.segments,
        regenerate_every: link.regenerate_every,
        p_success: cumulative,
        expected_trials: (cumulative > 0.0).then(|| 1.0 / cumulative),
        fidelity,
        per_station,
        shots: None,
        seed: None,
        std_error: None,
    })
}

struct Tally {
    arrived: Vec<u64>,
    accepted: Vec<u64>,
    delivered: u64,
    fidelity_sum: f64,
}

fn transmit_sampled(
    qubit: &DualRailQubit,
    link: &LinkConfig,
    gammas: &[f64],
    regen: &Regenerator,
    shots: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<TransmissionReport> {
    if shots == 0 {
        return Err(Error::domain("shots", 0.0, "need at least one shot"));
    }
    let input = qubit.state(regen.cutoff())?;
    let stations = link.stations();
    let params = gammas
        .iter()
        .map(|&g| DampingParams::new(g))
        .collect::<Result<Vec<_>>>()?;
    let chunks = map_chunks(shots, workers, |range| {
        let mut t = Tally {
            arrived: vec![0; stations.len()],
            accepted: vec![0; stations.len()],
            delivered: 0,
            fidelity_sum: 0.0,
        };
        for shot in range {
            let mut rng = trajectory_rng(seed, shot as u64);
            let mut psi = input.clone();
            let mut station = 0;
            let mut alive = true;
            for (i, p) in params.iter().enumerate() {
                psi = trajectory_step_gamma(&psi, &SIGNAL_MODES, *p, &mut rng, i)?.0;
                if link.is_station(i + 1) {
                    t.arrived[station] += 1;
                    match regen.sample(&psi, &mut rng)? {
                        Some(next) => {
                            t.accepted[station] += 1;
                            psi = next;
                        }
                        None => {
                            alive = false;
                            break;
                        }
                    }
                    station += 1;
                }
            }
            if alive {
                t.delivered += 1;
                t.fidelity_sum += input.fidelity(&psi)?;
            }
        }
        Ok(t)
    })?;
    let mut total = Tally {
        arrived: vec![0; stations.len()],
        accepted: vec![0; stations.len()],
        delivered: 0,
        fidelity_sum: 0.0,
    };
    for c in chunks {
        for k in 0..stations.len() {
            total.arrived[k] += c.arrived[k];
            total.accepted[k] += c.accepted[k];
        }
        total.delivered += c.delivered;
        total.fidelity_sum += c.fidelity_sum;
    }
    let n = shots as f64;
    let per_station = stations
        .iter()
        .enumerate()
        .map(|(k, &seg)| StationReport {
            station: k + 1,
            after_segment: seg,
            p_accept: if total.arrived[k] > 0 {
                total.accepted[k] as f64 / total.arrived[k] as f64
            } else {
                0.0
            },
            cumulative_success: total.accepted[k] as f64 / n,
        })
        .collect();
    let p = total.delivered as f64 / n;
    Ok(TransmissionReport {
        mode: "trajectory".into(),
        segments: link.segments,
        regenerate_every: link.regenerate_every,
        p_success: p,
        expected_trials: (p > 0.0).then(|| 1.0 / p),
        fidelity: (total.delivered > 0).then(|| total.fidelity_sum / total.delivered as f64),
        per_station,
        shots: Some(shots),
        seed: Some(seed),
        std_error: Some((p * (1.0 - p) / n).sqrt()),
    })
}

/// Closed-form success probability of `n` unit steps, with a station after
/// every step (`regenerate`) or only at the receiver.
pub fn success_probability(n: usize, model: &LossModel, regenerate: bool) -> Result<f64> {
    if regenerate {
        Ok(model.survival(1)?.powi(n as i32))
    } else {
        model.survival(n)
    }
}

/// Mean number of transmissions until one qubit gets through.
pub fn expected_trials(n: usize, model: &LossModel, regenerate: bool) -> Result<f64> {
    let p = success_probability(n, model, regenerate)?;
    if p <= 0.0 {
        return Err(Error::ZeroSuccess);
    }
    Ok(1.0 / p)
}

/// Watchdog comparison for the quadratic loss model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchdogTable {
    pub epsilon: f64,
    pub steps: usize,
    /// `1 - eps n^2`.
    pub unregenerated_closed_form: f64,
    /// `(1 - eps)^n`.
    pub regenerated_closed_form: f64,
    pub unregenerated_exact: f64,
    pub regenerated_exact: f64,
    pub trials_unregenerated: f64,
    pub trials_regenerated: f64,
}

pub fn watchdog(epsilon: f64, steps: usize, cutoff: usize) -> Result<WatchdogTable> {
    let loss = LossModel::quadratic(epsilon);
    let qubit = DualRailQubit::new(
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    )?;
    let run = |every| {
        let link = LinkConfig {
            segments: steps,
            loss,
            regenerate_every: every,
        };
        transmit(&qubit, &link, TransmitMode::Exact, cutoff).map(|r| r.p_success)
    };
    Ok(WatchdogTable {
        epsilon,
        steps,
        unregenerated_closed_form: success_probability(steps, &loss, false)?,
        regenerated_closed_form: success_probability(steps, &loss, true)?,
        unregenerated_exact: run(0)?,
        regenerated_exact: run(1)?,
        trials_unregenerated: expected_trials(steps, &loss, false)?,
        trials_regenerated: expected_trials(steps, &loss, true)?,
    })
}
