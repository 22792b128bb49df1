//! Circuit elements and the circuit executor.
//!
//! Beamsplitter convention: `BeamSplitter { modes: [p, q], theta }` sends a
//! photon entering mode `p` to `cos(theta)` in mode `q` plus `sin(theta)` in
//! mode `p`, i.e. `U(theta)|10> = cos(theta)|01> + sin(theta)|10>` on the
//! pair. It is the real rotation `exp[(theta - pi/2)(a_p^+ a_q - a_q^+ a_p)]`,
//! and its inverse is `BeamSplitter { theta: pi - theta }`.
//!
//! The matrix is built exactly in each photon-number sector of the pair and
//! then projected onto the truncated space. Sectors holding more than `d - 1`
//! photons do not fit and lose norm; the executor reports that as leakage.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{damp_mode, DampingParams};
use crate::error::{Error, Result};
use crate::fock::{
    apply_local, conjugate_local, embed_local, DensityMatrix, FockSpace, PureState, ZERO,
};
use crate::trajectories::{trajectory_step_gamma, JumpEvent};
use crate::{IMPOSSIBLE_TOL, LEAKAGE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CircuitElement {
    #[serde(rename = "beamsplitter")]
    BeamSplitter { modes: [usize; 2], theta: f64 },
    #[serde(rename = "phase")]
    PhaseShift { mode: usize, phi: f64 },
    #[serde(rename = "kerr")]
    KerrCrossPhase { modes: [usize; 2], phi: f64 },
    #[serde(rename = "loss")]
    Loss { modes: Vec<usize>, gamma: f64 },
    #[serde(rename = "postselect")]
    PostSelect { modes: Vec<usize>, occ: Vec<usize> },
}

impl CircuitElement {
    pub fn modes(&self) -> Vec<usize> {
        match self {
            Self::BeamSplitter { modes, .. } | Self::KerrCrossPhase { modes, .. } => modes.to_vec(),
            Self::PhaseShift { mode, .. } => vec![*mode],
            Self::Loss { modes, .. } | Self::PostSelect { modes, .. } => modes.clone(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(
            self,
            Self::BeamSplitter { .. } | Self::PhaseShift { .. } | Self::KerrCrossPhase { .. }
        )
    }

    pub fn validate(&self, space: &FockSpace) -> Result<()> {
        space.check_modes(&self.modes())?;
        match self {
            Self::BeamSplitter { theta: x, .. }
            | Self::PhaseShift { phi: x, .. }
            | Self::KerrCrossPhase { phi: x, .. } => {
                if !x.is_finite() {
                    return Err(Error::domain("angle", *x, "must be finite"));
                }
            }
            Self::Loss { gamma, .. } => {
                DampingParams::new(*gamma)?;
            }
            Self::PostSelect { modes, occ } => {
                if occ.len() != modes.len() {
                    return Err(Error::LengthMismatch {
                        expected: modes.len(),
                        actual: occ.len(),
                    });
                }
                if let Some((i, &n)) = occ.iter().enumerate().find(|(_, &n)| n >= space.cutoff()) {
                    return Err(Error::CutoffViolation {
                        mode: modes[i],
                        occupation: n,
                        cutoff: space.cutoff(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The inverse of a unitary element; `None` for loss and post-selection.
    pub fn inverse(&self) -> Option<Self> {
        match self {
            Self::BeamSplitter { modes, theta } => Some(Self::BeamSplitter {
                modes: *modes,
                theta: std::f64::consts::PI - theta,
            }),
            Self::PhaseShift { mode, phi } => Some(Self::PhaseShift {
                mode: *mode,
                phi: -phi,
            }),
            Self::KerrCrossPhase { modes, phi } => Some(Self::KerrCrossPhase {
                modes: *modes,
                phi: -phi,
            }),
            _ => None,
        }
    }

    /// Local matrix of a unitary element on its own modes (`d^k x d^k`).
    pub fn local_unitary(&self, cutoff: usize) -> Option<DMatrix<Complex64>> {
        match self {
            Self::BeamSplitter { theta, .. } => Some(beamsplitter_block(cutoff, *theta)),
            Self::PhaseShift { phi, .. } => Some(DMatrix::from_diagonal(&DVector::from_iterator(
                cutoff,
                (0..cutoff).map(|n| Complex64::from_polar(1.0, phi * n as f64)),
            ))),
            Self::KerrCrossPhase { phi, .. } => Some(kerr_block(cutoff, *phi)),
            _ => None,
        }
    }
}

/// Two-mode beamsplitter matrix on a `d x d` pair, local index `n1 * d + n2`.
pub fn beamsplitter_block(cutoff: usize, theta: f64) -> DMatrix<Complex64> {
    let d = cutoff;
    let angle = theta - FRAC_PI_2;
    let mut block = DMatrix::from_element(d * d, d * d, ZERO);
    for total in 0..=2 * (d - 1) {
        // Sector basis |k, total - k>, k = photons in the first mode.
        let size = total + 1;
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for k in 0..size {
            let rest = (total - k) as f64;
            if k + 1 < size {
                gen[(k + 1, k)] = ((k + 1) as f64 * rest).sqrt();
            }
            if k > 0 {
                gen[(k - 1, k)] = -((k as f64) * (rest + 1.0)).sqrt();
            }
        }
        let u = (gen * angle).exp();
        for k in 0..size {
            for j in 0..size {
                let (k2, j2) = (total - k, total - j);
                if k < d && k2 < d && j < d && j2 < d {
                    block[(k * d + k2, j * d + j2)] = Complex64::new(u[(k, j)], 0.0);
                }
            }
        }
    }
    block
}

/// Diagonal cross-phase `exp(i phi n1 n2)` on a `d x d` pair.
pub fn kerr_block(cutoff: usize, phi: f64) -> DMatrix<Complex64> {
    let d = cutoff;
    DMatrix::from_diagonal(&DVector::from_iterator(
        d * d,
        (0..d * d).map(|i| Complex64::from_polar(1.0, phi * ((i / d) * (i % d)) as f64)),
    ))
}

/// Full-space beamsplitter matrix acting on `pair`.
pub fn beamsplitter_unitary(
    space: &FockSpace,
    pair: [usize; 2],
    theta: f64,
) -> Result<DMatrix<Complex64>> {
    let el = CircuitElement::BeamSplitter { modes: pair, theta };
    el.validate(space)?;
    Ok(embed_local(
        space,
        &pair,
        &beamsplitter_block(space.cutoff(), theta),
    ))
}

/// Full-space Kerr cross-phase matrix acting on `pair`.
pub fn kerr_unitary(space: &FockSpace, pair: [usize; 2], phi: f64) -> Result<DMatrix<Complex64>> {
    let el = CircuitElement::KerrCrossPhase { modes: pair, phi };
    el.validate(space)?;
    Ok(embed_local(space, &pair, &kerr_block(space.cutoff(), phi)))
}

/// Conditional state after a projective selection, plus its probability.
/// `state` is `None` when the outcome is impossible.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection<S> {
    pub probability: f64,
    pub state: Option<S>,
}

impl<S> PostSelection<S> {
    pub fn is_impossible(&self) -> bool {
        self.state.is_none()
    }
}

fn selection_mask(space: &FockSpace, modes: &[usize], occ: &[usize]) -> Result<Vec<bool>> {
    CircuitElement::PostSelect {
        modes: modes.to_vec(),
        occ: occ.to_vec(),
    }
    .validate(space)?;
    Ok((0..space.dim())
        .map(|i| {
            modes
                .iter()
                .zip(occ)
                .all(|(&m, &n)| space.occupation(i, m) == n)
        })
        .collect())
}

pub fn post_select(
    state: &PureState,
    modes: &[usize],
    occ: &[usize],
) -> Result<PostSelection<PureState>> {
    let mask = selection_mask(state.space(), modes, occ)?;
    let projected = DVector::from_iterator(
        mask.len(),
        state
            .amplitudes()
            .iter()
            .zip(&mask)
            .map(|(a, &keep)| if keep { *a } else { ZERO }),
    );
    let p = projected.norm_squared();
    if p < IMPOSSIBLE_TOL {
        return Ok(PostSelection {
            probability: 0.0,
            state: None,
        });
    }
    Ok(PostSelection {
        probability: p,
        state: Some(PureState::normalized(*state.space(), projected)?),
    })
}

pub fn post_select_density(
    rho: &DensityMatrix,
    modes: &[usize],
    occ: &[usize],
) -> Result<PostSelection<DensityMatrix>> {
    let mask = selection_mask(rho.space(), modes, occ)?;
    let m = DMatrix::from_fn(mask.len(), mask.len(), |i, j| {
        if mask[i] && mask[j] {
            rho.matrix()[(i, j)]
        } else {
            ZERO
        }
    });
    let p = m.trace().re;
    if p < IMPOSSIBLE_TOL {
        return Ok(PostSelection {
            probability: 0.0,
            state: None,
        });
    }
    Ok(PostSelection {
        probability: p,
        state: Some(DensityMatrix::from_parts_unchecked(
            *rho.space(),
            m.unscale(p),
        )?),
    })
}

fn check_leakage(before: f64, after: f64) -> Result<()> {
    let loss = before - after;
    if loss > LEAKAGE_TOL {
        Err(Error::Leakage(loss))
    } else {
        Ok(())
    }
}

/// Applies a unitary element to a pure state.
pub fn apply_unitary(state: &PureState, elem: &CircuitElement) -> Result<PureState> {
    let space = *state.space();
    elem.validate(&space)?;
    let local = elem
        .local_unitary(space.cutoff())
        .ok_or_else(|| Error::domain("element", f64::NAN, "not a unitary element"))?;
    let out = apply_local(&space, &elem.modes(), &local, state.amplitudes());
    check_leakage(state.norm_squared(), out.norm_squared())?;
    Ok(PureState::from_parts_unchecked(space, out))
}

/// Applies one element to a density matrix. Post-selection returns the
/// conditional state and its probability; every other element has
/// probability 1.
pub fn apply_element_density(
    rho: &DensityMatrix,
    elem: &CircuitElement,
) -> Result<PostSelection<DensityMatrix>> {
    let space = *rho.space();
    elem.validate(&space)?;
    let matrix = match elem {
        CircuitElement::PostSelect { modes, occ } => return post_select_density(rho, modes, occ),
        CircuitElement::Loss { modes, gamma } => {
            let params = DampingParams::new(*gamma)?;
            modes.iter().fold(rho.matrix().clone(), |m, &mode| {
                damp_mode(&m, &space, mode, params)
            })
        }
        unitary => {
            let local = unitary
                .local_unitary(space.cutoff())
                .expect("unitary element");
            let out = conjugate_local(&space, &unitary.modes(), &local, rho.matrix());
            check_leakage(rho.trace(), out.trace().re)?;
            out
        }
    };
    Ok(PostSelection {
        probability: 1.0,
        state: Some(DensityMatrix::from_parts_unchecked(space, matrix)?),
    })
}

/// Result of running a circuit on a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureRun {
    /// Final state, `None` if a post-selection was impossible.
    pub state: Option<PureState>,
    /// Product of post-selection probabilities along the way.
    pub weight: f64,
    pub jumps: Vec<JumpEvent>,
}

/// Applies one element to a pure state. Loss needs `rng` and performs one
/// quantum-jump step; its events are tagged with `step`.
pub fn apply_element_pure<R: Rng + ?Sized>(
    state: &PureState,
    elem: &CircuitElement,
    rng: Option<&mut R>,
    step: usize,
) -> Result<PureRun> {
    elem.validate(state.space())?;
    match elem {
        CircuitElement::PostSelect { modes, occ } => {
            let sel = post_select(state, modes, occ)?;
            Ok(PureRun {
                state: sel.state,
                weight: sel.probability,
                jumps: Vec::new(),
            })
        }
        CircuitElement::Loss { modes, gamma } => {
            let rng = rng.ok_or(Error::MissingRandomSource)?;
            let params = DampingParams::new(*gamma)?;
            let (next, jumps) = trajectory_step_gamma(state, modes, params, rng, step)?;
            Ok(PureRun {
                state: Some(next),
                weight: 1.0,
                jumps,
            })
        }
        unitary => Ok(PureRun {
            state: Some(apply_unitary(state, unitary)?),
            weight: 1.0,
            jumps: Vec::new(),
        }),
    }
}

/// An ordered list of elements on a fixed Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    space: FockSpace,
    elements: Vec<CircuitElement>,
}

/// JSON form: `{"modes", "cutoff", "elements": [{"type": ...}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub modes: usize,
    pub cutoff: usize,
    pub elements: Vec<CircuitElement>,
}

impl Circuit {
    pub fn new(space: FockSpace, elements: Vec<CircuitElement>) -> Result<Self> {
        for e in &elements {
            e.validate(&space)?;
        }
        Ok(Self { space, elements })
    }

    pub fn empty(space: FockSpace) -> Self {
        Self {
            space,
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, elem: CircuitElement) -> Result<()> {
        elem.validate(&self.space)?;
        self.elements.push(elem);
        Ok(())
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    /// Circuit made of the first `n` elements.
    pub fn prefix(&self, n: usize) -> Circuit {
        Circuit {
            space: self.space,
            elements: self.elements[..n.min(self.elements.len())].to_vec(),
        }
    }

    pub fn from_file(file: &CircuitFile) -> Result<Self> {
        Self::new(
            FockSpace::new(file.modes, file.cutoff)?,
            file.elements.clone(),
        )
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            modes: self.space.modes(),
            cutoff: self.space.cutoff(),
            elements: self.elements.clone(),
        }
    }

    /// Full unitary of a circuit made only of unitary elements.
    pub fn unitary(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.space.dim();
        let mut u = DMatrix::identity(dim, dim);
        for e in &self.elements {
            let local = e
                .local_unitary(self.space.cutoff())
                .ok_or_else(|| Error::domain("element", f64::NAN, "circuit is not unitary"))?;
            u = embed_local(&self.space, &e.modes(), &local) * u;
        }
        Ok(u)
    }

    /// States after each element of a unitary-only circuit.
    pub fn unitary_trace(&self, input: &PureState) -> Result<Vec<PureState>> {
        self.check_space(input.space())?;
        let mut out = Vec::with_capacity(self.elements.len());
        let mut cur = input.clone();
        for e in &self.elements {
            cur = apply_unitary(&cur, e)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Deterministic execution on a density matrix.
    pub fn run_density(&self, rho: &DensityMatrix) -> Result<PostSelection<DensityMatrix>> {
        self.check_space(rho.space())?;
        let mut cur = rho.clone();
        let mut probability = 1.0;
        for e in &self.elements {
            let step = apply_element_density(&cur, e)?;
            probability *= step.probability;
            match step.state {
                Some(s) => cur = s,
                None => {
                    return Ok(PostSelection {
                        probability: 0.0,
                        state: None,
                    })
                }
            }
        }
        Ok(PostSelection {
            probability,
            state: Some(cur),
        })
    }

    /// Execution on a pure state; loss elements are sampled with `rng`.
    pub fn run_pure<R: Rng + ?Sized>(
        &self,
        input: &PureState,
        mut rng: Option<&mut R>,
    ) -> Result<PureRun> {
        self.check_space(input.space())?;
        let mut run = PureRun {
            state: Some(input.clone()),
            weight: 1.0,
            jumps: Vec::new(),
        };
        for (step, e) in self.elements.iter().enumerate() {
            let Some(cur) = run.state.as_ref() else { break };
            let next = apply_element_pure(cur, e, rng.as_deref_mut(), step)?;
            run.weight *= next.weight;
            run.jumps.extend(next.jumps);
            run.state = next.state;
        }
        if run.state.is_none() {
            run.weight = 0.0;
        }
        Ok(run)
    }

    fn check_space(&self, space: &FockSpace) -> Result<()> {
        if *space == self.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}
