//! Zero-temperature amplitude damping in Kraus form.
//!
//! A single mode damped by `gamma` keeps each photon with probability
//! `exp(-gamma)`. On the `{|0>, |1>}` subspace this is
//!
//! ```text
//! |0><0| -> |0><0|
//! |0><1| -> exp(-gamma/2) |0><1|
//! |1><1| -> exp(-gamma) |1><1| + (1 - exp(-gamma)) |0><0|
//! ```
//!
//! and for higher cutoffs the photons are lost independently (binomial loss):
//! `K_k |n> = sqrt(C(n,k)) (1 - e^-gamma)^(k/2) e^(-gamma (n-k)/2) |n-k>`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{conjugate_local, embed_local, max_abs, DensityMatrix, FockSpace, ZERO};
use crate::ALGEBRA_TOL;

/// Integrated loss exponent; each photon survives with probability `exp(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    gamma: f64,
}

impl DampingParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::domain("gamma", gamma, "must be finite and >= 0"));
        }
        Ok(Self { gamma })
    }

    /// Parameters giving per-photon loss probability `p`.
    pub fn from_loss_probability(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain("p_jump", p, "must lie in [0, 1)"));
        }
        Self::new(-(-p).ln_1p())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn survival(&self) -> f64 {
        (-self.gamma).exp()
    }

    pub fn loss_probability(&self) -> f64 {
        -(-self.gamma).exp_m1()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Single-mode Kraus operators `K_0 .. K_{d-1}`; `K_k` removes `k` photons.
pub fn damping_kraus_local(cutoff: usize, params: DampingParams) -> Vec<DMatrix<Complex64>> {
    let loss = params.loss_probability();
    let gamma = params.gamma();
    (0..cutoff)
        .map(|k| {
            let mut op = DMatrix::from_element(cutoff, cutoff, ZERO);
            for n in k..cutoff {
                let amp = binomial(n, k).sqrt()
                    * loss.powf(k as f64 / 2.0)
                    * (-gamma * (n - k) as f64 / 2.0).exp();
                op[(n - k, n)] = Complex64::new(amp, 0.0);
            }
            op
        })
        .collect()
}

/// Damps one mode of `rho` in place of building the full Kraus list.
pub(crate) fn damp_mode(
    rho: &DMatrix<Complex64>,
    space: &FockSpace,
    mode: usize,
    params: DampingParams,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(rho.nrows(), rho.ncols(), ZERO);
    for k in damping_kraus_local(space.cutoff(), params) {
        out += conjugate_local(space, &[mode], &k, rho);
    }
    out
}

/// A CPTP map `rho -> sum_i K_i rho K_i^dagger` on a whole Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    space: FockSpace,
    operators: Vec<DMatrix<Complex64>>,
}

impl KrausChannel {
    /// Checks shapes and completeness `sum K^dagger K = I`.
    pub fn new(space: FockSpace, operators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::IncompleteKraus(1.0));
        }
        let dim = space.dim();
        if let Some(bad) = operators
            .iter()
            .find(|k| k.nrows() != dim || k.ncols() != dim)
        {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: bad.nrows(),
            });
        }
        let ch = Self { space, operators };
        let dev = ch.completeness_error();
        if dev > ALGEBRA_TOL {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(ch)
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            operators: vec![DMatrix::identity(space.dim(), space.dim())],
        }
    }

    pub fn amplitude_damping(space: FockSpace, mode: usize, gamma: f64) -> Result<Self> {
        space.check_modes(&[mode])?;
        let params = DampingParams::new(gamma)?;
        let operators = damping_kraus_local(space.cutoff(), params)
            .iter()
            .map(|k| embed_local(&space, &[mode], k))
            .collect();
        Self::new(space, operators)
    }

    /// Equal damping on every mode in `modes`.
    pub fn balanced_damping(space: FockSpace, modes: &[usize], gamma: f64) -> Result<Self> {
        space.check_modes(modes)?;
        modes.iter().try_fold(Self::identity(space), |acc, &m| {
            acc.compose(&Self::amplitude_damping(space, m, gamma)?)
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    /// Max entrywise deviation of `sum K^dagger K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.space.dim();
        let mut sum = DMatrix::from_element(dim, dim, ZERO);
        for k in &self.operators {
            sum += k.adjoint() * k;
        }
        max_abs(&(sum - DMatrix::identity(dim, dim)))
    }

    /// Channel applying `self` first, then `next`.
    pub fn compose(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if self.space != next.space {
            return Err(Error::SpaceMismatch);
        }
        let operators = next
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .filter(|k| max_abs(k) > 0.0)
            .collect();
        Ok(Self {
            space: self.space,
            operators,
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if *rho.space() != self.space {
            return Err(Error::SpaceMismatch);
        }
        let dim = self.space.dim();
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for k in &self.operators {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityMatrix::from_parts_unchecked(self.space, out)
    }

    /// Superoperator matrix acting on row-major vectorized density matrices.
    ///
    /// Two Kraus lists describe the same channel iff these agree.
    pub fn superoperator(&self) -> DMatrix<Complex64> {
        let dim = self.space.dim();
        let mut s = DMatrix::from_element(dim * dim, dim * dim, ZERO);
        for k in &self.operators {
            s += k.kronecker(&k.map(|z| z.conj()));
        }
        s
    }
}
