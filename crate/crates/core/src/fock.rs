//! Truncated multi-mode Fock space.
//!
//! A [`FockSpace`] with `m` modes and cutoff `d` allows occupations `0..d` per
//! mode and has dimension `d^m`. Basis states are ordered lexicographically by
//! occupation vector, mode 0 most significant, so in a two-mode space with
//! `d = 2` the order is `|00>, |01>, |10>, |11>`. File formats depend on this
//! order and it will not change.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{ALGEBRA_TOL, PSD_TOL};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if cutoff == 0 {
            return Err(Error::InvalidSpace("cutoff must be positive".into()));
        }
        let fits = (0..modes).try_fold(1usize, |acc, _| acc.checked_mul(cutoff));
        match fits {
            Some(dim) if dim <= 1 << 16 => Ok(Self { modes, cutoff }),
            _ => Err(Error::InvalidSpace(format!(
                "dimension {cutoff}^{modes} is too large for dense simulation"
            ))),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    /// Index step between neighbouring occupations of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.modes - 1 - mode) as u32)
    }

    pub fn basis_index(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.modes {
            return Err(Error::LengthMismatch {
                expected: self.modes,
                actual: occ.len(),
            });
        }
        let mut index = 0;
        for (mode, &n) in occ.iter().enumerate() {
            if n >= self.cutoff {
                return Err(Error::CutoffViolation {
                    mode,
                    occupation: n,
                    cutoff: self.cutoff,
                });
            }
            index = index * self.cutoff + n;
        }
        Ok(index)
    }

    pub fn index_basis(&self, index: usize) -> Result<OccupationVector> {
        if index >= self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                actual: index + 1,
            });
        }
        Ok(OccupationVector(
            (0..self.modes).map(|m| self.occupation(index, m)).collect(),
        ))
    }

    /// Occupation of `mode` in basis state `index`. No range checks.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff
    }

    /// Total photon number of basis state `index` over `modes`.
    pub fn photons_in(&self, index: usize, modes: &[usize]) -> usize {
        modes.iter().map(|&m| self.occupation(index, m)).sum()
    }

    pub fn basis(&self) -> impl Iterator<Item = OccupationVector> + '_ {
        (0..self.dim()).map(move |i| {
            OccupationVector((0..self.modes).map(|m| self.occupation(i, m)).collect())
        })
    }

    /// Checks that `modes` is a non-empty list of distinct, in-range modes.
    pub fn check_modes(&self, modes: &[usize]) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= self.modes {
                return Err(Error::ModeOutOfRange {
                    mode: m,
                    modes: self.modes,
                });
            }
            if modes[..i].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
        }
        Ok(())
    }

    /// Space spanned by `count` modes with the same cutoff.
    pub(crate) fn with_modes(&self, count: usize) -> Result<Self> {
        Self::new(count, self.cutoff)
    }

    fn check_same(&self, other: &FockSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Per-mode photon counts labelling one basis ket.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl From<Vec<usize>> for OccupationVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for n in &self.0 {
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Index bookkeeping for an operator acting on a subset of modes.
///
/// Global index of (rest configuration `b`, local index `j`) is
/// `bases[b] + offsets[j]`, where local indices enumerate the subset's
/// occupations lexicographically in the order the modes were given.
pub(crate) struct ModeLayout {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

impl ModeLayout {
    pub fn new(space: &FockSpace, modes: &[usize]) -> Self {
        let d = space.cutoff;
        let local_dim = d.pow(modes.len() as u32);
        let offsets = (0..local_dim)
            .map(|j| {
                let mut rem = j;
                let mut off = 0;
                for &m in modes.iter().rev() {
                    off += (rem % d) * space.stride(m);
                    rem /= d;
                }
                off
            })
            .collect();
        let bases = (0..space.dim())
            .filter(|&i| modes.iter().all(|&m| space.occupation(i, m) == 0))
            .collect();
        Self { offsets, bases }
    }
}

/// Applies a local operator on `modes` to a full-space vector.
pub(crate) fn apply_local(
    space: &FockSpace,
    modes: &[usize],
    op: &DMatrix<Complex64>,
    v: &DVector<Complex64>,
) -> DVector<Complex64> {
    let layout = ModeLayout::new(space, modes);
    apply_with_layout(&layout, op, v)
}

pub(crate) fn apply_with_layout(
    layout: &ModeLayout,
    op: &DMatrix<Complex64>,
    v: &DVector<Complex64>,
) -> DVector<Complex64> {
    let mut out = DVector::from_element(v.len(), ZERO);
    let n = layout.offsets.len();
    let mut local = vec![ZERO; n];
    for &base in &layout.bases {
        for (l, &off) in local.iter_mut().zip(&layout.offsets) {
            *l = v[base + off];
        }
        for (j, &off) in layout.offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (l, x) in local.iter().enumerate() {
                acc += op[(j, l)] * x;
            }
            out[base + off] = acc;
        }
    }
    out
}

/// `K rho K^dagger` for a local operator `K` on `modes`.
pub(crate) fn conjugate_local(
    space: &FockSpace,
    modes: &[usize],
    op: &DMatrix<Complex64>,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let layout = ModeLayout::new(space, modes);
    let dim = rho.nrows();
    let mut left = DMatrix::from_element(dim, dim, ZERO);
    for c in 0..dim {
        let col = apply_with_layout(&layout, op, &rho.column(c).into_owned());
        left.set_column(c, &col);
    }
    // (K A^dagger)^dagger = A K^dagger
    let left_adj = left.adjoint();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for c in 0..dim {
        let col = apply_with_layout(&layout, op, &left_adj.column(c).into_owned());
        out.set_column(c, &col);
    }
    out.adjoint()
}

/// Embeds a local operator on `modes` into the full space.
pub(crate) fn embed_local(
    space: &FockSpace,
    modes: &[usize],
    op: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let layout = ModeLayout::new(space, modes);
    let dim = space.dim();
    let mut full = DMatrix::from_element(dim, dim, ZERO);
    for &base in &layout.bases {
        for (j, &oj) in layout.offsets.iter().enumerate() {
            for (l, &ol) in layout.offsets.iter().enumerate() {
                full[(base + oj, base + ol)] = op[(j, l)];
            }
        }
    }
    full
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Principal square root of a Hermitian PSD matrix.
fn hermitian_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let roots = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&x| Complex64::new(x.max(0.0).sqrt(), 0.0)),
    ));
    v * roots * v.adjoint()
}

/// A normalized state vector over the basis of a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: FockSpace,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Wraps `amplitudes`, rejecting vectors whose squared norm is not 1.
    pub fn new(space: FockSpace, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::LengthMismatch {
                expected: space.dim(),
                actual: amplitudes.len(),
            });
        }
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalizes `amplitudes`; fails only for the zero vector.
    pub fn normalized(space: FockSpace, amplitudes: DVector<Complex64>) -> Result<Self> {
        let n2 = amplitudes.norm_squared();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NotNormalized(n2));
        }
        Self::new(space, amplitudes.unscale(n2.sqrt()))
    }

    pub fn basis(space: FockSpace, occ: &[usize]) -> Result<Self> {
        let idx = space.basis_index(occ)?;
        let mut amps = DVector::from_element(space.dim(), ZERO);
        amps[idx] = ONE;
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        let mut amps = DVector::from_element(space.dim(), ZERO);
        amps[0] = ONE;
        Self {
            space,
            amplitudes: amps,
        }
    }

    /// Sum of `coefficient * |occupation>` terms; the result must be normalized.
    pub fn from_terms(space: FockSpace, terms: &[(Complex64, &[usize])]) -> Result<Self> {
        let mut amps = DVector::from_element(space.dim(), ZERO);
        for (c, occ) in terms {
            amps[space.basis_index(occ)?] += c;
        }
        Self::new(space, amps)
    }

    pub(crate) fn from_parts_unchecked(space: FockSpace, amplitudes: DVector<Complex64>) -> Self {
        Self { space, amplitudes }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occ: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.basis_index(occ)?])
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.space.check_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.space.cutoff != other.space.cutoff {
            return Err(Error::CutoffMismatch(self.space.cutoff, other.space.cutoff));
        }
        let space = FockSpace::new(self.space.modes + other.space.modes, self.space.cutoff)?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Equality up to a global phase, entrywise within `tol`.
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        if self.space != other.space {
            return false;
        }
        let overlap = self.amplitudes.dotc(&other.amplitudes);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    /// Entrywise equality within `tol`, global phase included.
    pub fn approx_eq_exact(&self, other: &PureState, tol: f64) -> bool {
        self.space == other.space
            && self
                .amplitudes
                .iter()
                .zip(other.amplitudes.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Nonzero amplitudes as `(occupations, amplitude)` pairs.
    pub fn terms(&self, tol: f64) -> Vec<(OccupationVector, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, a)| (self.space.index_basis(i).expect("index in range"), *a))
            .collect()
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            modes: self.space.modes,
            cutoff: self.space.cutoff,
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_record(record: &StateRecord) -> Result<Self> {
        let space = FockSpace::new(record.modes, record.cutoff)?;
        let amps = DVector::from_iterator(
            record.amplitudes.len(),
            record
                .amplitudes
                .iter()
                .map(|&[re, im]| Complex64::new(re, im)),
        );
        Self::new(space, amps)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms(1e-12);
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (occ, a)) in terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, occ)?;
        }
        Ok(())
    }
}

/// JSON form of a pure state: `{"modes", "cutoff", "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub modes: usize,
    pub cutoff: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// JSON form of a density matrix, rows of `[re, im]` pairs in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub modes: usize,
    pub cutoff: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(space: FockSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_parts_unchecked(space, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(
        space: FockSpace,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: matrix.nrows(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    /// Convex mixture `sum p_i |psi_i><psi_i|`.
    pub fn mixture(components: &[(f64, &PureState)]) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyModeSet)?.1;
        let space = first.space;
        let mut m = DMatrix::from_element(space.dim(), space.dim(), ZERO);
        for (p, psi) in components {
            space.check_same(&psi.space)?;
            if *p < 0.0 {
                return Err(Error::domain(
                    "weight",
                    *p,
                    "mixture weights must be non-negative",
                ));
            }
            m += psi.to_density().matrix * Complex64::new(*p, 0.0);
        }
        Self::new(space, m)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_deviation(&self.matrix);
        if herm > ALGEBRA_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotUnitTrace(tr));
        }
        let min = self.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<Complex64> {
        Ok(self.matrix[(self.space.basis_index(row)?, self.space.basis_index(col)?)])
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.space.cutoff != other.space.cutoff {
            return Err(Error::CutoffMismatch(self.space.cutoff, other.space.cutoff));
        }
        let space = FockSpace::new(self.space.modes + other.space.modes, self.space.cutoff)?;
        Ok(Self {
            space,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Reduced state on `keep` (in the given order), tracing out the rest.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.space.check_modes(keep)?;
        let traced: Vec<usize> = (0..self.space.modes)
            .filter(|m| !keep.contains(m))
            .collect();
        let kept = ModeLayout::new(&self.space, keep);
        let trace_offsets = if traced.is_empty() {
            vec![0]
        } else {
            ModeLayout::new(&self.space, &traced).offsets
        };
        let n = kept.offsets.len();
        let mut out = DMatrix::from_element(n, n, ZERO);
        for (i, &oi) in kept.offsets.iter().enumerate() {
            for (j, &oj) in kept.offsets.iter().enumerate() {
                out[(i, j)] = trace_offsets
                    .iter()
                    .map(|&t| self.matrix[(oi + t, oj + t)])
                    .sum();
            }
        }
        Ok(Self {
            space: self.space.with_modes(keep.len())?,
            matrix: out,
        })
    }

    /// `(1/2) ||self - other||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let diff = &self.matrix - &other.matrix;
        Ok(0.5
            * hermitian_eigenvalues(&diff)
                .iter()
                .map(|x| x.abs())
                .sum::<f64>())
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> Result<f64> {
        self.space.check_same(&psi.space)?;
        let v = &self.matrix * &psi.amplitudes;
        Ok(psi.amplitudes.dotc(&v).re)
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let s = hermitian_sqrt(&self.matrix);
        let inner = &s * &other.matrix * &s;
        let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
        let tr: f64 = hermitian_eigenvalues(&inner)
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .sum();
        Ok(tr * tr)
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.space == other.space && max_abs(&(&self.matrix - &other.matrix)) <= tol
    }

    /// Returns the state vector if the matrix has rank one within `tol`.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        let eig = SymmetricEigen::new(self.matrix.clone());
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let v = eig.eigenvectors.column(k).into_owned();
        PureState::normalized(self.space, v).ok()
    }

    pub fn to_record(&self) -> DensityRecord {
        DensityRecord {
            modes: self.space.modes,
            cutoff: self.space.cutoff,
            matrix: self
                .matrix
                .row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_record(record: &DensityRecord) -> Result<Self> {
        let space = FockSpace::new(record.modes, record.cutoff)?;
        let dim = space.dim();
        if record.matrix.len() != dim || record.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: record.matrix.len(),
            });
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = record.matrix[i][j];
            Complex64::new(re, im)
        });
        Self::new(space, m)
    }
}

/// A linear operator on the full space of a [`FockSpace`], built from mode
/// ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    space: FockSpace,
    matrix: DMatrix<Complex64>,
}

impl ModeOperator {
    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// Truncated annihilation operator: `<n-1| a |n> = sqrt(n)`.
    pub fn annihilation(space: FockSpace, mode: usize) -> Result<Self> {
        space.check_modes(&[mode])?;
        let d = space.cutoff;
        let local = DMatrix::from_fn(d, d, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        Ok(Self {
            space,
            matrix: embed_local(&space, &[mode], &local),
        })
    }

    pub fn creation(space: FockSpace, mode: usize) -> Result<Self> {
        Ok(Self::annihilation(space, mode)?.adjoint())
    }

    /// `a^dagger a` for one mode.
    pub fn number(space: FockSpace, mode: usize) -> Result<Self> {
        let a = Self::annihilation(space, mode)?;
        Ok(&a.adjoint() * &a)
    }

    /// Sum of number operators over `modes`.
    pub fn total_number(space: FockSpace, modes: &[usize]) -> Result<Self> {
        space.check_modes(modes)?;
        let mut acc = Self::zero(space);
        for &m in modes {
            acc = &acc + &Self::number(space, m)?;
        }
        Ok(acc)
    }

    pub fn from_matrix(space: FockSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::LengthMismatch {
                expected: space.dim(),
                actual: matrix.nrows(),
            });
        }
        Ok(Self { space, matrix })
    }

    fn zero(space: FockSpace) -> Self {
        Self {
            space,
            matrix: DMatrix::from_element(space.dim(), space.dim(), ZERO),
        }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermitian_deviation(&self.matrix) <= tol
    }

    pub fn apply(&self, state: &PureState) -> Result<DVector<Complex64>> {
        self.space.check_same(&state.space)?;
        Ok(&self.matrix * &state.amplitudes)
    }

    pub fn expectation(&self, state: &PureState) -> Result<f64> {
        self.ensure_hermitian()?;
        let v = self.apply(state)?;
        Ok(state.amplitudes.dotc(&v).re)
    }

    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64> {
        self.ensure_hermitian()?;
        self.space.check_same(&rho.space)?;
        Ok((&self.matrix * &rho.matrix).trace().re)
    }

    fn ensure_hermitian(&self) -> Result<()> {
        let dev = hermitian_deviation(&self.matrix);
        if dev > ALGEBRA_TOL {
            Err(Error::NotHermitian(dev))
        } else {
            Ok(())
        }
    }
}

impl Add for &ModeOperator {
    type Output = ModeOperator;
    fn add(self, rhs: &ModeOperator) -> ModeOperator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        ModeOperator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &ModeOperator {
    type Output = ModeOperator;
    fn sub(self, rhs: &ModeOperator) -> ModeOperator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        ModeOperator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &ModeOperator {
    type Output = ModeOperator;
    fn mul(self, rhs: &ModeOperator) -> ModeOperator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        ModeOperator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}
