//! Dense state vectors and density matrices over multi-party systems.
//!
//! Parties are numbered `1..=N`. Amplitudes and matrix entries are stored in
//! row-major party order: party 1 owns the most significant index digit, so the
//! basis ket `|10...0>` of N qubits sits at index `2^(N-1)`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normalization tolerance for states and traces.
pub const TAU_NORM: f64 = 1e-9;
/// Maximum entrywise deviation from Hermiticity.
pub const TAU_HERM: f64 = 1e-9;
/// Most negative eigenvalue accepted for a density matrix.
pub const TAU_PSD: f64 = 1e-9;

/// A set of parties, stored as a bit mask (bit `k - 1` is party `k`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsystemSet(u64);

impl SubsystemSet {
    pub const EMPTY: SubsystemSet = SubsystemSet(0);

    pub fn from_mask(mask: u64) -> Self {
        SubsystemSet(mask)
    }

    /// Builds a set from 1-based party numbers.
    pub fn from_parties(parties: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &p in parties {
            if p == 0 || p > 64 {
                return Err(Error::InvalidArgument(format!("party {p} is out of range")));
            }
            mask |= 1 << (p - 1);
        }
        Ok(SubsystemSet(mask))
    }

    /// All parties `1..=n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SubsystemSet(u64::MAX)
        } else {
            SubsystemSet((1u64 << n) - 1)
        }
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, party: usize) -> bool {
        (1..=64).contains(&party) && self.0 & (1 << (party - 1)) != 0
    }

    /// Complement within `1..=n`.
    pub fn complement(self, n: usize) -> Self {
        SubsystemSet(!self.0 & Self::full(n).0)
    }

    pub fn union(self, other: Self) -> Self {
        SubsystemSet(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest party number, if any.
    pub fn min_party(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Party numbers in ascending order.
    pub fn parties(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..64).filter(move |b| mask & (1 << b) != 0).map(|b| b + 1)
    }

    /// True when the set is a nonempty proper subset of `1..=n`.
    pub fn is_proper(self, n: usize) -> bool {
        !self.is_empty() && self.is_subset_of(Self::full(n)) && self != Self::full(n)
    }
}

impl fmt::Debug for SubsystemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.parties().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Normalized complex amplitude vector over a tensor product of parties.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::Invariant("a state needs at least one party".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::Invariant(format!("party dimension {d} is below 2")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Invariant("total dimension overflows".into()))
}

impl PureState {
    /// Validating constructor. Inputs that are not normalized within
    /// [`TAU_NORM`] are rejected, not repaired.
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::Invariant(format!(
                "expected {total} amplitudes for dims {dims:?}, got {}",
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > TAU_NORM {
            return Err(Error::Invariant(format!("state norm squared is {norm_sq}, expected 1")));
        }
        Ok(PureState { dims, amplitudes })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn from_unnormalized(dims: Vec<usize>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::Invariant(format!(
                "expected {total} amplitudes for dims {dims:?}, got {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Invariant("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(PureState { dims, amplitudes })
    }

    /// The computational basis state with the given per-party digits.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(&x, &d)| x >= d) {
            return Err(Error::InvalidArgument(format!(
                "digits {digits:?} do not fit dims {dims:?}"
            )));
        }
        let index = digits.iter().zip(&dims).fold(0, |acc, (&x, &d)| acc * d + x);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); total];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { dims, amplitudes })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        PureState { dims, amplitudes }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Tr(ρ_keep²) of the reduced state on `keep`, computed from the
    /// amplitudes by reshaping into a (kept × traced) matrix and taking the
    /// Gram matrix on the smaller side.
    pub fn reduced_purity(&self, keep: SubsystemSet) -> Result<f64> {
        let n = self.n_parties();
        if !keep.is_subset_of(SubsystemSet::full(n)) {
            return Err(Error::InvalidArgument(format!(
                "subsystem {keep:?} is not within {n} parties"
            )));
        }
        let split = IndexSplit::new(&self.dims, keep);
        let (dk, dt) = (split.kept_dim, split.traced_dim);
        let mut m = vec![Complex64::new(0.0, 0.0); dk * dt];
        for (i, a) in self.amplitudes.iter().enumerate() {
            m[split.rows[i] * dt + split.cols[i]] = *a;
        }
        Ok(if dk <= dt {
            gram_purity(&m, dk, dt, |a, c| a * dt + c)
        } else {
            gram_purity(&m, dt, dk, |c, a| a * dt + c)
        })
    }

    /// Applies a `d × d` unitary on one party (1-based).
    pub fn apply_local(&self, party: usize, unitary: &DMatrix<Complex64>) -> Result<PureState> {
        let n = self.n_parties();
        if party == 0 || party > n {
            return Err(Error::InvalidArgument(format!("party {party} is out of range")));
        }
        let d = self.dims[party - 1];
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::Dimension(format!(
                "unitary is {}x{}, party {party} has dimension {d}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let stride: usize = self.dims[party..].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, slot) in out.iter_mut().enumerate() {
            let digit = (i / stride) % d;
            let base = i - digit * stride;
            *slot = (0..d)
                .map(|e| unitary[(digit, e)] * self.amplitudes[base + e * stride])
                .sum();
        }
        Ok(PureState {
            dims: self.dims.clone(),
            amplitudes: out,
        })
    }

    /// |⟨self|other⟩|² for states with equal shape.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::Dimension("states have different dims".into()));
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

/// Σ_{a,b} |G_ab|² for G = M M† where rows of M are indexed by `a < rows`.
fn gram_purity(m: &[Complex64], rows: usize, len: usize, at: impl Fn(usize, usize) -> usize) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for a in 0..rows {
        for b in a..rows {
            let g: Complex64 = (0..len).map(|c| m[at(a, c)] * m[at(b, c)].conj()).sum();
            if a == b {
                diag += g.norm_sqr();
            } else {
                off += g.norm_sqr();
            }
        }
    }
    diag + 2.0 * off
}

/// Maps every full basis index to its (kept, traced) pair of sub-indices,
/// each in row-major order over the parties in ascending number.
pub(crate) struct IndexSplit {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub kept_dim: usize,
    pub traced_dim: usize,
}

impl IndexSplit {
    pub fn new(dims: &[usize], keep: SubsystemSet) -> Self {
        let n = dims.len();
        let mut strides = vec![0usize; n];
        let (mut dk, mut dt) = (1usize, 1usize);
        for p in (0..n).rev() {
            if keep.contains(p + 1) {
                strides[p] = dk;
                dk *= dims[p];
            } else {
                strides[p] = dt;
                dt *= dims[p];
            }
        }
        let total = dk * dt;
        let mut rows = Vec::with_capacity(total);
        let mut cols = Vec::with_capacity(total);
        let mut digits = vec![0usize; n];
        let (mut r, mut c) = (0usize, 0usize);
        for _ in 0..total {
            rows.push(r);
            cols.push(c);
            for p in (0..n).rev() {
                let kept = keep.contains(p + 1);
                digits[p] += 1;
                if digits[p] < dims[p] {
                    if kept {
                        r += strides[p]
                    } else {
                        c += strides[p]
                    }
                    break;
                }
                let back = (dims[p] - 1) * strides[p];
                if kept {
                    r -= back
                } else {
                    c -= back
                }
                digits[p] = 0;
            }
        }
        IndexSplit {
            rows,
            cols,
            kept_dim: dk,
            traced_dim: dt,
        }
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix with party structure.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian within [`TAU_HERM`], unit trace
    /// within [`TAU_NORM`], eigenvalues ≥ −[`TAU_PSD`].
    pub fn new(dims: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let side = check_dims(&dims)?;
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::Invariant(format!(
                "matrix is {}x{}, dims {dims:?} need side {side}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("matrix has non-finite entries".into()));
        }
        let herm_err = (0..side)
            .flat_map(|i| (0..side).map(move |j| (i, j)))
            .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if herm_err > TAU_HERM {
            return Err(Error::Invariant(format!(
                "matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TAU_NORM {
            return Err(Error::Invariant(format!("trace is {trace}, expected 1")));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TAU_PSD {
            return Err(Error::Invariant(format!("matrix has eigenvalue {min_eig:e} < 0")));
        }
        Ok(DensityMatrix { dims, matrix })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, matrix: DMatrix<Complex64>) -> Self {
        DensityMatrix { dims, matrix }
    }

    /// The maximally mixed state on `dims`.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let side = check_dims(&dims)?;
        let matrix = DMatrix::from_diagonal_element(side, side, Complex64::new(1.0 / side as f64, 0.0));
        Ok(DensityMatrix { dims, matrix })
    }

    /// `Σ w_k ρ_k` for weights summing to one over matrices of equal dims.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let side = first.1.side();
        let mut acc = DMatrix::zeros(side, side);
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::Dimension("mixture components differ in dims".into()));
            }
            acc += rho.matrix.map(|z| z * *w);
        }
        DensityMatrix::new(dims, acc)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let d = psi.dim();
    let a = psi.amplitudes();
    let matrix = DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj());
    DensityMatrix::from_parts_unchecked(psi.dims.clone(), matrix)
}

/// Reduced density matrix on `keep`, tracing out every other party.
///
/// The kept parties retain their relative order. `keep` equal to every party
/// returns a copy of `rho`.
pub fn partial_trace(rho: &DensityMatrix, keep: SubsystemSet) -> Result<DensityMatrix> {
    let n = rho.n_parties();
    if keep.is_empty() {
        return Err(Error::NoPartiesKept);
    }
    if !keep.is_subset_of(SubsystemSet::full(n)) {
        return Err(Error::InvalidArgument(format!(
            "subsystem {keep:?} is not within {n} parties"
        )));
    }
    if keep == SubsystemSet::full(n) {
        return Ok(rho.clone());
    }
    let split = IndexSplit::new(&rho.dims, keep);
    let (dk, dt) = (split.kept_dim, split.traced_dim);
    let mut full_index = vec![0usize; dk * dt];
    for (i, (&r, &c)) in split.rows.iter().zip(&split.cols).enumerate() {
        full_index[r * dt + c] = i;
    }
    let out = DMatrix::from_fn(dk, dk, |r, s| {
        (0..dt)
            .map(|t| rho.matrix[(full_index[r * dt + t], full_index[s * dt + t])])
            .sum::<Complex64>()
    });
    let dims = keep.parties().map(|p| rho.dims[p - 1]).collect();
    Ok(DensityMatrix::from_parts_unchecked(dims, out))
}

/// Tr(ρ²), computed as the squared Frobenius norm (valid for Hermitian ρ).
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}
