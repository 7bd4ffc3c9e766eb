//! Heuristic upper estimates of convex-roof concurrences.
//!
//! Every pure-state decomposition `{p_k, ψ_k}` of a density matrix with
//! eigen-ensemble `{λ_j, e_j}` has the form `√p_k ψ_k = Σ_j U_kj √λ_j e_j`
//! for an isometry `U` with orthonormal columns. The estimator searches over
//! such isometries: random restarts followed by local refinement with random
//! two-member rotations, accepting only improvements. The average of the
//! pure-state functional over any decomposition is an upper bound on the
//! roof, so the result is an upper estimate and never a certified value.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::combinatorics::Partition;
use crate::concurrence::{bipartite_concurrence_pure, concurrence_pure, partition_concurrence_pure};
use crate::io::StateFile;
use crate::sampling::{random_isometry, stream_rng};
use crate::tensor::{DensityMatrix, PureState, SubsystemSet, TAU_NORM, TAU_PSD};
use crate::{Error, Result};

/// Largest Frobenius distance between `ρ` and a reconstructed decomposition.
pub const TAU_RECON: f64 = 1e-9;

/// Members lighter than this are dropped from a mixed decomposition.
const MIN_WEIGHT: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub weight: f64,
    pub state: PureState,
}

/// A weighted ensemble of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    members: Vec<Member>,
}

impl Decomposition {
    /// Validating constructor: positive weights summing to one, equal dims.
    pub fn new(members: Vec<Member>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Invariant("empty decomposition".into()))?;
        if members.iter().any(|m| m.state.dims() != first.state.dims()) {
            return Err(Error::Dimension("decomposition members differ in dims".into()));
        }
        if members.iter().any(|m| m.weight.is_nan() || m.weight <= 0.0) {
            return Err(Error::Invariant("decomposition weights must be positive".into()));
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::Invariant(format!("decomposition weights sum to {total}")));
        }
        Ok(Decomposition { members })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        self.members[0].state.dims()
    }

    /// `Σ p_k |ψ_k⟩⟨ψ_k|`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = self.members[0].state.dim();
        let mut out = DMatrix::zeros(d, d);
        for m in &self.members {
            let a = m.state.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += a[i] * a[j].conj() * m.weight;
                }
            }
        }
        out
    }

    /// Frobenius distance between the reconstruction and `rho`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        (self.reconstruct() - rho.matrix()).norm()
    }

    /// `Σ p_k f(ψ_k)`.
    pub fn average<F>(&self, functional: F) -> Result<f64>
    where
        F: Fn(&PureState) -> Result<f64>,
    {
        self.members.iter().map(|m| Ok(m.weight * functional(&m.state)?)).sum()
    }

    /// Columns `√p_j ψ_j`.
    fn scaled_vectors(&self) -> Vec<Vec<Complex64>> {
        self.members
            .iter()
            .map(|m| m.state.amplitudes().iter().map(|a| a * m.weight.sqrt()).collect())
            .collect()
    }

    fn from_scaled(dims: &[usize], vectors: &[Vec<Complex64>]) -> Result<Self> {
        let mut members = Vec::with_capacity(vectors.len());
        for v in vectors {
            let weight: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if weight < MIN_WEIGHT {
                continue;
            }
            members.push(Member {
                weight,
                state: PureState::from_unnormalized(dims.to_vec(), v.clone())?,
            });
        }
        if members.is_empty() {
            return Err(Error::Numerical("every decomposition member vanished".into()));
        }
        Ok(Decomposition { members })
    }
}

#[derive(Serialize)]
struct MemberView {
    weight: f64,
    state: StateFile,
}

impl Serialize for Decomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let view: Vec<MemberView> = self
            .members
            .iter()
            .map(|m| MemberView {
                weight: m.weight,
                state: StateFile::from_pure(&m.state),
            })
            .collect();
        view.serialize(s)
    }
}

/// Search parameters for [`roof_upper_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Ensemble size; `None` picks `2·rank` capped at `rank²`.
    pub m: Option<usize>,
    pub restarts: usize,
    pub refine_steps: usize,
    /// Initial rotation angle scale; decays geometrically to 1% over the refinement.
    pub step_scale: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            m: None,
            restarts: 64,
            refine_steps: 500,
            step_scale: 0.5,
            seed: 7,
        }
    }
}

impl EstimatorConfig {
    pub fn ensemble_size(&self, rank: usize) -> Result<usize> {
        let m = self.m.unwrap_or((2 * rank).min(rank * rank));
        if m < rank {
            return Err(Error::InvalidArgument(format!(
                "ensemble size {m} is below the rank {rank}"
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.step_scale.is_finite() && self.step_scale >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step_scale {} is invalid",
                self.step_scale
            )));
        }
        Ok(m)
    }
}

/// Eigen-ensemble of `rho`; eigenvalues below [`TAU_PSD`] are dropped.
pub fn spectral_decompose(rho: &DensityMatrix) -> Result<Decomposition> {
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut members = Vec::new();
    for k in order {
        let lambda = eig.eigenvalues[k];
        if lambda < -TAU_PSD {
            return Err(Error::Numerical(format!("density matrix has eigenvalue {lambda:e}")));
        }
        if lambda < TAU_PSD {
            continue;
        }
        let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().cloned().collect();
        members.push(Member {
            weight: lambda,
            state: PureState::from_unnormalized(rho.dims().to_vec(), v)?,
        });
    }
    if members.is_empty() {
        return Err(Error::Numerical(
            "density matrix has no eigenvalue above tolerance".into(),
        ));
    }
    Ok(Decomposition { members })
}

fn check_isometry(mixer: &DMatrix<Complex64>) -> Result<()> {
    let r = mixer.ncols();
    let gram = mixer.adjoint() * mixer;
    let dev = (gram - DMatrix::<Complex64>::identity(r, r))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "mixer columns are not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(())
}

fn apply_mixer(vectors: &[Vec<Complex64>], mixer: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    let d = vectors[0].len();
    (0..mixer.nrows())
        .map(|k| {
            let mut out = vec![Complex64::new(0.0, 0.0); d];
            for (j, v) in vectors.iter().enumerate() {
                let u = mixer[(k, j)];
                if u != Complex64::new(0.0, 0.0) {
                    out.iter_mut().zip(v).for_each(|(o, x)| *o += u * x);
                }
            }
            out
        })
        .collect()
}

/// Steers `base` (size `r`) into a new decomposition through an `m × r`
/// isometry. Members with weight below 1e−14 are dropped.
pub fn mix_decomposition(base: &Decomposition, mixer: &DMatrix<Complex64>) -> Result<Decomposition> {
    if mixer.ncols() != base.len() || mixer.nrows() < mixer.ncols() {
        return Err(Error::Dimension(format!(
            "mixer is {}x{} for a base of size {}",
            mixer.nrows(),
            mixer.ncols(),
            base.len()
        )));
    }
    check_isometry(mixer)?;
    Decomposition::from_scaled(base.dims(), &apply_mixer(&base.scaled_vectors(), mixer))
}

/// Pure-state functional whose convex roof is estimated.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// N-partite concurrence.
    Full,
    /// Concurrence across `block | complement`.
    Bipartite(SubsystemSet),
    /// Concurrence of the coarse-grained state.
    Partition(Partition),
}

impl Functional {
    pub fn evaluate(&self, psi: &PureState) -> Result<f64> {
        match self {
            Functional::Full => concurrence_pure(psi),
            Functional::Bipartite(block) => bipartite_concurrence_pure(psi, *block),
            Functional::Partition(p) => partition_concurrence_pure(psi, p),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoofReport {
    /// Smallest ensemble average found; an upper estimate of the roof.
    pub value: f64,
    pub label: &'static str,
    pub decomposition: Decomposition,
}

fn member_value<F>(dims: &[usize], v: &[Complex64], functional: &F) -> Result<f64>
where
    F: Fn(&PureState) -> Result<f64>,
{
    let weight: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    if weight < MIN_WEIGHT {
        return Ok(0.0);
    }
    Ok(weight * functional(&PureState::from_unnormalized(dims.to_vec(), v.to_vec())?)?)
}

/// One restart: start from an isometry, then rotate random member pairs.
fn run_restart<F>(
    dims: &[usize],
    base: &[Vec<Complex64>],
    m: usize,
    restart: usize,
    cfg: &EstimatorConfig,
    functional: &F,
) -> Result<(f64, Vec<Vec<Complex64>>)>
where
    F: Fn(&PureState) -> Result<f64>,
{
    let r = base.len();
    let mut rng = stream_rng(cfg.seed, restart as u64);
    let start = if restart == 0 {
        DMatrix::from_fn(m, r, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    } else {
        random_isometry(&mut rng, m, r)
    };
    let mut vectors = apply_mixer(base, &start);
    let mut values = vectors
        .iter()
        .map(|v| member_value(dims, v, functional))
        .collect::<Result<Vec<f64>>>()?;
    if m >= 2 {
        for step in 0..cfg.refine_steps {
            let scale = cfg.step_scale * 0.01f64.powf(step as f64 / cfg.refine_steps as f64);
            let k = rng.random_range(0..m);
            let l = (k + rng.random_range(1..m)) % m;
            let theta: f64 = scale * rng.sample::<f64, _>(StandardNormal);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (c, s) = (theta.cos(), theta.sin());
            let z = Complex64::from_polar(s, phi);
            let new_k: Vec<Complex64> = vectors[k]
                .iter()
                .zip(&vectors[l])
                .map(|(a, b)| a * c - z.conj() * b)
                .collect();
            let new_l: Vec<Complex64> = vectors[k].iter().zip(&vectors[l]).map(|(a, b)| z * a + b * c).collect();
            let vk = member_value(dims, &new_k, functional)?;
            let vl = member_value(dims, &new_l, functional)?;
            if vk + vl < values[k] + values[l] {
                vectors[k] = new_k;
                vectors[l] = new_l;
                values[k] = vk;
                values[l] = vl;
            }
        }
    }
    Ok((values.iter().sum(), vectors))
}

/// Upper estimate of the convex roof of `functional` at `rho`.
///
/// The eigen-ensemble is evaluated first; restart `t` draws from stream `t`
/// of `cfg.seed`, so the result is reproducible and never increases when
/// `restarts` grows.
pub fn roof_upper_bound<F>(rho: &DensityMatrix, functional: &F, cfg: &EstimatorConfig) -> Result<RoofReport>
where
    F: Fn(&PureState) -> Result<f64> + Sync,
{
    let base = spectral_decompose(rho)?;
    let m = cfg.ensemble_size(base.len())?;
    let dims = base.dims().to_vec();
    let scaled = base.scaled_vectors();

    let mut best_value = base.average(functional)?;
    let mut best = base;

    let runs: Vec<Result<(f64, Vec<Vec<Complex64>>)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|t| run_restart(&dims, &scaled, m, t, cfg, functional))
        .collect();
    let mut best_run: Option<(f64, Vec<Vec<Complex64>>)> = None;
    for run in runs {
        let (value, vectors) = run?;
        if best_run.as_ref().is_none_or(|(v, _)| value < *v) {
            best_run = Some((value, vectors));
        }
    }
    if let Some((value, vectors)) = best_run {
        if value < best_value {
            best_value = value;
            best = Decomposition::from_scaled(&dims, &vectors)?;
        }
    }
    Ok(RoofReport {
        value: best_value,
        label: "upper estimate",
        decomposition: best,
    })
}

/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λ_i` the decreasing square roots of the
/// eigenvalues of `ρ (Y⊗Y) ρ* (Y⊗Y)`.
///
/// Evaluated through the Hermitian matrix `√ρ ρ̃ √ρ`, which has the same spectrum.
pub fn wootters_concurrence_2qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "Wootters formula needs dims [2, 2], got {:?}",
            rho.dims()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let yy = DMatrix::from_row_slice(
        4,
        4,
        &[
            zero,
            zero,
            zero,
            Complex64::new(-1.0, 0.0),
            zero,
            zero,
            Complex64::new(1.0, 0.0),
            zero,
            zero,
            Complex64::new(1.0, 0.0),
            zero,
            zero,
            Complex64::new(-1.0, 0.0),
            zero,
            zero,
            zero,
        ],
    );
    let m = rho.matrix();
    let flipped = &yy * m.map(|z| z.conj()) * &yy;
    let eig = m.clone().symmetric_eigen();
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)));
    let sqrt_rho = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    let r = &sqrt_rho * flipped * &sqrt_rho;
    let r = (&r + r.adjoint()).map(|z| z * 0.5);
    let mut lambdas: Vec<f64> = r.symmetric_eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
