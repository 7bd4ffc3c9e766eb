//! Pure-state concurrences: N-partite, bipartite-block, and partition.
//!
//! All three share one engine. The partition concurrence merges the parties of
//! each block into a single party and then evaluates the N-partite formula at
//! `M` parties, so the M-partite and N-partite functionals can never drift apart.

use crate::combinatorics::{proper_subsets, Partition};
use crate::tensor::{PureState, SubsystemSet};
use crate::{Error, Result};

/// Radicands down to this value are clamped to zero; below it is an error.
pub const RADICAND_FLOOR: f64 = -1e-10;

/// How the sum of reduced purities over proper subsystems is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PurityMode {
    /// Subsets of size < N/2 counted twice; at even N the middle layer
    /// contributes only the subsets containing party 1, also twice.
    /// Relies on a pure state's complementary reductions sharing purity.
    #[default]
    Fast,
    /// Every proper subset evaluated independently.
    Oracle,
}

/// Sum in a fixed pairwise tree so results do not depend on evaluation order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Σ_α (1 − Tr ρ_α²) over every nonempty proper subsystem α.
pub fn linear_entropy_sum(psi: &PureState, mode: PurityMode) -> Result<f64> {
    let n = psi.n_parties();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "concurrence needs at least 2 parties, got {n}"
        )));
    }
    let mut terms = Vec::new();
    for alpha in proper_subsets(n)? {
        let weight = match mode {
            PurityMode::Oracle => 1.0,
            PurityMode::Fast => {
                let k = alpha.len();
                if 2 * k < n || (2 * k == n && alpha.contains(1)) {
                    2.0
                } else {
                    continue;
                }
            }
        };
        terms.push(weight * (1.0 - psi.reduced_purity(alpha)?));
    }
    Ok(pairwise_sum(&terms))
}

fn checked_root(radicand: f64) -> Result<f64> {
    if radicand.is_nan() || radicand < RADICAND_FLOOR {
        return Err(Error::Numerical(format!("negative radicand {radicand:e}")));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// C_N(ψ) = 2^{1−N/2} √((2^N − 2) − Σ_α Tr ρ_α²).
pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    concurrence_pure_with(psi, PurityMode::Fast)
}

pub fn concurrence_pure_with(psi: &PureState, mode: PurityMode) -> Result<f64> {
    let n = psi.n_parties();
    let total = linear_entropy_sum(psi, mode)?;
    Ok(2f64.powf(1.0 - n as f64 / 2.0) * checked_root(total)?)
}

/// Concurrence across the cut `block | complement`: √(2(1 − Tr ρ_block²)).
pub fn bipartite_concurrence_pure(psi: &PureState, block: SubsystemSet) -> Result<f64> {
    let n = psi.n_parties();
    if !block.is_proper(n) {
        return Err(Error::InvalidArgument(format!(
            "block {block:?} is not a nonempty proper subset of {n} parties"
        )));
    }
    checked_root(2.0 * (1.0 - psi.reduced_purity(block)?))
}

/// Merges the parties of each block into one party.
///
/// Block `b` becomes party `b + 1` with dimension equal to the product of its
/// members' dimensions; within a block, lower-numbered parties are more
/// significant. Only the amplitude order changes.
pub fn coarse_grain(psi: &PureState, p: &Partition) -> Result<PureState> {
    let dims = psi.dims();
    let n = dims.len();
    if p.n() != n {
        return Err(Error::Dimension(format!(
            "partition covers {} parties but the state has {n}",
            p.n()
        )));
    }
    let block_dims: Vec<usize> = p
        .blocks()
        .iter()
        .map(|b| b.parties().map(|q| dims[q - 1]).product())
        .collect();
    let mut new_stride = vec![0usize; n];
    let mut block_stride = 1usize;
    for (b, block) in p.blocks().iter().enumerate().rev() {
        let mut inner = block_stride;
        let parties: Vec<usize> = block.parties().collect();
        for &q in parties.iter().rev() {
            new_stride[q - 1] = inner;
            inner *= dims[q - 1];
        }
        block_stride *= block_dims[b];
    }
    let amps = psi.amplitudes();
    let mut out = vec![Default::default(); amps.len()];
    for (i, a) in amps.iter().enumerate() {
        let mut rest = i;
        let mut target = 0usize;
        for q in (0..n).rev() {
            target += (rest % dims[q]) * new_stride[q];
            rest /= dims[q];
        }
        out[target] = *a;
    }
    PureState::new(block_dims, out)
}

/// Concurrence of the M-partite state obtained by merging each block of `p`.
pub fn partition_concurrence_pure(psi: &PureState, p: &Partition) -> Result<f64> {
    partition_concurrence_pure_with(psi, p, PurityMode::Fast)
}

pub fn partition_concurrence_pure_with(psi: &PureState, p: &Partition, mode: PurityMode) -> Result<f64> {
    concurrence_pure_with(&coarse_grain(psi, p)?, mode)
}
