//! Lower bounds on multipartite concurrence built from sub-partition concurrences.
//!
//! The combinators take sub-concurrence values as inputs. For pure states
//! those values are exact (see the `pure_*` helpers). For mixed states they
//! must be certified lower bounds supplied by the caller; values taken from
//! the convex-roof estimator are upper estimates and any bound built on them
//! is marked `heuristic`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinatorics::{proper_subsets, set_partitions, Partition};
use crate::concurrence::{bipartite_concurrence_pure, partition_concurrence_pure};
use crate::tensor::{PureState, SubsystemSet};
use crate::wclass::BalanceReport;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// The lower bound.
    pub value: f64,
    /// Which sub-partition or block size attained the maximum.
    pub witness: String,
    /// True unless the bound's hypotheses were verified for this input.
    pub conditional: bool,
    /// True when the inputs are estimates rather than certified values.
    pub heuristic: bool,
    pub inputs: Vec<NamedValue>,
}

fn check_value(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sub-concurrence {name} = {v} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// `max_block 2^{(3−N)/2} C_2(block)` over the supplied bipartite concurrences.
pub fn bound_eq5(n: usize, values: &BTreeMap<SubsystemSet, f64>) -> Result<BoundReport> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the bipartite bound needs N >= 3, got {n}"
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("no bipartite concurrences supplied".into()));
    }
    let coeff = 2f64.powf((3.0 - n as f64) / 2.0);
    let mut best: Option<(f64, SubsystemSet)> = None;
    let mut inputs = Vec::with_capacity(values.len());
    for (&block, &v) in values {
        if !block.is_proper(n) {
            return Err(Error::InvalidArgument(format!(
                "block {block:?} is not a proper subset of {n} parties"
            )));
        }
        let name = Partition::bipartition(n, block)?.to_string();
        check_value(&name, v)?;
        if best.is_none_or(|(b, _)| coeff * v > b) {
            best = Some((coeff * v, block));
        }
        inputs.push(NamedValue { name, value: v });
    }
    let (value, block) = best.expect("nonempty");
    Ok(BoundReport {
        value,
        witness: Partition::bipartition(n, block)?.to_string(),
        conditional: false,
        heuristic: false,
        inputs,
    })
}

/// `2^{(1−N)/2} √(2^{N−M} + 2^M − 2)`, the weight on a size-M bipartite concurrence.
pub fn eq6_coefficient(n: usize, m: usize) -> Result<f64> {
    if n < 3 || m < 1 || m >= n {
        return Err(Error::InvalidArgument(format!(
            "need N >= 3 and 1 <= M <= N-1, got N = {n}, M = {m}"
        )));
    }
    // One rounding inside the root keeps the special-case anchors exact.
    let radicand = (2f64.powi((n - m) as i32) + 2f64.powi(m as i32) - 2.0) / 2f64.powi(n as i32 - 1);
    Ok(radicand.sqrt())
}

/// `max_M eq6_coefficient(N, M) · C_2(ρ_M)` where `per_m[M]` is the largest
/// bipartite concurrence over blocks of size M.
pub fn bound_eq6(n: usize, per_m: &BTreeMap<usize, f64>) -> Result<BoundReport> {
    if per_m.is_empty() {
        return Err(Error::InvalidArgument("no per-size concurrences supplied".into()));
    }
    let mut best: Option<(f64, usize)> = None;
    let mut inputs = Vec::with_capacity(per_m.len());
    for (&m, &v) in per_m {
        let name = format!("M={m}");
        check_value(&name, v)?;
        let scaled = eq6_coefficient(n, m)? * v;
        if best.is_none_or(|(b, _)| scaled > b) {
            best = Some((scaled, m));
        }
        inputs.push(NamedValue { name, value: v });
    }
    let (value, m) = best.expect("nonempty");
    Ok(BoundReport {
        value,
        witness: format!("M={m}"),
        conditional: false,
        heuristic: false,
        inputs,
    })
}

/// Largest supplied value for each block size.
pub fn max_per_block_size(values: &BTreeMap<SubsystemSet, f64>) -> BTreeMap<usize, f64> {
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for (block, &v) in values {
        let slot = out.entry(block.len()).or_insert(v);
        *slot = slot.max(v);
    }
    out
}

/// Sum of the six squared tripartite concurrences of a four-party state,
/// keyed by the six 3-block partitions of `{1,2,3,4}`. No 1/6 prefactor.
pub fn tilde_c3_sq(values: &BTreeMap<Partition, f64>) -> Result<f64> {
    let expected = set_partitions(4, 3)?;
    if values.len() != expected.len() || expected.iter().any(|p| !values.contains_key(p)) {
        let got: Vec<String> = values.keys().map(|p| p.to_string()).collect();
        return Err(Error::InvalidArgument(format!(
            "expected the six 3-block partitions of 4 parties, got {got:?}"
        )));
    }
    let mut total = 0.0;
    for p in &expected {
        let v = values[p];
        check_value(&p.to_string(), v)?;
        total += v;
    }
    Ok(total)
}

/// `√(C̃_3² / 5)`, a lower bound on C_4 when every member of an optimal
/// decomposition satisfies the balance identity.
pub fn bound_theorem4(tilde_sq: f64) -> Result<f64> {
    if !tilde_sq.is_finite() || tilde_sq < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tilde sum {tilde_sq} must be finite and >= 0"
        )));
    }
    Ok((tilde_sq / 5.0).sqrt())
}

/// Wraps [`bound_theorem4`] into a report from the six partition values.
pub fn theorem4_report(values: &BTreeMap<Partition, f64>, conditional: bool, heuristic: bool) -> Result<BoundReport> {
    let tilde = tilde_c3_sq(values)?;
    let inputs = values
        .iter()
        .map(|(p, &v)| NamedValue {
            name: p.to_string(),
            value: v,
        })
        .collect();
    Ok(BoundReport {
        value: bound_theorem4(tilde)?,
        witness: "sum over the six 3-block partitions".into(),
        conditional,
        heuristic,
        inputs,
    })
}

/// Balance identity on an arbitrary four-party pure state, from partial traces.
pub fn condition_check_theorem4(psi: &PureState) -> Result<BalanceReport> {
    let n = psi.n_parties();
    if n != 4 {
        return Err(Error::InvalidArgument(format!(
            "the balance condition needs 4 parties, got {n}"
        )));
    }
    let entropy =
        |parties: &[usize]| -> Result<f64> { Ok(1.0 - psi.reduced_purity(SubsystemSet::from_parties(parties)?)?) };
    let mut lhs = 0.0;
    for i in 1..=4 {
        lhs += entropy(&[i])?;
    }
    let mut rhs = 0.0;
    for i in 2..=4 {
        rhs += entropy(&[1, i])?;
    }
    Ok(BalanceReport::new(lhs, rhs))
}

/// Exact bipartite concurrences of a pure state for every proper block.
pub fn pure_bipartite_values(psi: &PureState) -> Result<BTreeMap<SubsystemSet, f64>> {
    proper_subsets(psi.n_parties())?
        .into_iter()
        .map(|b| Ok((b, bipartite_concurrence_pure(psi, b)?)))
        .collect()
}

/// Exact squared tripartite concurrences of a four-party pure state.
pub fn pure_tripartite_sq(psi: &PureState) -> Result<BTreeMap<Partition, f64>> {
    if psi.n_parties() != 4 {
        return Err(Error::InvalidArgument(format!(
            "need 4 parties, got {}",
            psi.n_parties()
        )));
    }
    set_partitions(4, 3)?
        .into_iter()
        .map(|p| {
            let c = partition_concurrence_pure(psi, &p)?;
            Ok((p, c * c))
        })
        .collect()
}

/// Tripartite-sum bound for a pure four-party state; unconditional only when the
/// balance identity holds.
pub fn theorem4_pure(psi: &PureState) -> Result<(BoundReport, BalanceReport)> {
    let condition = condition_check_theorem4(psi)?;
    let report = theorem4_report(&pure_tripartite_sq(psi)?, !condition.holds, false)?;
    Ok((report, condition))
}
