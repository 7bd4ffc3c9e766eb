//! N-qubit W-class states `a_1|10…0⟩ + a_2|01…0⟩ + … + a_N|00…1⟩` and their
//! closed-form concurrences.
//!
//! Every closed form depends on the weights `|a_i|²` only, so complex phases
//! are accepted and ignored.

use num_complex::Complex64;
use serde::Serialize;

use crate::combinatorics::pair_singleton_partitions;
use crate::tensor::{PureState, SubsystemSet, TAU_NORM};
use crate::{Error, Result};

/// Slack for the four-qubit balance identity.
pub const TAU_COND: f64 = 1e-8;

/// Coefficients of an N-qubit W-class state, `N ≥ 2`, `Σ|a_i|² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WCoefficients {
    coeffs: Vec<Complex64>,
}

impl WCoefficients {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Invariant(format!(
                "a W-class state needs at least 2 qubits, got {}",
                coeffs.len()
            )));
        }
        let norm_sq: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > TAU_NORM {
            return Err(Error::Invariant(format!(
                "coefficient norm squared is {norm_sq}, expected 1"
            )));
        }
        Ok(WCoefficients { coeffs })
    }

    /// Real coefficients, convenience for tests and fixtures.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Equal weights `1/√N`.
    pub fn uniform(n: usize) -> Self {
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        WCoefficients { coeffs: vec![a; n] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// `|a_i|²` for each qubit.
    pub fn weights(&self) -> Vec<f64> {
        self.coeffs.iter().map(|a| a.norm_sqr()).collect()
    }

    /// The state vector, `a_i` placed on the basis ket with a single 1 in slot `i`.
    pub fn to_state(&self) -> PureState {
        w_to_state(self)
    }

    /// Same coefficients with parties reordered: entry `k` becomes `a[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        Ok(WCoefficients {
            coeffs: perm.iter().map(|&p| self.coeffs[p]).collect(),
        })
    }
}

pub fn w_to_state(a: &WCoefficients) -> PureState {
    let n = a.n();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        // Qubit i + 1 excited: bit (n − 1 − i) set, party 1 most significant.
        amps[1 << (n - 1 - i)] = ai;
    }
    PureState::new(vec![2; n], amps).expect("validated W coefficients give a normalized state")
}

fn pair_products(w: &[f64], skip: Option<(usize, usize)>) -> f64 {
    let mut total = 0.0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if skip != Some((i, j)) {
                total += w[i] * w[j];
            }
        }
    }
    total
}

/// `1 − Tr ρ_s² = 2 (Σ_{i∈s} |a_i|²)(Σ_{j∉s} |a_j|²)`.
pub fn w_reduced_linear_entropy(a: &WCoefficients, s: SubsystemSet) -> Result<f64> {
    let n = a.n();
    if s.is_empty() || !s.is_subset_of(SubsystemSet::full(n)) {
        return Err(Error::InvalidArgument(format!(
            "subsystem {s:?} is not a nonempty subset of 1..={n}"
        )));
    }
    let (inside, outside) =
        a.weights().iter().enumerate().fold(
            (0.0, 0.0),
            |(i, o), (k, w)| if s.contains(k + 1) { (i + w, o) } else { (i, o + w) },
        );
    Ok(2.0 * inside * outside)
}

/// Squared N-partite concurrence: `4 Σ_{i<j} |a_i|²|a_j|²`.
pub fn w_concurrence_sq(a: &WCoefficients) -> f64 {
    4.0 * pair_products(&a.weights(), None)
}

/// Squared (N−1)-partite concurrence under the partition with pair block
/// `{i, j}` (1-based, either order) and singletons elsewhere:
/// `4 Σ_{k<l, (k,l) ≠ (i,j)} |a_k|²|a_l|²`.
pub fn w_pair_partition_concurrence_sq(a: &WCoefficients, i: usize, j: usize) -> Result<f64> {
    let n = a.n();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("pair partitions need N >= 3, got {n}")));
    }
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!("invalid pair ({i}, {j}) for N = {n}")));
    }
    let (lo, hi) = (i.min(j), i.max(j));
    Ok(4.0 * pair_products(&a.weights(), Some((lo - 1, hi - 1))))
}

/// Sum of the squared (N−1)-partite concurrences over all C(N,2) pair partitions.
pub fn w_tilde_sum_sq(a: &WCoefficients) -> Result<f64> {
    let n = a.n();
    let mut total = 0.0;
    for p in pair_singleton_partitions(n)? {
        let pair: Vec<usize> = p
            .blocks()
            .iter()
            .find(|b| b.len() == 2)
            .expect("one pair block")
            .parties()
            .collect();
        total += w_pair_partition_concurrence_sq(a, pair[0], pair[1])?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Compares `C_N²` with `C̃²_{N−1} / (C(N,2) − 1)`.
pub fn verify_theorem3(a: &WCoefficients) -> Result<IdentityReport> {
    let n = a.n();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("the relation needs N >= 3, got {n}")));
    }
    let lhs = w_concurrence_sq(a);
    let pairs = (n * (n - 1) / 2) as f64;
    let rhs = w_tilde_sum_sq(a)? / (pairs - 1.0);
    Ok(IdentityReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BalanceReport {
    pub(crate) fn new(lhs: f64, rhs: f64) -> Self {
        BalanceReport {
            lhs,
            rhs,
            holds: (lhs - rhs).abs() < TAU_COND,
        }
    }
}

/// Four-qubit balance identity `Σ_{i=1}^4 (1 − Tr ρ_i²) = Σ_{i=2}^4 (1 − Tr ρ_{1i}²)`
/// from the linear-entropy closed form.
pub fn w_balance_identity(a: &WCoefficients) -> Result<BalanceReport> {
    if a.n() != 4 {
        return Err(Error::InvalidArgument(format!(
            "the balance identity needs N = 4, got {}",
            a.n()
        )));
    }
    let lhs = (1..=4)
        .map(|i| w_reduced_linear_entropy(a, SubsystemSet::from_parties(&[i])?))
        .sum::<Result<f64>>()?;
    let rhs = (2..=4)
        .map(|i| w_reduced_linear_entropy(a, SubsystemSet::from_parties(&[1, i])?))
        .sum::<Result<f64>>()?;
    Ok(BalanceReport::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Partition;
    use crate::concurrence::{concurrence_pure, partition_concurrence_pure};

    #[test]
    fn state_placement() {
        let psi = WCoefficients::from_real(&[1.0, 0.0]).unwrap().to_state();
        assert_eq!(psi, PureState::basis(vec![2, 2], &[1, 0]).unwrap());
        let psi = WCoefficients::uniform(3).to_state();
        let r = 1.0 / 3f64.sqrt();
        for (idx, amp) in psi.amplitudes().iter().enumerate() {
            let expected = if [4, 2, 1].contains(&idx) { r } else { 0.0 };
            assert!((amp.re - expected).abs() < 1e-15 && amp.im == 0.0);
        }
    }

    #[test]
    fn linear_entropy_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = WCoefficients::from_real(&[h, h, 0.0]).unwrap();
        let v = w_reduced_linear_entropy(&a, SubsystemSet::from_parties(&[1]).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(w_reduced_linear_entropy(&a, SubsystemSet::full(3)).unwrap(), 0.0);
        assert!(w_reduced_linear_entropy(&a, SubsystemSet::EMPTY).is_err());
    }

    #[test]
    fn concurrence_closed_form_examples() {
        let a = WCoefficients::from_real(&[0.6, 0.8]).unwrap();
        assert!((w_concurrence_sq(&a) - 4.0 * 0.36 * 0.64).abs() < 1e-15);
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        assert_eq!(w_concurrence_sq(&WCoefficients::from_real(&e1).unwrap()), 0.0);
        assert!((w_concurrence_sq(&WCoefficients::uniform(4)) - 1.5).abs() < 1e-15);
        let brute = concurrence_pure(&WCoefficients::uniform(4).to_state()).unwrap();
        assert!((brute * brute - 1.5).abs() < 1e-13);
    }

    #[test]
    fn pair_partition_examples() {
        let w4 = WCoefficients::uniform(4);
        let v = w_pair_partition_concurrence_sq(&w4, 1, 2).unwrap();
        assert!((v - 1.25).abs() < 1e-15);
        let oracle = partition_concurrence_pure(&w4.to_state(), &Partition::parse("12|3|4", 4).unwrap()).unwrap();
        assert!((oracle * oracle - 1.25).abs() < 1e-13);

        let a = WCoefficients::from_real(&[0.0, 0.6, 0.8, 0.0]).unwrap();
        assert!((w_pair_partition_concurrence_sq(&a, 1, 4).unwrap() - w_concurrence_sq(&a)).abs() < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = WCoefficients::from_real(&[h, h, 0.0]).unwrap();
        assert!(w_pair_partition_concurrence_sq(&a, 1, 2).unwrap().abs() < 1e-15);
        let oracle = partition_concurrence_pure(&a.to_state(), &Partition::parse("12|3", 3).unwrap()).unwrap();
        assert!(oracle.abs() < 1e-7);

        assert!(w_pair_partition_concurrence_sq(&a, 2, 2).is_err());
        assert!(w_pair_partition_concurrence_sq(&a, 1, 4).is_err());
        assert!(w_pair_partition_concurrence_sq(&WCoefficients::uniform(2), 1, 2).is_err());
    }

    #[test]
    fn tilde_and_relation_at_equal_weights() {
        let w4 = WCoefficients::uniform(4);
        assert!((w_tilde_sum_sq(&w4).unwrap() - 7.5).abs() < 1e-14);
        let r = verify_theorem3(&w4).unwrap();
        assert!((r.lhs - 1.5).abs() < 1e-15);
        assert!((r.rhs - 1.5).abs() < 1e-14);
        assert!(r.residual < 1e-12);
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        assert_eq!(w_tilde_sum_sq(&WCoefficients::from_real(&e1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn complex_phases_do_not_matter() {
        let a = WCoefficients::new(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let real = WCoefficients::from_real(&[0.6, 0.8, 0.0, 0.0]).unwrap();
        assert_eq!(w_concurrence_sq(&a), w_concurrence_sq(&real));
        assert!(verify_theorem3(&a).unwrap().residual < 1e-12);
    }

    #[test]
    fn balance_identity_equal_weights() {
        let r = w_balance_identity(&WCoefficients::uniform(4)).unwrap();
        assert!((r.lhs - 1.5).abs() < 1e-15);
        assert!((r.rhs - 1.5).abs() < 1e-15);
        assert!(r.holds);
        assert!(w_balance_identity(&WCoefficients::uniform(3)).is_err());
    }

    #[test]
    fn rejects_invalid_coefficients() {
        assert!(WCoefficients::from_real(&[1.0]).is_err());
        assert!(WCoefficients::from_real(&[1.0, 1.0]).is_err());
        assert!(WCoefficients::uniform(3).permuted(&[0, 0, 1]).is_err());
    }
}
