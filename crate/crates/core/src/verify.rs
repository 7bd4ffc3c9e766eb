//! Self-verification harness: every closed form checked against brute-force
//! partial traces on random inputs.
//!
//! Each check draws its inputs from an independent generator stream keyed by
//! (check, N, sample index), so reports are identical across runs and thread
//! counts for a given seed.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    bound_eq5, bound_eq6, condition_check_theorem4, eq6_coefficient, max_per_block_size, pure_bipartite_values,
    pure_tripartite_sq, tilde_c3_sq,
};
use crate::combinatorics::{binomial, half_binomial_sum, pair_singleton_partitions};
use crate::concurrence::{concurrence_pure, concurrence_pure_with, partition_concurrence_pure, PurityMode};
use crate::io::StateFile;
use crate::sampling::{random_pure_state, random_w_coefficients, stream_rng};
use crate::tensor::{density_from_pure, partial_trace, purity, PureState, SubsystemSet};
use crate::wclass::{
    verify_theorem3, w_balance_identity, w_concurrence_sq, w_pair_partition_concurrence_sq, w_reduced_linear_entropy,
    WCoefficients,
};
use crate::{Error, Result};

/// Largest N used by the state-based suites regardless of `--n-max`.
pub const STATE_SUITE_N_CAP: usize = 12;

/// Failing cases kept per check.
const MAX_FAILURES_PER_CHECK: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Lemmas,
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Bounds,
    All,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemmas" => Scope::Lemmas,
            "thm1" => Scope::Thm1,
            "thm2" => Scope::Thm2,
            "thm3" => Scope::Thm3,
            "thm4" => Scope::Thm4,
            "bounds" => Scope::Bounds,
            "all" => Scope::All,
            other => return Err(Error::Parse(format!("unknown scope {other:?}"))),
        })
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub scope: Scope,
    /// Overrides every suite's default largest N.
    pub n_max: Option<usize>,
    /// Overrides every suite's default sample count.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl VerifyOptions {
    pub fn new(scope: Scope, seed: u64) -> Self {
        VerifyOptions {
            scope,
            n_max: None,
            samples: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub cases: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureCase {
    pub check: String,
    pub n: usize,
    pub sample: usize,
    pub residual: f64,
    /// Enough to replay the case.
    pub input: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scope: Scope,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub failures: Vec<FailureCase>,
}

/// One evaluated case: residual plus a replayable input.
struct Case {
    n: usize,
    sample: usize,
    residual: f64,
    input: serde_json::Value,
}

#[derive(Default)]
struct Collector {
    checks: Vec<Check>,
    failures: Vec<FailureCase>,
}

impl Collector {
    fn record(&mut self, name: &str, tolerance: f64, cases: Vec<Case>) {
        let mut max_residual: f64 = 0.0;
        let mut failed = 0;
        for case in &cases {
            let bad = case.residual.is_nan() || case.residual >= tolerance;
            if case.residual.is_nan() {
                max_residual = f64::NAN;
            } else if !max_residual.is_nan() {
                max_residual = max_residual.max(case.residual);
            }
            if bad {
                failed += 1;
                if failed <= MAX_FAILURES_PER_CHECK {
                    self.failures.push(FailureCase {
                        check: name.to_string(),
                        n: case.n,
                        sample: case.sample,
                        residual: case.residual,
                        input: case.input.clone(),
                    });
                }
            }
        }
        self.checks.push(Check {
            name: name.to_string(),
            tolerance,
            max_residual,
            cases: cases.len(),
            passed: failed == 0,
        });
    }
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("serializable")
}

/// Stream id for (suite, N, sample); suites use disjoint high bits.
fn stream(suite: u64, n: usize, sample: usize) -> u64 {
    (suite << 48) | ((n as u64) << 32) | sample as u64
}

/// Runs `f` for every (N, sample) in parallel and returns cases in order.
fn sweep<F>(ns: impl IntoIterator<Item = usize>, samples: usize, f: F) -> Result<Vec<Case>>
where
    F: Fn(usize, usize) -> Result<Vec<Case>> + Sync,
{
    let jobs: Vec<(usize, usize)> = ns.into_iter().flat_map(|n| (0..samples).map(move |s| (n, s))).collect();
    let nested: Vec<Result<Vec<Case>>> = jobs.par_iter().map(|&(n, s)| f(n, s)).collect();
    let mut out = Vec::new();
    for cases in nested {
        out.extend(cases?);
    }
    Ok(out)
}

/// Runs the requested suites.
pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut col = Collector::default();
    let want = |s: Scope| opts.scope == s || opts.scope == Scope::All;
    let state_n = |default: usize| opts.n_max.unwrap_or(default).min(STATE_SUITE_N_CAP);
    let samples = |default: usize| opts.samples.unwrap_or(default);

    if want(Scope::Lemmas) {
        binomial_suite(&mut col, opts.n_max.unwrap_or(64))?;
    }
    if want(Scope::Thm1) {
        w_concurrence_suite(&mut col, opts.seed, state_n(10), samples(100))?;
    }
    if want(Scope::Thm2) {
        pair_partition_suite(&mut col, opts.seed, state_n(8), samples(50))?;
    }
    if want(Scope::Thm3) {
        relation_suite(&mut col, opts.seed, state_n(10), samples(100))?;
    }
    if want(Scope::Thm4) {
        four_party_suite(&mut col, opts.seed, samples(100))?;
    }
    if want(Scope::Bounds) {
        bounds_suite(&mut col, opts.seed, samples(100))?;
    }
    let passed = col.checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        scope: opts.scope,
        seed: opts.seed,
        passed,
        checks: col.checks,
        failures: col.failures,
    })
}

fn binomial_suite(col: &mut Collector, n_max: usize) -> Result<()> {
    let mut identity = Vec::new();
    let mut symmetry = Vec::new();
    for n in 1..=n_max as u64 {
        let lhs = half_binomial_sum(n)?;
        let rhs = BigUint::from(1u32) << n;
        identity.push(Case {
            n: n as usize,
            sample: 0,
            residual: if lhs == rhs { 0.0 } else { 1.0 },
            input: json(&serde_json::json!({ "n": n, "lhs": lhs.to_string(), "rhs": rhs.to_string() })),
        });
        let symmetric = (0..=n as i64).all(|k| binomial(n, k) == binomial(n, n as i64 - k));
        symmetry.push(Case {
            n: n as usize,
            sample: 0,
            residual: if symmetric { 0.0 } else { 1.0 },
            input: json(&serde_json::json!({ "n": n })),
        });
    }
    // Exact integer comparisons: any nonzero residual is a failure.
    col.record("lemmas_half_binomial_sum", 0.5, identity);
    col.record("lemmas_binomial_symmetry", 0.5, symmetry);
    Ok(())
}

fn w_case(n: usize, sample: usize, residual: f64, a: &WCoefficients) -> Case {
    Case {
        n,
        sample,
        residual,
        input: json(&StateFile::from_w(a)),
    }
}

fn w_concurrence_suite(col: &mut Collector, seed: u64, n_max: usize, samples: usize) -> Result<()> {
    let fast = sweep(2..=n_max, samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(1, n, s)), n);
        let c = concurrence_pure(&a.to_state())?;
        Ok(vec![w_case(n, s, (w_concurrence_sq(&a) - c * c).abs(), &a)])
    })?;
    col.record("thm1_closed_form_vs_subset_purities", 1e-10, fast);

    let oracle = sweep(2..=n_max, samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(1, n, s)), n);
        let c = concurrence_pure_with(&a.to_state(), PurityMode::Oracle)?;
        Ok(vec![w_case(n, s, (w_concurrence_sq(&a) - c * c).abs(), &a)])
    })?;
    col.record("thm1_closed_form_vs_all_subsets_oracle", 1e-10, oracle);

    let eq10 = sweep(2..=n_max.min(8), samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(2, n, s)), n);
        let rho = density_from_pure(&a.to_state());
        let mut worst: f64 = 0.0;
        for mask in 1..(1u64 << n) {
            let set = SubsystemSet::from_mask(mask);
            let closed = w_reduced_linear_entropy(&a, set)?;
            let traced = 1.0 - purity(&partial_trace(&rho, set)?);
            worst = worst.max((closed - traced).abs());
        }
        Ok(vec![w_case(n, s, worst, &a)])
    })?;
    col.record("thm1_linear_entropy_vs_partial_trace", 1e-12, eq10);
    Ok(())
}

fn pair_partition_suite(col: &mut Collector, seed: u64, n_max: usize, samples: usize) -> Result<()> {
    let cases = sweep(3..=n_max, samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(3, n, s)), n);
        let psi = a.to_state();
        let mut worst: f64 = 0.0;
        for p in pair_singleton_partitions(n)? {
            let block = p.blocks().iter().find(|b| b.len() == 2).expect("one pair block");
            let pair: Vec<usize> = block.parties().collect();
            let closed = w_pair_partition_concurrence_sq(&a, pair[0], pair[1])?;
            let c = partition_concurrence_pure(&psi, &p)?;
            worst = worst.max((closed - c * c).abs());
        }
        Ok(vec![w_case(n, s, worst, &a)])
    })?;
    col.record("thm2_pair_partition_closed_form", 1e-10, cases);
    Ok(())
}

fn relation_suite(col: &mut Collector, seed: u64, n_max: usize, samples: usize) -> Result<()> {
    let cases = sweep(3..=n_max, samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(4, n, s)), n);
        Ok(vec![w_case(n, s, verify_theorem3(&a)?.residual, &a)])
    })?;
    col.record("thm3_relation_residual", 1e-12, cases);

    let w4 = WCoefficients::uniform(4);
    let r = verify_theorem3(&w4)?;
    let worked = (r.lhs - 1.5).abs().max((r.rhs - 1.5).abs());
    col.record(
        "thm3_equal_weight_w4_is_3_over_2",
        1e-12,
        vec![w_case(4, 0, worked, &w4)],
    );
    Ok(())
}

/// Four-qubit pure state, not of W class, with
/// `Σ_i (1 − Tr ρ_i²) = Σ_{i=2..4} (1 − Tr ρ_{1i}²)` to within 1e−12.
///
/// The gap `lhs − rhs` is nonnegative on four-qubit pure states and vanishes
/// quadratically at the balanced set, so Newton steps along its gradient from a
/// random start land on a balanced state.
pub fn random_balanced_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let mut psi: Vec<Complex64> = random_pure_state(rng, &[2, 2, 2, 2]).amplitudes().to_vec();
        let mut g = balance_gap(&psi);
        for _ in 0..200 {
            if g.abs() < 1e-13 {
                break;
            }
            let grad = balance_gap_gradient(&psi);
            let norm_sq: f64 = grad.iter().map(|z| z.norm_sqr()).sum();
            if norm_sq < 1e-300 {
                break;
            }
            let mut t = 2.0 * g / norm_sq;
            let mut improved = false;
            for _ in 0..30 {
                let cand = normalized(psi.iter().zip(&grad).map(|(a, d)| a - d * t).collect());
                let gc = balance_gap(&cand);
                if gc.abs() < g.abs() {
                    psi = cand;
                    g = gc;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if g.abs() < 1e-12 {
            let state = PureState::new(vec![2; 4], psi).expect("normalized");
            if !is_w_class(&state) {
                return state;
            }
        }
    }
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Subsets entering the balance gap with their signs, as qubit bit masks
/// (party p is bit 4 − p of the basis index).
const BALANCE_TERMS: [(usize, f64); 7] = [
    (0b1000, 1.0),
    (0b0100, 1.0),
    (0b0010, 1.0),
    (0b0001, 1.0),
    (0b1100, -1.0),
    (0b1010, -1.0),
    (0b1001, -1.0),
];

/// `(ρ_A ⊗ I) ψ` for the four-qubit amplitude vector `psi`, with A given by `keep` bits.
fn apply_reduced(psi: &[Complex64], keep: usize) -> (f64, Vec<Complex64>) {
    let mut rho = [[Complex64::new(0.0, 0.0); 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            if i & !keep == j & !keep {
                rho[i & keep][j & keep] += psi[i] * psi[j].conj();
            }
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); 16];
    for i in 0..16 {
        for j in 0..16 {
            if i & !keep == j & !keep {
                out[i] += rho[i & keep][j & keep] * psi[j];
            }
        }
    }
    let purity = psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum();
    (purity, out)
}

fn balance_gap(psi: &[Complex64]) -> f64 {
    BALANCE_TERMS
        .iter()
        .map(|&(keep, sign)| sign * (1.0 - apply_reduced(psi, keep).0))
        .sum()
}

/// Gradient of the gap on the unit sphere, tangent and orthogonal to the global phase.
fn balance_gap_gradient(psi: &[Complex64]) -> Vec<Complex64> {
    let mut grad = vec![Complex64::new(0.0, 0.0); 16];
    for &(keep, sign) in &BALANCE_TERMS {
        for (g, v) in grad.iter_mut().zip(apply_reduced(psi, keep).1) {
            *g -= v * (4.0 * sign);
        }
    }
    let overlap: Complex64 = psi.iter().zip(&grad).map(|(a, g)| a.conj() * g).sum();
    grad.iter().zip(psi).map(|(g, a)| g - a * overlap).collect()
}

/// True when every amplitude outside the single-excitation kets is negligible.
fn is_w_class(psi: &PureState) -> bool {
    psi.amplitudes()
        .iter()
        .enumerate()
        .all(|(i, a)| i.count_ones() == 1 || a.norm() < 1e-12)
}

fn four_party_suite(col: &mut Collector, seed: u64, samples: usize) -> Result<()> {
    let w_cases = sweep([4], samples, |n, s| {
        let a = random_w_coefficients(&mut stream_rng(seed, stream(5, n, s)), 4);
        let psi = a.to_state();
        let cond = condition_check_theorem4(&psi)?;
        let closed = w_balance_identity(&a)?;
        let exact = concurrence_pure(&psi)?;
        let bound = (tilde_c3_sq(&pure_tripartite_sq(&psi)?)? / 5.0).sqrt();
        let holds = if cond.holds && closed.holds { 0.0 } else { f64::INFINITY };
        Ok(vec![w_case(n, s, holds, &a), w_case(n, s, (bound - exact).abs(), &a)])
    })?;
    let (cond, eq): (Vec<_>, Vec<_>) = w_cases.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
    col.record(
        "thm4_w_states_satisfy_balance",
        0.5,
        cond.into_iter().map(|(_, c)| c).collect(),
    );
    col.record(
        "thm4_w_states_bound_equals_concurrence",
        1e-9,
        eq.into_iter().map(|(_, c)| c).collect(),
    );

    let mut amps = vec![Complex64::new(0.0, 0.0); 16];
    amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[15] = amps[0];
    let ghz = PureState::new(vec![2; 4], amps)?;
    let r = condition_check_theorem4(&ghz)?;
    let ghz_res = (r.lhs - 2.0).abs().max((r.rhs - 1.5).abs()) + if r.holds { f64::INFINITY } else { 0.0 };
    col.record(
        "thm4_ghz4_fails_balance_with_2_vs_3_over_2",
        1e-12,
        vec![Case {
            n: 4,
            sample: 0,
            residual: ghz_res,
            input: json(&StateFile::from_pure(&ghz)),
        }],
    );

    let balanced = sweep([4], 5 * samples, |n, s| {
        let psi = random_balanced_state(&mut stream_rng(seed, stream(6, n, s)));
        let c = concurrence_pure(&psi)?;
        let tilde = tilde_c3_sq(&pure_tripartite_sq(&psi)?)?;
        Ok(vec![Case {
            n,
            sample: s,
            residual: (c * c - tilde / 5.0).abs(),
            input: json(&StateFile::from_pure(&psi)),
        }])
    })?;
    col.record("thm4_balanced_non_w_states_equality", 1e-8, balanced);
    Ok(())
}

fn bounds_suite(col: &mut Collector, seed: u64, samples: usize) -> Result<()> {
    let anchors = [
        eq6_coefficient(3, 1)? - 1.0,
        eq6_coefficient(3, 2)? - 1.0,
        eq6_coefficient(4, 1)? - 1.0,
        eq6_coefficient(4, 2)? - 3f64.sqrt() / 2.0,
    ];
    let worst = anchors.iter().map(|x| x.abs()).fold(0.0, f64::max);
    col.record(
        "bounds_block_size_coefficient_special_cases",
        1e-15,
        vec![Case {
            n: 4,
            sample: 0,
            residual: worst,
            input: serde_json::Value::Null,
        }],
    );

    let cases = sweep(3..=5, 5 * samples, |n, s| {
        let psi = random_pure_state(&mut stream_rng(seed, stream(7, n, s)), &vec![2; n]);
        let exact = concurrence_pure(&psi)?;
        let values = pure_bipartite_values(&psi)?;
        let e5 = bound_eq5(n, &values)?.value;
        let e6 = bound_eq6(n, &max_per_block_size(&values))?.value;
        // Violations beyond the slack count; staying below the exact value is a zero residual.
        let excess = (e5 - exact).max(e6 - exact).max(0.0);
        Ok(vec![Case {
            n,
            sample: s,
            residual: excess,
            input: json(&StateFile::from_pure(&psi)),
        }])
    })?;
    col.record("bounds_pure_state_soundness", 1e-10, cases);
    Ok(())
}
