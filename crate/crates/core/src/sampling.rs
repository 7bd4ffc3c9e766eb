//! Random states, coefficients and unitaries for property tests and the
//! verification harness.
//!
//! Pure states and W coefficients are normalized complex Gaussian vectors,
//! which is rotation invariant. Unitaries and isometries come from the QR
//! factorization of a complex Gaussian matrix with the phases of `R` absorbed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{density_from_pure, DensityMatrix, PureState};
use crate::wclass::WCoefficients;

/// A generator for stream `stream` of `seed`; distinct streams are independent.
/// Generator type behind [`stream_rng`].
pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| gaussian_complex(rng)).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureState {
    let total = dims.iter().product();
    PureState::from_unnormalized(dims.to_vec(), gaussian_vector(rng, total)).expect("Gaussian vector is nonzero")
}

pub fn random_w_coefficients<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WCoefficients {
    let v = gaussian_vector(rng, n);
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    WCoefficients::new(v.into_iter().map(|a| a / norm).collect()).expect("normalized")
}

/// Random product state `|φ_1⟩ ⊗ … ⊗ |φ_N⟩`.
pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureState {
    dims.iter()
        .map(|&d| random_pure_state(rng, &[d]))
        .reduce(|acc, s| acc.tensor(&s))
        .expect("at least one party")
}

/// An `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = DMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..rows {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    random_isometry(rng, d, d)
}

/// `G G† / Tr(G G†)` with `G` a `side × rank` complex Gaussian matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> DensityMatrix {
    let side: usize = dims.iter().product();
    let g = DMatrix::from_fn(side, rank, |_, _| gaussian_complex(rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m.iter_mut().for_each(|z| *z /= tr);
    // Restore exact Hermiticity lost to rounding.
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(dims.to_vec(), m).expect("Gram matrix is a valid density matrix")
}

/// Two-qubit Werner state `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`.
pub fn werner_state(p: f64) -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let singlet =
        PureState::new(vec![2, 2], vec![z, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), z]).expect("normalized");
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).expect("valid dims");
    DensityMatrix::mixture(&[(p, &density_from_pure(&singlet)), (1.0 - p, &mixed)]).expect("valid mixture")
}
