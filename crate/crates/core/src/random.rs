//! Seeded sampling of states, unitaries and observables.

use nalgebra::QR;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector, Operator};
use crate::state::{DensityMatrix, PureState};

pub type SeededRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Unit vector drawn from the unitarily invariant distribution.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

pub fn random_pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let d = dims.iter().product();
    PureState::new(dims.to_vec(), random_unit_vector(d, rng)).expect("random vector is normalized")
}

/// Haar-random unitary via QR of a complex Gaussian matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = QR::new(g);
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = u.column_mut(k);
        col *= phase;
    }
    u
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Operator::hermitian(h).expect("symmetrized matrix is Hermitian")
}

/// Random mixed state of the given rank with Dirichlet-like weights.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let states: Vec<PureState> = (0..rank.max(1)).map(|_| random_pure_state(dims, rng)).collect();
    let weights = random_weights(states.len(), rng);
    DensityMatrix::mixture(&weights, &states).expect("valid mixture")
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}
