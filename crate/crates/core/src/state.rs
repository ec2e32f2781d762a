//! Pure and mixed states on finite and truncated Fock spaces, and the
//! constructors for every state family used by the witness examples.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eig_matrix, CMatrix, CVector, Operator, HERMITIAN_TOL};
use crate::spin::Spin;

pub const NORM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Invalid(format!("subsystem dimensions must be positive, got {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Row-major digits of a flat index.
pub(crate) fn digits(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = flat % d;
        flat /= d;
    }
    out
}

pub(crate) fn flat_index(dims: &[usize], digits: &[usize]) -> usize {
    dims.iter().zip(digits).fold(0, |acc, (&d, &i)| acc * d + i)
}

/// For every flat index, its flat index within the kept subsystems and within the rest.
fn split_indices(dims: &[usize], keep: &[usize]) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    if keep.is_empty() {
        return Err(Error::Invalid("partial trace must keep at least one subsystem".into()));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange { index: bad, count: dims.len() });
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    let pairs = (0..total)
        .map(|flat| {
            let dg = digits(dims, flat);
            let kd: Vec<usize> = keep.iter().map(|&k| dg[k]).collect();
            let td: Vec<usize> = traced.iter().map(|&k| dg[k]).collect();
            (flat_index(&kept_dims, &kd), flat_index(&traced_dims, &td))
        })
        .collect();
    Ok((kept_dims, pairs))
}

/// Normalized amplitude vector over a tensor product of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let d = check_dims(&dims)?;
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(dims, amplitudes / C64::new(norm, 0.0))
    }

    pub fn from_slice(dims: Vec<usize>, amplitudes: &[C64]) -> Result<Self> {
        Self::new(dims, CVector::from_column_slice(amplitudes))
    }

    pub fn from_real(dims: Vec<usize>, amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(dims, CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| C64::new(x, 0.0))))
    }

    /// Computational basis vector with the given per-subsystem digits.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let d = check_dims(dims)?;
        if digits.len() != dims.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: digits.len() });
        }
        if let Some(k) = (0..dims.len()).find(|&k| digits[k] >= dims[k]) {
            return Err(Error::IndexOutOfRange { index: digits[k], count: dims[k] });
        }
        let mut v = CVector::zeros(d);
        v[flat_index(dims, digits)] = C64::new(1.0, 0.0);
        Ok(Self { dims: dims.to_vec(), amplitudes: v })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        self.amplitudes[flat_index(&self.dims, digits)]
    }

    /// Same amplitudes under a different subsystem split of equal total dimension.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.amplitudes.clone())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    pub fn projector(&self) -> Operator {
        Operator::projector(&self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { dims: self.dims.clone(), entries: &self.amplitudes * self.amplitudes.adjoint() }
    }

    /// Reduced state on `keep`, computed from the amplitudes without forming the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept_dims, pairs) = split_indices(&self.dims, keep)?;
        let dk: usize = kept_dims.iter().product();
        let dt = self.dim() / dk;
        let mut a = CMatrix::zeros(dk, dt);
        for (flat, &(k, t)) in pairs.iter().enumerate() {
            a[(k, t)] = self.amplitudes[flat];
        }
        Ok(DensityMatrix { dims: kept_dims, entries: &a * a.adjoint() })
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix over a tensor product.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, entries: CMatrix) -> Result<Self> {
        let d = check_dims(&dims)?;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: entries.nrows().max(entries.ncols()) });
        }
        let dev = hermitian_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = entries.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eig_matrix(&entries).values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { dims, entries })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    /// `sum_i p_i |psi_i><psi_i|`.
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        let parts: Vec<DensityMatrix> = states.iter().map(PureState::to_density).collect();
        Self::mix(weights, &parts)
    }

    /// `sum_i p_i rho_i`.
    pub fn mix(weights: &[f64], parts: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != parts.len() || parts.is_empty() {
            return Err(Error::Invalid("mixture needs one weight per component".into()));
        }
        if weights.iter().any(|&p| p < 0.0) {
            return Err(Error::Invalid("mixture weights must be nonnegative".into()));
        }
        let dims = parts[0].dims.clone();
        let d = parts[0].dim();
        let mut acc = CMatrix::zeros(d, d);
        for (p, rho) in weights.iter().zip(parts) {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
            }
            acc += &rho.entries * C64::new(*p, 0.0);
        }
        Self::new(dims, acc)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let d = check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), entries: CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0) })
    }

    /// Wraps entries produced by a trace- and positivity-preserving map.
    pub(crate) fn from_parts(dims: Vec<usize>, entries: CMatrix) -> Self {
        Self { dims, entries }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig_matrix(&self.entries).values
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, entries: self.entries.kronecker(&other.entries) }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept_dims, pairs) = split_indices(&self.dims, keep)?;
        let dk: usize = kept_dims.iter().product();
        let dt = self.dim() / dk;
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dt];
        for (flat, &(k, t)) in pairs.iter().enumerate() {
            groups[t].push((k, flat));
        }
        let mut out = CMatrix::zeros(dk, dk);
        for g in &groups {
            for &(ka, fa) in g {
                for &(kb, fb) in g {
                    out[(ka, kb)] += self.entries[(fa, fb)];
                }
            }
        }
        Ok(Self { dims: kept_dims, entries: out })
    }
}

/// Free-function form of [`DensityMatrix::partial_trace`].
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Common interface of pure and mixed states.
pub trait QuantumState {
    fn dims(&self) -> &[usize];
    fn dim(&self) -> usize {
        self.dims().iter().product()
    }
    /// `Tr(op rho)`, real for Hermitian `op`.
    fn expectation(&self, op: &Operator) -> Result<f64>;
    fn density(&self) -> DensityMatrix;
}

impl QuantumState for PureState {
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn expectation(&self, op: &Operator) -> Result<f64> {
        Ok(op.sandwich(&self.amplitudes)?.re)
    }
    fn density(&self) -> DensityMatrix {
        self.to_density()
    }
}

impl QuantumState for DensityMatrix {
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn expectation(&self, op: &Operator) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        // Tr(A B) = sum_ij A_ij B_ji
        let a = op.entries();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += a[(i, j)] * self.entries[(j, i)];
            }
        }
        Ok(acc.re)
    }
    fn density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// Either kind of state, as read from files.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl From<PureState> for State {
    fn from(p: PureState) -> Self {
        State::Pure(p)
    }
}

impl From<DensityMatrix> for State {
    fn from(r: DensityMatrix) -> Self {
        State::Mixed(r)
    }
}

impl QuantumState for State {
    fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(r) => r.dims(),
        }
    }
    fn expectation(&self, op: &Operator) -> Result<f64> {
        match self {
            State::Pure(p) => p.expectation(op),
            State::Mixed(r) => r.expectation(op),
        }
    }
    fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Mixed(r) => r.clone(),
        }
    }
}

/// Fock-space cutoff: levels `0..=n_max` are kept, and constructors refuse
/// states whose discarded probability exceeds `tail_tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub tail_tol: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n_max: 40, tail_tol: 1e-10 }
    }
}

impl TruncationConfig {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        let t = Self { n_max, tail_tol };
        t.validate()?;
        Ok(t)
    }

    pub fn with_n_max(n_max: usize) -> Result<Self> {
        Self::new(n_max, Self::default().tail_tol)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::Invalid("n_max must be at least 1".into()));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::Invalid(format!("tail_tol must lie in (0, 1), got {}", self.tail_tol)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// A truncated single-mode state together with the probability mass that was discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    pub state: PureState,
    pub tail_mass: f64,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-n} n^n / n!`, the Poisson weight at its own mean.
pub fn poisson_peak(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (-nf + nf * nf.ln() - ln_factorial(n)).exp()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Untruncated coherent-state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n <= n_max`.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> CVector {
    let mut v = CVector::zeros(n_max + 1);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v[0] = a;
    for n in 1..=n_max {
        a = a * alpha / (n as f64).sqrt();
        v[n] = a;
    }
    v
}

/// Poisson mass `e^{-x} sum_{k > n_max} x^k / k!` with `x = |alpha|^2`.
pub fn coherent_tail(alpha: C64, n_max: usize) -> f64 {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return 0.0;
    }
    let mut k = n_max + 1;
    let mut term = (-x + k as f64 * x.ln() - ln_factorial(k)).exp();
    let mut sum = 0.0;
    loop {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if (k as f64) > x && term < 1e-30 * sum.max(1e-300) {
            break;
        }
        if k > n_max + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

pub fn fock_state(n: usize, trunc: &TruncationConfig) -> Result<PureState> {
    trunc.validate()?;
    if n > trunc.n_max {
        return Err(Error::IndexOutOfRange { index: n, count: trunc.dim() });
    }
    PureState::basis(&[trunc.dim()], &[n])
}

pub fn coherent_state(alpha: C64, trunc: &TruncationConfig) -> Result<TruncatedState> {
    trunc.validate()?;
    let tail = coherent_tail(alpha, trunc.n_max);
    if tail > trunc.tail_tol {
        return Err(Error::TruncationInsufficient { tail, tol: trunc.tail_tol });
    }
    let state = PureState::normalized(vec![trunc.dim()], coherent_amplitudes(alpha, trunc.n_max))?;
    Ok(TruncatedState { state, tail_mass: tail })
}

/// Spin coherent state `|z>` in the Dicke basis `m = -j..=j`.
pub fn su2_coherent_state(z: C64, spin: Spin) -> PureState {
    let r = z.norm();
    let theta = 2.0 * r.atan();
    su2_coherent_state_angles(theta, z.arg(), spin)
}

/// Spin coherent state at polar angle `theta` from the lowest-weight pole, azimuth `phi`.
/// Equivalent to `z = tan(theta/2) e^{i phi}` and regular at `theta = pi`.
pub fn su2_coherent_state_angles(theta: f64, phi: f64, spin: Spin) -> PureState {
    let n = spin.two_j() as usize;
    let (s, c) = (theta / 2.0).sin_cos();
    let amps = CVector::from_fn(n + 1, |k, _| {
        let mag = binomial(n, k).sqrt() * c.powi((n - k) as i32) * s.powi(k as i32);
        C64::from_polar(mag, k as f64 * phi)
    });
    PureState::normalized(vec![n + 1], amps).expect("spin coherent amplitudes are normalizable")
}

/// `sqrt(1 - q^2) sum_k q^k |2k>`, renormalized on the retained levels.
pub fn squeezed_vacuum(q: f64, trunc: &TruncationConfig) -> Result<TruncatedState> {
    trunc.validate()?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Invalid(format!("squeezing parameter must lie in (0, 1), got {q}")));
    }
    let first_dropped = trunc.n_max / 2 + 1;
    let tail = q.powi(2 * first_dropped as i32);
    if tail > trunc.tail_tol {
        return Err(Error::TruncationInsufficient { tail, tol: trunc.tail_tol });
    }
    let pre = (1.0 - q * q).sqrt();
    let amps = CVector::from_fn(trunc.dim(), |n, _| {
        if n % 2 == 0 {
            C64::new(pre * q.powi((n / 2) as i32), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(TruncatedState { state: PureState::normalized(vec![trunc.dim()], amps)?, tail_mass: tail })
}

/// Even cat state `|alpha> + |-alpha>`, exactly normalized.
pub fn cat_state(alpha: C64, trunc: &TruncationConfig) -> Result<TruncatedState> {
    trunc.validate()?;
    if alpha.norm() == 0.0 {
        return Err(Error::Invalid("cat state needs alpha != 0".into()));
    }
    let tail = coherent_tail(alpha, trunc.n_max);
    if tail > trunc.tail_tol {
        return Err(Error::TruncationInsufficient { tail, tol: trunc.tail_tol });
    }
    let base = coherent_amplitudes(alpha, trunc.n_max);
    let amps = CVector::from_fn(trunc.dim(), |n, _| if n % 2 == 0 { base[n] * 2.0 } else { C64::new(0.0, 0.0) });
    Ok(TruncatedState { state: PureState::normalized(vec![trunc.dim()], amps)?, tail_mass: tail })
}

/// Photocount distribution of a single-photon-added thermal state with mean photon number `nbar`.
pub fn spats_photocount(nbar: f64, n: usize) -> Result<f64> {
    if !(nbar > 0.0) {
        return Err(Error::Invalid(format!("mean photon number must be positive, got {nbar}")));
    }
    let x = nbar / (nbar + 1.0);
    Ok(x.powi(n as i32) * n as f64 / (nbar * (nbar + 1.0)))
}

/// Truncated annihilation operator on levels `0..=n_max`.
pub fn annihilation(n_max: usize) -> Operator {
    let d = n_max + 1;
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(m).expect("square")
}

pub fn number_operator(n_max: usize) -> Operator {
    Operator::diagonal(&(0..=n_max).map(|n| n as f64).collect::<Vec<_>>())
}
