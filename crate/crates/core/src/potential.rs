//! Controlled-displacement gates, the 50:50 beam splitter, and the
//! superposition-number / Schmidt-number bookkeeping around them.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_matrix, CMatrix, CVector, Operator};
use crate::state::{digits, flat_index, DensityMatrix, PureState, State, TruncationConfig};

/// Default cutoff on amplitudes and Schmidt coefficients.
pub const COUNT_TOL: f64 = 1e-9;

/// `|i, j> -> |i, (j + i) mod d_target>`: the control index displaces the target by itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CdGate {
    pub d_control: usize,
    pub d_target: usize,
}

impl CdGate {
    /// Qudit CNOT on two systems of dimension `d`.
    pub fn new(d: usize) -> Self {
        Self { d_control: d, d_target: d }
    }

    pub fn map(&self, i: usize, j: usize) -> (usize, usize) {
        (i, (j + i) % self.d_target)
    }

    /// Permutation matrix on the control-target pair (control first).
    pub fn unitary(&self) -> Operator {
        let n = self.d_control * self.d_target;
        let mut u = CMatrix::zeros(n, n);
        for i in 0..self.d_control {
            for j in 0..self.d_target {
                let (a, b) = self.map(i, j);
                u[(a * self.d_target + b, i * self.d_target + j)] = C64::new(1.0, 0.0);
            }
        }
        Operator::new(u).expect("square")
    }
}

/// Flat-index permutation of the CD gate embedded at `(control, target)`.
fn cd_permutation(dims: &[usize], control: usize, target: usize) -> Result<Vec<usize>> {
    for &k in &[control, target] {
        if k >= dims.len() {
            return Err(Error::IndexOutOfRange { index: k, count: dims.len() });
        }
    }
    if control == target {
        return Err(Error::Invalid(format!("control and target coincide ({control})")));
    }
    let gate = CdGate { d_control: dims[control], d_target: dims[target] };
    let total: usize = dims.iter().product();
    Ok((0..total)
        .map(|flat| {
            let mut dg = digits(dims, flat);
            dg[target] = gate.map(dg[control], dg[target]).1;
            flat_index(dims, &dg)
        })
        .collect())
}

/// CD gate on a pure state; subsystem indices are 0-based.
pub fn apply_cd(psi: &PureState, control: usize, target: usize) -> Result<PureState> {
    let perm = cd_permutation(psi.dims(), control, target)?;
    let a = psi.amplitudes();
    let mut out = CVector::zeros(a.len());
    for (src, &dst) in perm.iter().enumerate() {
        out[dst] = a[src];
    }
    PureState::new(psi.dims().to_vec(), out)
}

/// `U rho U^dagger` for the CD permutation `U`.
pub fn apply_cd_density(rho: &DensityMatrix, control: usize, target: usize) -> Result<DensityMatrix> {
    let perm = cd_permutation(rho.dims(), control, target)?;
    let e = rho.entries();
    let n = e.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = e[(i, j)];
        }
    }
    Ok(DensityMatrix::from_parts(rho.dims().to_vec(), out))
}

pub fn apply_cd_state(state: &State, control: usize, target: usize) -> Result<State> {
    Ok(match state {
        State::Pure(p) => State::Pure(apply_cd(p, control, target)?),
        State::Mixed(r) => State::Mixed(apply_cd_density(r, control, target)?),
    })
}

/// `exp(pi/4 (a1 a2^dagger - a1^dagger a2))` on two modes truncated at `n_max` each.
///
/// The operator conserves total photon number, so it is assembled from one
/// block per total `N <= n_max`; higher blocks are not fully represented and
/// are left as the identity.
#[derive(Clone, Debug)]
pub struct BeamSplitter {
    pub trunc: TruncationConfig,
    /// Block `N` acts on `|k, N-k>` for `k = 0..=N`.
    blocks: Vec<CMatrix>,
}

impl BeamSplitter {
    pub fn new(trunc: TruncationConfig) -> Result<Self> {
        trunc.validate()?;
        let theta = std::f64::consts::FRAC_PI_4;
        let blocks = (0..=trunc.n_max)
            .map(|n| {
                let mut g = CMatrix::zeros(n + 1, n + 1);
                for k in 0..=n {
                    let (kf, nf) = (k as f64, n as f64);
                    if k >= 1 {
                        g[(k - 1, k)] = C64::new(kf.sqrt() * (nf - kf + 1.0).sqrt(), 0.0);
                    }
                    if k < n {
                        g[(k + 1, k)] = C64::new(-(kf + 1.0).sqrt() * (nf - kf).sqrt(), 0.0);
                    }
                }
                // G is real antisymmetric, so iG is Hermitian and exp(theta G) = exp(-i theta (iG))
                let h = &g * C64::new(0.0, 1.0);
                let eig = hermitian_eig_matrix(&h);
                let phases = CVector::from_iterator(
                    eig.values.len(),
                    eig.values.iter().map(|&w| C64::from_polar(1.0, -theta * w)),
                );
                &eig.vectors * CMatrix::from_diagonal(&phases) * eig.vectors.adjoint()
            })
            .collect();
        Ok(Self { trunc, blocks })
    }

    pub fn mode_dim(&self) -> usize {
        self.trunc.n_max + 1
    }

    /// Full two-mode matrix in the basis `|n1, n2>`, index `n1 * (n_max+1) + n2`.
    pub fn unitary(&self) -> Operator {
        let d = self.mode_dim();
        let mut u = CMatrix::identity(d * d, d * d);
        for (n, b) in self.blocks.iter().enumerate() {
            for k in 0..=n {
                for l in 0..=n {
                    u[(k * d + (n - k), l * d + (n - l))] = b[(k, l)];
                }
            }
        }
        Operator::new(u).expect("square")
    }

    /// Two-mode output for a product input.
    ///
    /// Input weight on total photon numbers above `n_max` is discarded and
    /// the output renormalized; more than `tail_tol` of it is an error.
    pub fn apply(&self, psi1: &PureState, psi2: &PureState) -> Result<PureState> {
        let d = self.mode_dim();
        for p in [psi1, psi2] {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
            }
        }
        let (a, b) = (psi1.amplitudes(), psi2.amplitudes());
        let mut leak = 0.0;
        for n1 in 0..d {
            for n2 in (d - n1)..d {
                leak += (a[n1] * b[n2]).norm_sqr();
            }
        }
        if leak > self.trunc.tail_tol {
            return Err(Error::SupportOverflow { leak, n_max: self.trunc.n_max });
        }
        let mut out = CVector::zeros(d * d);
        for (n, blk) in self.blocks.iter().enumerate() {
            let input = CVector::from_fn(n + 1, |l, _| a[l] * b[n - l]);
            let output = blk * input;
            for k in 0..=n {
                out[k * d + (n - k)] = output[k];
            }
        }
        PureState::normalized(vec![d, d], out)
    }
}

/// Number of amplitudes above `tol` in the computational basis.
pub fn superposition_number(psi: &PureState, tol: f64) -> usize {
    psi.amplitudes().iter().filter(|c| c.norm() > tol).count()
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Descending.
    pub coefficients: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
}

impl SchmidtDecomposition {
    /// `sum_k c_k |a_k> |b_k>` as a flat amplitude vector.
    pub fn reconstruct(&self) -> CVector {
        let mut v = CVector::zeros(self.left[0].len() * self.right[0].len());
        for k in 0..self.coefficients.len() {
            v += self.left[k].kronecker(&self.right[k]) * C64::new(self.coefficients[k], 0.0);
        }
        v
    }
}

fn check_bipartite(psi: &PureState, dims: [usize; 2]) -> Result<()> {
    if dims[0] * dims[1] != psi.dim() || dims.contains(&0) {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: dims[0] * dims[1] });
    }
    Ok(())
}

/// SVD of the `d1 x d2` amplitude matrix.
pub fn schmidt_decomposition(psi: &PureState, dims: [usize; 2]) -> Result<SchmidtDecomposition> {
    check_bipartite(psi, dims)?;
    let [d1, d2] = dims;
    let a = CMatrix::from_fn(d1, d2, |i, j| psi.amplitudes()[i * d2 + j]);
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&k| svd.singular_values[k]).collect(),
        left: order.iter().map(|&k| u.column(k).into_owned()).collect(),
        right: order.iter().map(|&k| vt.row(k).transpose()).collect(),
    })
}

pub fn schmidt_number(psi: &PureState, dims: [usize; 2], tol: f64) -> Result<usize> {
    Ok(schmidt_decomposition(psi, dims)?.coefficients.into_iter().filter(|&c| c > tol).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub d: usize,
    pub superposition_number: usize,
    pub schmidt_number: usize,
    /// Max-norm weight of the output outside `span{|kk>}` (mixed inputs only).
    pub support_residual: Option<f64>,
    pub holds: bool,
}

/// Runs `U_CD (rho ⊗ |0><0|) U_CD^dagger` and compares input superposition
/// number with output Schmidt number.
///
/// Mixed inputs are certified through the support of the output: it must lie
/// in `span{|kk>}`, and the count of occupied `|kk>` is reported for both sides.
pub fn cd_conversion_check(state: &State) -> Result<ConversionReport> {
    if state_dims(state).len() != 1 {
        return Err(Error::Invalid("conversion check takes a single-system input".into()));
    }
    let d = state_dims(state)[0];
    let anc = PureState::basis(&[d], &[0])?;
    match state {
        State::Pure(psi) => {
            let out = apply_cd(&psi.tensor(&anc), 0, 1)?;
            let r = superposition_number(psi, COUNT_TOL);
            let s = schmidt_number(&out, [d, d], COUNT_TOL)?;
            Ok(ConversionReport { d, superposition_number: r, schmidt_number: s, support_residual: None, holds: r == s })
        }
        State::Mixed(rho) => {
            let out = apply_cd_density(&rho.tensor(&anc.to_density()), 0, 1)?;
            let e = out.entries();
            let on_diag = |i: usize| i / d == i % d;
            let mut residual = 0.0_f64;
            for i in 0..d * d {
                for j in 0..d * d {
                    if !(on_diag(i) && on_diag(j)) {
                        residual = residual.max(e[(i, j)].norm());
                    }
                }
            }
            let input_support = (0..d).filter(|&k| rho.entries()[(k, k)].re > COUNT_TOL).count();
            let output_support = (0..d).filter(|&k| e[(k * d + k, k * d + k)].re > COUNT_TOL).count();
            Ok(ConversionReport {
                d,
                superposition_number: input_support,
                schmidt_number: output_support,
                support_residual: Some(residual),
                holds: residual < 1e-10 && input_support == output_support,
            })
        }
    }
}

fn state_dims(state: &State) -> &[usize] {
    match state {
        State::Pure(p) => p.dims(),
        State::Mixed(r) => r.dims(),
    }
}

/// `(1/sqrt d) sum_k w^{jk} |k>` with `w = e^{2 pi i / d}`.
pub fn momentum_state(d: usize, j: usize) -> Result<PureState> {
    if d == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let s = 1.0 / (d as f64).sqrt();
    let v = CVector::from_fn(d, |k, _| {
        C64::from_polar(s, 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64)
    });
    PureState::normalized(vec![d], v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumReport {
    pub d: usize,
    pub j: usize,
    pub schmidt_number: usize,
    pub coefficients: Vec<f64>,
}

/// Schmidt structure of the CD output when the target port holds a momentum state.
pub fn momentum_port_check(first: &PureState, j: usize) -> Result<MomentumReport> {
    let d = first.dim();
    let out = apply_cd(&first.with_dims(vec![d])?.tensor(&momentum_state(d, j)?), 0, 1)?;
    let dec = schmidt_decomposition(&out, [d, d])?;
    let schmidt_number = dec.coefficients.iter().filter(|&&c| c > COUNT_TOL).count();
    Ok(MomentumReport { d, j, schmidt_number, coefficients: dec.coefficients })
}
