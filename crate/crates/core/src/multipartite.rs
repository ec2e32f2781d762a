//! Multipartite states built from a single nonclassical system by CD gates
//! and local invertible maps, and the invariants used to tell their classes apart.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, singular_values, CMatrix, CVector};
use crate::potential::apply_cd;
use crate::random::{gaussian_complex, seeded};
use crate::state::{digits, flat_index, PureState};

/// Invertible map acting on one subsystem, `T|j> = sum_i T_ij |i>`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperation {
    pub target: usize,
    matrix: CMatrix,
}

impl LocalOperation {
    pub fn new(target: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let det = matrix.determinant().norm();
        if !(det > 1e-12) {
            return Err(Error::Singular { det });
        }
        Ok(Self { target, matrix })
    }

    /// Block-diagonal Jordan form; each `(size, eigenvalue)` block carries ones on its subdiagonal.
    pub fn jordan(target: usize, blocks: &[(usize, C64)]) -> Result<Self> {
        Self::new(target, jordan_matrix(blocks)?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn jordan_matrix(blocks: &[(usize, C64)]) -> Result<CMatrix> {
    if blocks.is_empty() || blocks.iter().any(|&(s, _)| s == 0) {
        return Err(Error::Invalid("Jordan blocks need positive sizes".into()));
    }
    if let Some(&(_, l)) = blocks.iter().find(|&&(_, l)| l.norm() <= 1e-12) {
        return Err(Error::Singular { det: l.norm() });
    }
    let d: usize = blocks.iter().map(|b| b.0).sum();
    let mut m = CMatrix::zeros(d, d);
    let mut off = 0;
    for &(size, lambda) in blocks {
        for k in 0..size {
            m[(off + k, off + k)] = lambda;
            if k + 1 < size {
                m[(off + k + 1, off + k)] = C64::new(1.0, 0.0);
            }
        }
        off += size;
    }
    Ok(m)
}

/// Applies a local map and renormalizes.
pub fn apply_local(psi: &PureState, op: &LocalOperation) -> Result<PureState> {
    let dims = psi.dims();
    if op.target >= dims.len() {
        return Err(Error::IndexOutOfRange { index: op.target, count: dims.len() });
    }
    if dims[op.target] != op.dim() {
        return Err(Error::DimensionMismatch { expected: dims[op.target], found: op.dim() });
    }
    let a = psi.amplitudes();
    let mut out = CVector::zeros(a.len());
    for flat in 0..a.len() {
        if a[flat] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut dg = digits(dims, flat);
        let j = dg[op.target];
        for i in 0..op.dim() {
            let t = op.matrix[(i, j)];
            if t != C64::new(0.0, 0.0) {
                dg[op.target] = i;
                out[flat_index(dims, &dg)] += t * a[flat];
            }
        }
    }
    PureState::normalized(dims.to_vec(), out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// 0-based control and target.
    Cd { control: usize, target: usize },
    Local(LocalOperation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub initial: PureState,
    pub steps: Vec<Step>,
}

impl Recipe {
    /// Initial amplitudes either for the whole register or for the first
    /// subsystem only, the others then starting in `|0>`.
    pub fn new(dims: Vec<usize>, initial: &[C64]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Invalid("recipe needs at least one subsystem".into()));
        }
        let total: usize = dims.iter().product();
        let v = CVector::from_column_slice(initial);
        let state = if initial.len() == total {
            PureState::normalized(dims, v)?
        } else if initial.len() == dims[0] {
            let first = PureState::normalized(vec![dims[0]], v)?;
            let rest = PureState::basis(&dims[1..], &vec![0; dims.len() - 1]);
            match rest {
                Ok(r) => first.tensor(&r),
                Err(_) => first,
            }
        } else {
            return Err(Error::DimensionMismatch { expected: dims[0], found: initial.len() });
        };
        Ok(Self { initial: state, steps: Vec::new() })
    }

    pub fn dims(&self) -> &[usize] {
        self.initial.dims()
    }

    pub fn cd(mut self, control: usize, target: usize) -> Self {
        self.steps.push(Step::Cd { control, target });
        self
    }

    pub fn local(mut self, op: LocalOperation) -> Self {
        self.steps.push(Step::Local(op));
        self
    }
}

#[derive(Clone, Debug)]
pub struct RecipeRun {
    pub state: PureState,
    /// Initial state followed by the state after every step.
    pub intermediates: Vec<PureState>,
}

pub fn run_recipe(r: &Recipe) -> Result<RecipeRun> {
    let mut cur = r.initial.clone();
    let mut intermediates = vec![cur.clone()];
    for step in &r.steps {
        cur = match step {
            Step::Cd { control, target } => apply_cd(&cur, *control, *target)?,
            Step::Local(op) => apply_local(&cur, op)?,
        };
        intermediates.push(cur.clone());
    }
    Ok(RecipeRun { state: cur, intermediates })
}

fn t_matrix() -> LocalOperation {
    LocalOperation::jordan(1, &[(2, C64::new(1.0, 0.0))]).expect("invertible")
}

/// `(a|0> + b|1>)|00>` followed by CD(1,2), CD(2,3).
pub fn ghz_recipe(a: C64, b: C64) -> Result<Recipe> {
    Ok(Recipe::new(vec![2, 2, 2], &[a, b])?.cd(0, 1).cd(1, 2))
}

/// CD(1,2), T on the second qubit, CD(2,3), CD(1,3).
pub fn w_recipe(a: C64, b: C64) -> Result<Recipe> {
    Ok(Recipe::new(vec![2, 2, 2], &[a, b])?.cd(0, 1).local(t_matrix()).cd(1, 2).cd(0, 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QutritCase {
    T1_332,
    T2_332,
    T1_233,
    T2_233,
}

impl QutritCase {
    pub const ALL: [QutritCase; 4] = [Self::T1_332, Self::T2_332, Self::T1_233, Self::T2_233];

    pub fn dims(self) -> Vec<usize> {
        match self {
            Self::T1_332 | Self::T2_332 => vec![3, 3, 2],
            Self::T1_233 | Self::T2_233 => vec![2, 3, 3],
        }
    }

    fn jordan(self) -> Vec<(usize, C64)> {
        let one = C64::new(1.0, 0.0);
        match self {
            Self::T1_332 | Self::T1_233 => vec![(3, one)],
            Self::T2_332 | Self::T2_233 => vec![(1, one), (2, one)],
        }
    }

    fn check(self, a: C64, b: C64) -> Result<()> {
        if a.norm() <= 1e-12 || b.norm() <= 1e-12 {
            return Err(Error::Invalid(format!("case {self} needs nonzero a and b")));
        }
        Ok(())
    }

    /// CD(1,2), the case's Jordan form on party 2, CD(2,3), CD(1,3).
    pub fn recipe(self, a: C64, b: C64, c: C64) -> Result<Recipe> {
        self.check(a, b)?;
        let initial: Vec<C64> = match self {
            Self::T1_332 | Self::T2_332 => vec![a, b, c],
            Self::T1_233 | Self::T2_233 => vec![a, b],
        };
        let t = LocalOperation::jordan(1, &self.jordan())?;
        Ok(Recipe::new(self.dims(), &initial)?.cd(0, 1).local(t).cd(1, 2).cd(0, 2))
    }

    /// The class representative as displayed for this case (normalized); `c` is unused by the 2⊗3⊗3 cases.
    pub fn display_state(self, a: C64, b: C64, c: C64) -> Result<PureState> {
        self.check(a, b)?;
        let terms: Vec<([usize; 3], C64)> = match self {
            Self::T1_332 => vec![([0, 0, 0], a), ([1, 1, 0], b), ([2, 2, 0], c), ([0, 1, 1], a), ([1, 2, 1], b)],
            Self::T2_332 => vec![([0, 0, 0], a), ([1, 1, 0], b), ([2, 2, 0], c), ([1, 2, 1], b)],
            Self::T1_233 => vec![([0, 0, 0], a), ([1, 1, 2], b), ([1, 2, 0], b)],
            Self::T2_233 => vec![([0, 0, 0], a), ([1, 1, 1], b), ([1, 2, 2], b)],
        };
        let dims = self.dims();
        let mut v = CVector::zeros(dims.iter().product());
        for (dg, z) in terms {
            v[flat_index(&dims, &dg)] += z;
        }
        PureState::normalized(dims, v)
    }
}

impl fmt::Display for QutritCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::T1_332 => "332-T1",
            Self::T2_332 => "332-T2",
            Self::T1_233 => "233-T1",
            Self::T2_233 => "233-T2",
        })
    }
}

impl FromStr for QutritCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown qutrit case {s:?} (expected 332-T1, 332-T2, 233-T1 or 233-T2)")))
    }
}

pub fn generate_qutrit_classes(case: QutritCase, a: C64, b: C64, c: C64) -> Result<PureState> {
    case.display_state(a, b, c)
}

fn require_three_qubits(psi: &PureState) -> Result<()> {
    if psi.dims() != [2, 2, 2] {
        return Err(Error::Invalid(format!("expected three qubits, got dims {:?}", psi.dims())));
    }
    Ok(())
}

/// `4 |Det|` with `Det` the Cayley hyperdeterminant of the 2x2x2 amplitude tensor.
pub fn three_tangle(psi: &PureState) -> Result<f64> {
    require_three_qubits(psi)?;
    let a = |i: usize, j: usize, k: usize| psi.amplitudes()[4 * i + 2 * j + k];
    let d1 = a(0, 0, 0).powi(2) * a(1, 1, 1).powi(2)
        + a(0, 0, 1).powi(2) * a(1, 1, 0).powi(2)
        + a(0, 1, 0).powi(2) * a(1, 0, 1).powi(2)
        + a(1, 0, 0).powi(2) * a(0, 1, 1).powi(2);
    let d2 = a(0, 0, 0) * a(1, 1, 1) * a(0, 1, 1) * a(1, 0, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 0) * a(0, 0, 1)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0) * a(0, 0, 1)
        + a(1, 0, 1) * a(0, 1, 0) * a(1, 1, 0) * a(0, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1) + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
    Ok(4.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm())
}

pub const RANK_TOL: f64 = 1e-9;

/// Rank of every single-party reduced state.
pub fn local_ranks(psi: &PureState) -> Result<Vec<usize>> {
    (0..psi.dims().len())
        .map(|k| Ok(psi.reduced(&[k])?.eigenvalues().into_iter().filter(|&w| w > RANK_TOL).count()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "bisep-A|BC")]
    BisepA,
    #[serde(rename = "bisep-B|AC")]
    BisepB,
    #[serde(rename = "bisep-C|AB")]
    BisepC,
    W,
    #[serde(rename = "GHZ")]
    Ghz,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Product => "product",
            Self::BisepA => "bisep-A|BC",
            Self::BisepB => "bisep-B|AC",
            Self::BisepC => "bisep-C|AB",
            Self::W => "W",
            Self::Ghz => "GHZ",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: ClassLabel,
    pub tangle: f64,
    pub local_ranks: Vec<usize>,
}

pub const TANGLE_TOL: f64 = 1e-8;

pub fn classify_three_qubit(psi: &PureState) -> Result<Classification> {
    require_three_qubits(psi)?;
    let ranks = local_ranks(psi)?;
    let tangle = three_tangle(psi)?;
    let ones: Vec<usize> = (0..3).filter(|&k| ranks[k] == 1).collect();
    let label = match ones.as_slice() {
        [0] => ClassLabel::BisepA,
        [1] => ClassLabel::BisepB,
        [2] => ClassLabel::BisepC,
        [] if tangle > TANGLE_TOL => ClassLabel::Ghz,
        [] => ClassLabel::W,
        _ => ClassLabel::Product,
    };
    Ok(Classification { label, tangle, local_ranks: ranks })
}

/// Matrix of `psi` contracted with `v` on party `k`, rows and columns over the
/// remaining two parties in order.
fn slice(psi: &PureState, k: usize, v: &[C64]) -> CMatrix {
    let dims = psi.dims();
    let others: Vec<usize> = (0..3).filter(|&p| p != k).collect();
    let (r, c) = (dims[others[0]], dims[others[1]]);
    let mut m = CMatrix::zeros(r, c);
    for flat in 0..psi.dim() {
        let dg = digits(dims, flat);
        m[(dg[others[0]], dg[others[1]])] += v[dg[k]].conj() * psi.amplitudes()[flat];
    }
    m
}

/// All roots of `sum_k c_k t^k` (Durand-Kerner).
fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let scale = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-12 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<C64> = coeffs[..=deg].iter().map(|c| c / lead).collect();
    let eval = |t: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut shift = 0.0_f64;
        for i in 0..deg {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-15 {
            break;
        }
    }
    roots
}

// tolerance at candidate points: multiple roots are only located to about sqrt(eps)
const SLICE_RANK_TOL: f64 = 1e-7;

fn normalized_slice_rank(psi: &PureState, k: usize, v: [C64; 2]) -> usize {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    rank(&slice(psi, k, &[v[0] / n, v[1] / n]), SLICE_RANK_TOL)
}

/// `min_v rank(<v|_k psi)` over nonzero `v` for a qubit party `k`.
///
/// The slice is a pencil `A0 + t A1`; its rank can only drop where a random
/// `r x r` compression has vanishing determinant, so those finitely many
/// points plus `t = infinity` are checked exactly.
pub fn min_slice_rank(psi: &PureState, k: usize) -> Result<usize> {
    if psi.dims().len() != 3 || k >= 3 {
        return Err(Error::Invalid("slice rank needs a tripartite state and a party index < 3".into()));
    }
    if psi.dims()[k] != 2 {
        return Err(Error::Invalid(format!("party {k} is not a qubit")));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let a0 = slice(psi, k, &[one, zero]);
    let a1 = slice(psi, k, &[zero, one]);
    let mut best = normalized_slice_rank(psi, k, [zero, one]).min(normalized_slice_rank(psi, k, [one, zero]));
    let generic = singular_values(&(&a0 + &a1 * C64::new(0.6180339887, 0.3141592653)))
        .into_iter()
        .filter(|&s| s > SLICE_RANK_TOL)
        .count();
    if generic == 0 {
        return Ok(0);
    }
    let mut rng = seeded(0x5eed);
    let p = CMatrix::from_fn(generic, a0.nrows(), |_, _| gaussian_complex(&mut rng));
    let q = CMatrix::from_fn(a0.ncols(), generic, |_, _| gaussian_complex(&mut rng));
    let (p0, p1) = (&p * &a0 * &q, &p * &a1 * &q);
    // coefficients of det(p0 + t p1), degree <= generic, from samples on the unit circle
    let n = generic + 1;
    let samples: Vec<C64> = (0..n)
        .map(|m| {
            let t = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64);
            (&p0 + &p1 * t).determinant()
        })
        .collect();
    let coeffs: Vec<C64> = (0..n)
        .map(|kk| {
            samples
                .iter()
                .enumerate()
                .map(|(m, s)| s * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (m * kk) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect();
    for t in polynomial_roots(&coeffs) {
        // contraction uses conj(v), so v = (1, conj(t)) realizes A0 + t A1
        best = best.min(normalized_slice_rank(psi, k, [one, t.conj()]));
    }
    Ok(best.min(generic))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankSignature {
    pub local: Vec<usize>,
    /// Rank of the reduced state on each pair of parties, ordered (BC, AC, AB).
    pub cuts: Vec<usize>,
    /// Minimum slice rank for each qubit party; `None` for other dimensions.
    pub min_slice: Vec<Option<usize>>,
}

pub fn rank_signature(psi: &PureState) -> Result<RankSignature> {
    if psi.dims().len() != 3 {
        return Err(Error::Invalid(format!("rank signature needs three parties, got {:?}", psi.dims())));
    }
    let local = local_ranks(psi)?;
    let cuts = (0..3)
        .map(|k| {
            let keep: Vec<usize> = (0..3).filter(|&p| p != k).collect();
            Ok(psi.reduced(&keep)?.eigenvalues().into_iter().filter(|&w| w > RANK_TOL).count())
        })
        .collect::<Result<Vec<_>>>()?;
    let min_slice = (0..3)
        .map(|k| if psi.dims()[k] == 2 { min_slice_rank(psi, k).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankSignature { local, cuts, min_slice })
}
