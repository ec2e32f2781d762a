//! Classical-basis families and the maximal classical expectation
//! `lambda(M) = max_{|c> in C} <c|M|c>`.
//!
//! Closed forms are used where they exist (orthonormal bases, Fock
//! projectors over coherent states, multiples of the identity). Otherwise the
//! two-parameter families are searched on a grid and refined coordinate-wise
//! with golden-section steps, and bipartite product states use an
//! alternating (see-saw) eigenvector iteration with random restarts.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_matrix, CMatrix, CVector, Operator};
use crate::optimize::coordinate_refine;
use crate::random::{random_unit_vector, seeded};
use crate::spin::Spin;
use crate::state::{
    coherent_amplitudes, coherent_tail, poisson_peak, su2_coherent_state_angles, PureState, TruncationConfig,
};

fn default_tail_tol() -> f64 {
    TruncationConfig::default().tail_tol
}

fn default_radius() -> f64 {
    6.0
}

/// A family of pure states declared classical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ClassicalFamily {
    #[serde(rename = "discrete")]
    OrthonormalDiscrete { d: usize },
    /// Coherent states `|alpha>` with `|alpha| <= radius` on levels `0..=n_max`.
    #[serde(rename = "coherent")]
    CanonicalCoherent {
        n_max: usize,
        #[serde(default = "default_tail_tol")]
        tail_tol: f64,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    #[serde(rename = "su2")]
    Su2Coherent { j: Spin },
    #[serde(rename = "product")]
    ProductStates { dims: Vec<usize> },
}

impl ClassicalFamily {
    pub fn discrete(d: usize) -> Self {
        Self::OrthonormalDiscrete { d }
    }

    pub fn coherent(trunc: TruncationConfig) -> Self {
        Self::CanonicalCoherent { n_max: trunc.n_max, tail_tol: trunc.tail_tol, radius: default_radius() }
    }

    pub fn su2(j: Spin) -> Self {
        Self::Su2Coherent { j }
    }

    pub fn product(dims: Vec<usize>) -> Self {
        Self::ProductStates { dims }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::OrthonormalDiscrete { d } => *d,
            Self::CanonicalCoherent { n_max, .. } => n_max + 1,
            Self::Su2Coherent { j } => j.dim(),
            Self::ProductStates { dims } => dims.iter().product(),
        }
    }

    pub fn truncation(&self) -> Option<TruncationConfig> {
        match self {
            Self::CanonicalCoherent { n_max, tail_tol, .. } => Some(TruncationConfig { n_max: *n_max, tail_tol: *tail_tol }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::OrthonormalDiscrete { d } if *d == 0 => Err(Error::Invalid("discrete family needs d >= 1".into())),
            Self::CanonicalCoherent { radius, .. } => {
                self.truncation().expect("coherent").validate()?;
                if !(*radius > 0.0) {
                    return Err(Error::Invalid(format!("search radius must be positive, got {radius}")));
                }
                Ok(())
            }
            Self::ProductStates { dims } if dims.is_empty() || dims.contains(&0) => {
                Err(Error::Invalid(format!("product family needs positive dimensions, got {dims:?}")))
            }
            _ => Ok(()),
        }
    }

    fn check_operator(&self, m: &Operator) -> Result<()> {
        self.validate()?;
        m.require_hermitian()?;
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: m.dim() });
        }
        Ok(())
    }
}

/// Parameters selecting one member of a classical family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalParams {
    Index(usize),
    Alpha(C64),
    /// Spin coherent state at `z = tan(theta/2) e^{i phi}`.
    Angles { theta: f64, phi: f64 },
    Product(Vec<Vec<C64>>),
}

impl ClassicalParams {
    /// Stereographic coordinate of a spin coherent state; infinite at the upper pole.
    pub fn su2_z(&self) -> Option<C64> {
        match self {
            Self::Angles { theta, phi } => Some(C64::from_polar((theta / 2.0).tan(), *phi)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaMethod {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "grid+refine")]
    GridRefine,
    #[serde(rename = "see-saw")]
    SeeSaw,
}

impl std::fmt::Display for LambdaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::GridRefine => "grid+refine",
            Self::SeeSaw => "see-saw",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub value: f64,
    pub argmax: ClassicalParams,
    pub method: LambdaMethod,
    /// Heuristic bound on how far `value` may sit below the true maximum.
    pub certified_tolerance: f64,
}

/// Normalized member of the family.
pub fn classical_state(family: &ClassicalFamily, params: &ClassicalParams) -> Result<PureState> {
    family.validate()?;
    match (family, params) {
        (ClassicalFamily::OrthonormalDiscrete { d }, ClassicalParams::Index(i)) => PureState::basis(&[*d], &[*i]),
        (ClassicalFamily::CanonicalCoherent { .. }, ClassicalParams::Alpha(a)) => {
            Ok(crate::state::coherent_state(*a, &family.truncation().expect("coherent"))?.state)
        }
        (ClassicalFamily::Su2Coherent { j }, ClassicalParams::Angles { theta, phi }) => {
            Ok(su2_coherent_state_angles(*theta, *phi, *j))
        }
        (ClassicalFamily::ProductStates { dims }, ClassicalParams::Product(factors)) => {
            if factors.len() != dims.len() {
                return Err(Error::DimensionMismatch { expected: dims.len(), found: factors.len() });
            }
            let mut out: Option<PureState> = None;
            for (f, &d) in factors.iter().zip(dims) {
                let st = PureState::normalized(vec![d], CVector::from_column_slice(f))?;
                out = Some(match out {
                    None => st,
                    Some(acc) => acc.tensor(&st),
                });
            }
            Ok(out.expect("nonempty dims"))
        }
        _ => Err(Error::Invalid(format!("parameters {params:?} do not match family {family:?}"))),
    }
}

/// `<c|M|c>` for the family member selected by `params`.
///
/// Coherent states enter with their exact Poisson amplitudes on the retained
/// levels, so the value is exact for `M` extended by zero beyond `n_max`.
pub fn classical_expectation(family: &ClassicalFamily, m: &Operator, params: &ClassicalParams) -> Result<f64> {
    family.check_operator(m)?;
    match (family, params) {
        (ClassicalFamily::CanonicalCoherent { n_max, .. }, ClassicalParams::Alpha(a)) => {
            Ok(m.sandwich(&coherent_amplitudes(*a, *n_max))?.re)
        }
        _ => {
            let c = classical_state(family, params)?;
            Ok(m.sandwich(c.amplitudes())?.re)
        }
    }
}

/// `M` as `sum_k w_k |u_k><u_k|`, dropping negligible eigenvalues, for cheap repeated evaluation.
struct Spectral {
    terms: Vec<(f64, CVector)>,
    norm: f64,
}

impl Spectral {
    fn new(m: &Operator) -> Self {
        let eig = hermitian_eig_matrix(m.entries());
        let norm = eig.values.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
        let terms = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, w)| w.abs() > 1e-14 * norm)
            .map(|(k, &w)| (w, eig.vector(k)))
            .collect();
        Self { terms, norm }
    }

    fn eval(&self, v: &CVector) -> f64 {
        self.terms.iter().map(|(w, u)| w * u.dotc(v).norm_sqr()).sum()
    }
}

fn identity_multiple(m: &Operator) -> Option<f64> {
    let e = m.entries();
    let s = e[(0, 0)].re;
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) };
            if (e[(i, j)] - target).norm() > 1e-14 {
                return None;
            }
        }
    }
    Some(s)
}

/// Fock level `n` when `m = |n><n|`.
fn fock_projector_level(m: &Operator) -> Option<usize> {
    let e = m.entries();
    let n = m.dim();
    let mut level = None;
    for i in 0..n {
        for j in 0..n {
            let z = e[(i, j)];
            if i == j && (z - C64::new(1.0, 0.0)).norm() < 1e-14 {
                if level.is_some() {
                    return None;
                }
                level = Some(i);
            } else if z.norm() > 1e-14 {
                return None;
            }
        }
    }
    level
}

fn default_params(family: &ClassicalFamily) -> ClassicalParams {
    match family {
        ClassicalFamily::OrthonormalDiscrete { .. } => ClassicalParams::Index(0),
        ClassicalFamily::CanonicalCoherent { .. } => ClassicalParams::Alpha(C64::new(0.0, 0.0)),
        ClassicalFamily::Su2Coherent { .. } => ClassicalParams::Angles { theta: 0.0, phi: 0.0 },
        ClassicalFamily::ProductStates { dims } => ClassicalParams::Product(
            dims.iter()
                .map(|&d| (0..d).map(|k| C64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect(),
        ),
    }
}

/// Settings for the maximal-classical-expectation search.
#[derive(Clone, Debug)]
pub struct LambdaSolver {
    /// Grid spacing in the complex plane (coherent) or in angle (SU(2)).
    pub grid_step: f64,
    pub refine_tol: f64,
    /// Number of well-separated grid maxima that get refined.
    pub refine_starts: usize,
    pub seesaw_restarts: usize,
    pub seed: u64,
    /// Use closed forms when the observable admits one.
    pub analytic: bool,
}

impl Default for LambdaSolver {
    fn default() -> Self {
        Self { grid_step: 0.05, refine_tol: 1e-10, refine_starts: 8, seesaw_restarts: 20, seed: 0, analytic: true }
    }
}

impl LambdaSolver {
    /// Forces the generic numerical optimizer even when a closed form exists.
    pub fn numeric() -> Self {
        Self { analytic: false, ..Self::default() }
    }

    pub fn solve(&self, family: &ClassicalFamily, m: &Operator) -> Result<LambdaResult> {
        family.check_operator(m)?;
        if self.analytic {
            if let Some(r) = self.closed_form(family, m) {
                return Ok(r);
            }
        }
        match family {
            ClassicalFamily::OrthonormalDiscrete { .. } => Ok(max_diagonal(m)),
            ClassicalFamily::CanonicalCoherent { n_max, tail_tol, radius } => {
                self.coherent_search(m, TruncationConfig { n_max: *n_max, tail_tol: *tail_tol }, *radius)
            }
            ClassicalFamily::Su2Coherent { j } => Ok(self.su2_search(m, *j)),
            ClassicalFamily::ProductStates { dims } => {
                if dims.len() != 2 {
                    return Err(Error::Invalid(format!(
                        "product-state maximization supports two factors, got {}",
                        dims.len()
                    )));
                }
                seesaw_product_max_with(m, [dims[0], dims[1]], self.seesaw_restarts, self.seed)
            }
        }
    }

    fn closed_form(&self, family: &ClassicalFamily, m: &Operator) -> Option<LambdaResult> {
        if let Some(s) = identity_multiple(m) {
            return Some(LambdaResult {
                value: s,
                argmax: default_params(family),
                method: LambdaMethod::Analytic,
                certified_tolerance: 0.0,
            });
        }
        match family {
            ClassicalFamily::OrthonormalDiscrete { .. } => Some(max_diagonal(m)),
            ClassicalFamily::CanonicalCoherent { .. } => fock_projector_level(m).map(|n| LambdaResult {
                value: poisson_peak(n),
                argmax: ClassicalParams::Alpha(C64::new((n as f64).sqrt(), 0.0)),
                method: LambdaMethod::Analytic,
                certified_tolerance: 0.0,
            }),
            _ => None,
        }
    }

    fn coherent_search(&self, m: &Operator, trunc: TruncationConfig, radius: f64) -> Result<LambdaResult> {
        let lowrank = Spectral::new(m);
        let n_max = trunc.n_max;
        // refinement re-centres its bracket each sweep, so the disc is enforced here
        let objective = |p: [f64; 2]| {
            if p[0].hypot(p[1]) <= radius + 1e-12 {
                lowrank.eval(&coherent_amplitudes(C64::new(p[0], p[1]), n_max))
            } else {
                f64::NEG_INFINITY
            }
        };
        let step = self.grid_step;
        let half = (radius / step).floor() as i64;
        let rows: Vec<Vec<([f64; 2], f64)>> = (-half..=half)
            .into_par_iter()
            .map(|i| {
                (-half..=half)
                    .filter_map(|k| {
                        let p = [i as f64 * step, k as f64 * step];
                        let v = objective(p);
                        v.is_finite().then_some((p, v))
                    })
                    .collect()
            })
            .collect();
        let grid: Vec<([f64; 2], f64)> = rows.into_iter().flatten().collect();
        let best = self.refine_from_grid(&grid, &objective, step);
        let alpha = C64::new(best.0[0], best.0[1]);
        let tail = coherent_tail(alpha, n_max);
        if tail > trunc.tail_tol {
            return Err(Error::TruncationInsufficient { tail, tol: trunc.tail_tol });
        }
        Ok(LambdaResult {
            value: best.1,
            argmax: ClassicalParams::Alpha(alpha),
            method: LambdaMethod::GridRefine,
            certified_tolerance: 2.0 * lowrank.norm * step + lowrank.norm * trunc.tail_tol,
        })
    }

    fn su2_search(&self, m: &Operator, spin: Spin) -> LambdaResult {
        let lowrank = Spectral::new(m);
        let objective = |p: [f64; 2]| lowrank.eval(su2_coherent_state_angles(p[0], p[1], spin).amplitudes());
        let step = self.grid_step;
        let n_theta = (std::f64::consts::PI / step).round() as usize;
        let n_phi = (2.0 * std::f64::consts::PI / step).ceil() as usize;
        let rows: Vec<Vec<([f64; 2], f64)>> = (0..=n_theta)
            .into_par_iter()
            .map(|i| {
                let theta = std::f64::consts::PI * i as f64 / n_theta as f64;
                // a single azimuth suffices at the poles
                let count = if i == 0 || i == n_theta { 1 } else { n_phi };
                (0..count)
                    .map(|k| {
                        let p = [theta, 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64];
                        (p, objective(p))
                    })
                    .collect()
            })
            .collect();
        let grid: Vec<([f64; 2], f64)> = rows.into_iter().flatten().collect();
        let (p, value) = self.refine_from_grid(&grid, &objective, step);
        LambdaResult {
            value,
            argmax: ClassicalParams::Angles { theta: p[0], phi: p[1] },
            method: LambdaMethod::GridRefine,
            certified_tolerance: 2.0 * lowrank.norm * step,
        }
    }

    /// Refines the best few well-separated grid points and returns the overall best evaluation.
    fn refine_from_grid<F: Fn([f64; 2]) -> f64>(&self, grid: &[([f64; 2], f64)], f: &F, step: f64) -> ([f64; 2], f64) {
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| grid[b].1.total_cmp(&grid[a].1));
        let mut starts: Vec<[f64; 2]> = Vec::new();
        for &i in &order {
            if starts.len() >= self.refine_starts.max(1) {
                break;
            }
            let p = grid[i].0;
            if starts.iter().all(|s| (s[0] - p[0]).hypot(s[1] - p[1]) > 3.0 * step) {
                starts.push(p);
            }
        }
        let mut best = grid[order[0]];
        for s in starts {
            let r = coordinate_refine(f, s, step, self.refine_tol);
            if r.value > best.1 {
                best = (r.point, r.value);
            }
        }
        best
    }
}

fn max_diagonal(m: &Operator) -> LambdaResult {
    let e = m.entries();
    let (idx, value) = (0..m.dim())
        .map(|i| (i, e[(i, i)].re))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    LambdaResult { value, argmax: ClassicalParams::Index(idx), method: LambdaMethod::Analytic, certified_tolerance: 0.0 }
}

/// `lambda(M)` over the family with default solver settings.
pub fn lambda_max(family: &ClassicalFamily, m: &Operator) -> Result<LambdaResult> {
    LambdaSolver::default().solve(family, m)
}

/// Partial contraction `(I ⊗ <b|) M (I ⊗ |b>)` or `(<a| ⊗ I) M (|a> ⊗ I)`.
fn reduce(m: &CMatrix, d1: usize, d2: usize, fixed: &CVector, keep_first: bool) -> CMatrix {
    let (dk, df) = if keep_first { (d1, d2) } else { (d2, d1) };
    let idx = |k: usize, f: usize| if keep_first { k * d2 + f } else { f * d2 + k };
    let mut out = CMatrix::zeros(dk, dk);
    for k in 0..dk {
        for kp in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for f in 0..df {
                let cf = fixed[f].conj();
                if cf == C64::new(0.0, 0.0) {
                    continue;
                }
                for fp in 0..df {
                    acc += cf * m[(idx(k, f), idx(kp, fp))] * fixed[fp];
                }
            }
            out[(k, kp)] = acc;
        }
    }
    out
}

/// One see-saw run from a given product seed.
#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub value: f64,
    pub first: CVector,
    pub second: CVector,
    /// Objective after every half-step.
    pub history: Vec<f64>,
}

pub fn seesaw_from(m: &Operator, dims: [usize; 2], first: CVector, second: CVector) -> Result<SeesawRun> {
    m.require_hermitian()?;
    let [d1, d2] = dims;
    if d1 * d2 != m.dim() || first.len() != d1 || second.len() != d2 {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: d1 * d2 });
    }
    let e = m.entries();
    let mut a = first.normalize();
    let mut b = second.normalize();
    let mut value = m.sandwich(&a.kronecker(&b))?.re;
    let mut history = vec![value];
    for _ in 0..1000 {
        let prev = value;
        let top = hermitian_eig_matrix(&reduce(e, d1, d2, &b, true));
        a = top.vector(0);
        history.push(top.values[0]);
        let top = hermitian_eig_matrix(&reduce(e, d1, d2, &a, false));
        b = top.vector(0);
        value = top.values[0];
        history.push(value);
        if (value - prev).abs() < 1e-12 {
            break;
        }
    }
    Ok(SeesawRun { value, first: a, second: b, history })
}

/// Maximum of `<ab|M|ab>` over bipartite product states (default 20 restarts, seed 0).
pub fn seesaw_product_max(m: &Operator, dims: [usize; 2]) -> Result<LambdaResult> {
    seesaw_product_max_with(m, dims, 20, 0)
}

pub fn seesaw_product_max_with(m: &Operator, dims: [usize; 2], restarts: usize, seed: u64) -> Result<LambdaResult> {
    m.require_hermitian()?;
    if dims[0] * dims[1] != m.dim() {
        return Err(Error::Invalid(format!("dims {dims:?} do not factor an operator of dimension {}", m.dim())));
    }
    let mut rng = seeded(seed);
    let mut best: Option<SeesawRun> = None;
    for _ in 0..restarts.max(1) {
        let a = random_unit_vector(dims[0], &mut rng);
        let b = random_unit_vector(dims[1], &mut rng);
        let run = seesaw_from(m, dims, a, b)?;
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    Ok(LambdaResult {
        value: run.value,
        argmax: ClassicalParams::Product(vec![run.first.iter().copied().collect(), run.second.iter().copied().collect()]),
        method: LambdaMethod::SeeSaw,
        certified_tolerance: 1e-12,
    })
}

/// Largest coherent amplitude whose truncation tail stays within tolerance.
fn feasible_radius(trunc: &TruncationConfig, radius: f64) -> f64 {
    let ok = |r: f64| coherent_tail(C64::new(r, 0.0), trunc.n_max) <= trunc.tail_tol;
    if ok(radius) {
        return radius;
    }
    let (mut lo, mut hi) = (0.0, radius);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Random member of the family together with its parameters.
pub fn sample_classical<R: Rng + ?Sized>(family: &ClassicalFamily, rng: &mut R) -> Result<(ClassicalParams, PureState)> {
    family.validate()?;
    let params = match family {
        ClassicalFamily::OrthonormalDiscrete { d } => ClassicalParams::Index(rng.random_range(0..*d)),
        ClassicalFamily::CanonicalCoherent { radius, .. } => {
            let r_max = feasible_radius(&family.truncation().expect("coherent"), *radius);
            let r = r_max * rng.random::<f64>().sqrt();
            ClassicalParams::Alpha(C64::from_polar(r, 2.0 * std::f64::consts::PI * rng.random::<f64>()))
        }
        ClassicalFamily::Su2Coherent { .. } => ClassicalParams::Angles {
            theta: (1.0 - 2.0 * rng.random::<f64>()).acos(),
            phi: 2.0 * std::f64::consts::PI * rng.random::<f64>(),
        },
        ClassicalFamily::ProductStates { dims } => ClassicalParams::Product(
            dims.iter().map(|&d| random_unit_vector(d, rng).iter().copied().collect()).collect(),
        ),
    };
    let st = classical_state(family, &params)?;
    Ok((params, st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use crate::spin::SpinOperators;
    use crate::state::{fock_state, squeezed_vacuum};

    fn spin1() -> (ClassicalFamily, SpinOperators) {
        let s = Spin::from_j(1.0).unwrap();
        (ClassicalFamily::su2(s), SpinOperators::new(s))
    }

    #[test]
    fn discrete_expectation() {
        let (_, _, sz) = crate::linalg::pauli();
        let fam = ClassicalFamily::discrete(2);
        assert_eq!(classical_expectation(&fam, &sz, &ClassicalParams::Index(0)).unwrap(), 1.0);
    }

    #[test]
    fn su2_quadrupole_expectation_formula() {
        let (fam, ops) = spin1();
        let q = ops.quadrupole();
        for &(zr, zi) in &[(1.0, 0.0), (0.3, -0.7), (-2.0, 0.5), (0.0, 1.0)] {
            let z = C64::new(zr, zi);
            let p = ClassicalParams::Angles { theta: 2.0 * z.norm().atan(), phi: z.arg() };
            let v = classical_expectation(&fam, &q, &p).unwrap();
            let expected = 2.0 * (zr * zr - zi * zi) / (1.0 + zr * zr + zi * zi).powi(2);
            assert!((v - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_fock_one_expectation() {
        let t = TruncationConfig::default();
        let fam = ClassicalFamily::coherent(t);
        let m = fock_state(1, &t).unwrap().projector();
        let v = classical_expectation(&fam, &m, &ClassicalParams::Alpha(C64::new(1.0, 0.0))).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn family_mismatch_is_rejected() {
        let fam = ClassicalFamily::discrete(3);
        let (_, _, sz) = crate::linalg::pauli();
        assert!(matches!(lambda_max(&fam, &sz), Err(Error::DimensionMismatch { .. })));
        let nh = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(lambda_max(&ClassicalFamily::discrete(2), &nh), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fock_one_lambda() {
        let t = TruncationConfig::default();
        let fam = ClassicalFamily::coherent(t);
        let m = fock_state(1, &t).unwrap().projector();
        let exact = lambda_max(&fam, &m).unwrap();
        assert_eq!(exact.method, LambdaMethod::Analytic);
        assert!((exact.value - 0.367_879_441_171_442_3).abs() < 1e-15);
        let num = LambdaSolver::numeric().solve(&fam, &m).unwrap();
        assert_eq!(num.method, LambdaMethod::GridRefine);
        assert!((num.value - exact.value).abs() < 1e-6);
    }

    #[test]
    fn identity_gives_one_everywhere() {
        let t = TruncationConfig::with_n_max(20).unwrap();
        let families = [
            ClassicalFamily::discrete(3),
            ClassicalFamily::coherent(t),
            ClassicalFamily::su2(Spin::from_j(1.5).unwrap()),
            ClassicalFamily::product(vec![2, 3]),
        ];
        for fam in &families {
            let id = Operator::identity(fam.dim());
            assert_eq!(lambda_max(fam, &id).unwrap().value, 1.0);
            let num = LambdaSolver::numeric().solve(fam, &id).unwrap();
            assert!((num.value - 1.0).abs() < 1e-9, "{fam:?}: {}", num.value);
        }
    }

    #[test]
    fn spin_one_lambdas() {
        let (fam, ops) = spin1();
        let r = lambda_max(&fam, &ops.quadrupole()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8);
        let r = lambda_max(&fam, &ops.transverse_weight()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn spin_projection_lambda_is_j() {
        for two_j in [1u32, 2, 3, 4] {
            let s = Spin::from_two_j(two_j);
            let ops = SpinOperators::new(s);
            let jn = ops.along(0.7, 2.1);
            let r = lambda_max(&ClassicalFamily::su2(s), &jn).unwrap();
            assert!((r.value - s.j()).abs() < 1e-8);
        }
    }

    #[test]
    fn squeezed_projector_lambda() {
        let t = TruncationConfig::default();
        let fam = ClassicalFamily::coherent(t);
        let phi = squeezed_vacuum(0.5, &t).unwrap().state;
        let r = lambda_max(&fam, &phi.projector()).unwrap();
        assert!((r.value - 0.75).abs() < 1e-4);
    }

    #[test]
    fn seesaw_examples() {
        let bell = PureState::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = seesaw_product_max(&bell.projector(), [2, 2]).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        let zz = PureState::basis(&[2, 2], &[0, 0]).unwrap();
        assert!((seesaw_product_max(&zz.projector(), [2, 2]).unwrap().value - 1.0).abs() < 1e-12);
        assert!((seesaw_product_max(&Operator::identity(4), [2, 2]).unwrap().value - 1.0).abs() < 1e-12);
        assert!(seesaw_product_max(&Operator::identity(6), [2, 2]).is_err());
    }

    #[test]
    fn seesaw_history_is_monotone() {
        let mut rng = seeded(5);
        for _ in 0..10 {
            let m = random_hermitian(12, &mut rng);
            let run = seesaw_from(&m, [3, 4], random_unit_vector(3, &mut rng), random_unit_vector(4, &mut rng)).unwrap();
            assert!(run.history.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", run.history);
        }
    }

    #[test]
    fn numeric_search_dominates_samples() {
        let mut rng = seeded(21);
        let (fam, _) = spin1();
        let m = random_hermitian(3, &mut rng);
        let r = lambda_max(&fam, &m).unwrap();
        for _ in 0..200 {
            let (p, _) = sample_classical(&fam, &mut rng).unwrap();
            assert!(classical_expectation(&fam, &m, &p).unwrap() <= r.value + 1e-12);
        }
    }

    #[test]
    fn family_json() {
        let f: ClassicalFamily = serde_json::from_str(r#"{"family":"coherent","n_max":40,"radius":6.0}"#).unwrap();
        assert_eq!(f, ClassicalFamily::coherent(TruncationConfig::default()));
        let s = serde_json::to_string(&ClassicalFamily::su2(Spin::from_j(1.0).unwrap())).unwrap();
        assert_eq!(s, r#"{"family":"su2","j":1.0}"#);
        let p: ClassicalFamily = serde_json::from_str(r#"{"family":"product","dims":[2,2]}"#).unwrap();
        assert_eq!(p.dim(), 4);
    }
}
