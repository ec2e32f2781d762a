//! Witnesses `W = lambda I - M`, detection reports and robustness thresholds.

use serde::{Deserialize, Serialize};

use crate::bases::{classical_expectation, sample_classical, ClassicalFamily, LambdaMethod, LambdaSolver};
use crate::error::{Error, Result};
use crate::linalg::{pauli, Operator};
use crate::random::seeded;
use crate::state::{poisson_peak, spats_photocount, DensityMatrix, QuantumState};

/// Expectations below `-DETECTION_TOL` count as detection.
pub const DETECTION_TOL: f64 = 1e-9;
/// Slack allowed on sampled classical states when a witness is built.
pub const SAMPLE_TOL: f64 = 1e-8;
pub const WITNESS_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub m: Operator,
    pub lambda: f64,
    pub family: ClassicalFamily,
    pub method: LambdaMethod,
    pub certified_tolerance: f64,
}

impl Witness {
    /// The operator `lambda I - M`.
    pub fn operator(&self) -> Operator {
        self.m.scale(-1.0).shift(self.lambda)
    }

    /// `min <c|W|c>` over `samples` random members of the family.
    pub fn sampled_minimum(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = seeded(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let (p, _) = sample_classical(&self.family, &mut rng)?;
            let v = self.lambda - classical_expectation(&self.family, &self.m, &p)?;
            worst = worst.min(v);
        }
        Ok(worst)
    }
}

pub fn build_witness(m: &Operator, family: &ClassicalFamily) -> Result<Witness> {
    build_witness_with(m, family, &LambdaSolver::default())
}

/// Builds the witness and re-checks it on sampled classical states.
pub fn build_witness_with(m: &Operator, family: &ClassicalFamily, solver: &LambdaSolver) -> Result<Witness> {
    let r = solver.solve(family, m)?;
    let w = Witness {
        m: m.clone(),
        lambda: r.value,
        family: family.clone(),
        method: r.method,
        certified_tolerance: r.certified_tolerance,
    };
    let worst = w.sampled_minimum(WITNESS_SAMPLES, solver.seed)?;
    if worst < -SAMPLE_TOL {
        return Err(Error::WitnessViolated { value: worst, tol: SAMPLE_TOL });
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonclassical,
    Undetected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// `Tr(W rho)`.
    pub expectation: f64,
    pub verdict: Verdict,
    /// Signed distance of the expectation from the detection cutoff; negative when detected.
    pub margin: f64,
    pub lambda: f64,
    pub method: LambdaMethod,
}

pub fn witness_expectation<S: QuantumState + ?Sized>(w: &Witness, state: &S) -> Result<DetectionReport> {
    if state.dim() != w.m.dim() {
        return Err(Error::DimensionMismatch { expected: w.m.dim(), found: state.dim() });
    }
    let expectation = w.lambda - state.expectation(&w.m)?;
    let verdict = if expectation < -DETECTION_TOL { Verdict::Nonclassical } else { Verdict::Undetected };
    Ok(DetectionReport { expectation, verdict, margin: expectation, lambda: w.lambda, method: w.method })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Largest white-noise weight `p` in `p I/d + (1-p)|psi><psi|` still detected by the `|psi><psi|` witness.
pub fn white_noise_threshold(lambda: f64, d: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if d < 2 {
        return Err(Error::Invalid(format!("dimension must be at least 2, got {d}")));
    }
    let d = d as f64;
    Ok(d * (1.0 - lambda) / (d - 1.0))
}

/// Same for admixture of a state orthogonal to `|psi>`.
pub fn orthogonal_mix_threshold(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 - lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochReport {
    pub r: [f64; 3],
    pub verdict: Verdict,
}

/// For a qubit with the computational basis as classical set, only the z axis is classical.
pub fn qubit_bloch_classicality(rho: &DensityMatrix) -> Result<BlochReport> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.dim() });
    }
    let (sx, sy, sz) = pauli();
    let r = [rho.expectation(&sx)?, rho.expectation(&sy)?, rho.expectation(&sz)?];
    let verdict = if r[0].abs().max(r[1].abs()) > DETECTION_TOL { Verdict::Nonclassical } else { Verdict::Undetected };
    Ok(BlochReport { r, verdict })
}

/// `lambda(|n><n|) - p_n`: negative when the photocount statistics of a
/// photon-added thermal state reveal nonclassicality through the Fock-`n` witness.
pub fn spats_margin(nbar: f64, n: usize) -> Result<f64> {
    Ok(poisson_peak(n) - spats_photocount(nbar, n)?)
}

/// Interval of mean photon numbers detected by the Fock-`n` witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatsWindow {
    pub n: usize,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
}

fn bisect<F: Fn(f64) -> bool>(inside: F, mut a: f64, mut b: f64) -> f64 {
    // `inside(a)` holds, `inside(b)` does not
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if inside(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `None` when no mean photon number gives `p_n > lambda`.
pub fn spats_detection_window(n: usize) -> Result<Option<SpatsWindow>> {
    if n == 0 {
        return Ok(None);
    }
    let lambda = poisson_peak(n);
    let detected = |x: f64| spats_photocount(x, n).map(|p| p > lambda).unwrap_or(false);
    // p_n peaks at nbar = (n-1)/2; for n = 1 the supremum is approached as nbar -> 0
    let peak = if n == 1 { f64::MIN_POSITIVE } else { (n as f64 - 1.0) / 2.0 };
    let peak_value = if n == 1 { 1.0 } else { spats_photocount(peak, n)? };
    if peak_value <= lambda {
        return Ok(None);
    }
    let lower = if n == 1 { 0.0 } else { bisect(|x| detected(x), peak, 0.0) };
    let mut far = peak.max(1.0);
    while detected(far) {
        far *= 2.0;
    }
    let upper = bisect(|x| detected(x), peak, far);
    Ok(Some(SpatsWindow { n, lambda, lower, upper }))
}
