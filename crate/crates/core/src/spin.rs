//! Angular-momentum operators in the Dicke basis `|j, m>`, ordered `m = -j, ..., j`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Operator};

/// Spin quantum number stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub fn from_two_j(two_j: u32) -> Self {
        Self { two_j }
    }

    /// Accepts nonnegative integers and half-integers.
    pub fn from_j(j: f64) -> Result<Self> {
        let t = 2.0 * j;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-12 || t > 1e6 {
            return Err(Error::Invalid(format!("spin must be a nonnegative half-integer, got {j}")));
        }
        Ok(Self { two_j: t.round() as u32 })
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Spin::from_j(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.j()
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
}

impl SpinOperators {
    pub fn new(spin: Spin) -> Self {
        let d = spin.dim();
        let j = spin.j();
        let mut raise = CMatrix::zeros(d, d);
        for k in 0..d.saturating_sub(1) {
            let m = k as f64 - j;
            raise[(k + 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let lower = raise.adjoint();
        let jx = (&raise + &lower) * C64::new(0.5, 0.0);
        let jy = (&raise - &lower) * C64::new(0.0, -0.5);
        let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| C64::new(k as f64 - j, 0.0)));
        Self {
            jx: Operator::hermitian(jx).expect("Jx Hermitian"),
            jy: Operator::hermitian(jy).expect("Jy Hermitian"),
            jz: Operator::hermitian(jz).expect("Jz Hermitian"),
        }
    }

    /// `J . n` for a unit direction given by polar/azimuthal angles.
    pub fn along(&self, theta: f64, phi: f64) -> Operator {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let m = self.jx.entries() * C64::new(st * cp, 0.0)
            + self.jy.entries() * C64::new(st * sp, 0.0)
            + self.jz.entries() * C64::new(ct, 0.0);
        Operator::hermitian(m).expect("real combination of Hermitian operators")
    }

    /// Quadrupole `(Jx)^2 - (Jy)^2`.
    pub fn quadrupole(&self) -> Operator {
        let x2 = self.jx.entries() * self.jx.entries();
        let y2 = self.jy.entries() * self.jy.entries();
        Operator::hermitian(x2 - y2).expect("Hermitian")
    }

    /// `I - (Jz)^2`.
    pub fn transverse_weight(&self) -> Operator {
        let d = self.jz.dim();
        let z2 = self.jz.entries() * self.jz.entries();
        Operator::hermitian(CMatrix::identity(d, d) - z2).expect("Hermitian")
    }
}
