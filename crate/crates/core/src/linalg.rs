//! Dense complex matrices and the Hermitian eigensolver used throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on `max|A - A^dagger|` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Square complex matrix with a Hermiticity flag.
///
/// The flag is set at construction whenever the entries are Hermitian to
/// [`HERMITIAN_TOL`]; observables must carry it.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    entries: CMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() == 0 {
            return Err(Error::Invalid("operator must have positive dimension".into()));
        }
        let hermitian = hermitian_deviation(&entries) <= HERMITIAN_TOL;
        Ok(Self { entries, hermitian })
    }

    /// Builds an observable, rejecting non-Hermitian input.
    pub fn hermitian(entries: CMatrix) -> Result<Self> {
        let op = Self::new(entries)?;
        op.require_hermitian()?;
        Ok(op)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = C64::new(x, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim), hermitian: true }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { entries: CMatrix::from_diagonal(&v), hermitian: true }
    }

    /// Rank-one projector `|v><v|` (the vector is used as given).
    pub fn projector(v: &CVector) -> Self {
        let entries = v * v.adjoint();
        Self { entries, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation: hermitian_deviation(&self.entries) })
        }
    }

    pub fn dagger(&self) -> Self {
        Self { entries: self.entries.adjoint(), hermitian: self.hermitian }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { entries: &self.entries * C64::new(s, 0.0), hermitian: self.hermitian }
    }

    /// `self + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let n = self.dim();
        Self {
            entries: &self.entries + CMatrix::identity(n, n) * C64::new(c, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Self::new(&self.entries * &other.entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Self::new(&self.entries - &other.entries)
    }

    /// `<v|A|v>` for an arbitrary (not necessarily normalized) vector.
    pub fn sandwich(&self, v: &CVector) -> Result<C64> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(v.dotc(&(&self.entries * v)))
    }

    /// Spectral norm; for Hermitian operators this is the largest |eigenvalue|.
    pub fn norm(&self) -> f64 {
        if self.hermitian {
            let eig = SymmetricEigen::new(self.entries.clone());
            eig.eigenvalues.iter().fold(0.0_f64, |a, &w| a.max(w.abs()))
        } else {
            let s = self.entries.clone().singular_values();
            s.iter().fold(0.0, |a: f64, &x| a.max(x))
        }
    }

    /// Max-norm distance from the identity of `A A^dagger`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let p = &self.entries * self.entries.adjoint() - CMatrix::identity(n, n);
        p.iter().fold(0.0, |a: f64, z| a.max(z.norm()))
    }
}

/// Eigenvalues in descending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = CVector::from_iterator(self.values.len(), self.values.iter().map(|&w| C64::new(w, 0.0)));
        &self.vectors * CMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(m: &Operator) -> Result<Eigen> {
    m.require_hermitian()?;
    Ok(hermitian_eig_matrix(m.entries()))
}

/// Eigendecomposition of a matrix the caller knows to be Hermitian.
pub(crate) fn hermitian_eig_matrix(m: &CMatrix) -> Eigen {
    // symmetrize so rounding noise in the lower triangle cannot leak in
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigen { values, vectors }
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: number of singular values above `tol`.
pub(crate) fn rank(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > tol).count()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Pauli matrices `(sigma_x, sigma_y, sigma_z)`.
pub fn pauli() -> (Operator, Operator, Operator) {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let sx = CMatrix::from_row_slice(2, 2, &[o, l, l, o]);
    let sy = CMatrix::from_row_slice(2, 2, &[o, -i, i, o]);
    let sz = CMatrix::from_row_slice(2, 2, &[l, o, o, -l]);
    (
        Operator { entries: sx, hermitian: true },
        Operator { entries: sy, hermitian: true },
        Operator { entries: sz, hermitian: true },
    )
}
