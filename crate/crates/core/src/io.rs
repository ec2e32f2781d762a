//! JSON files for states, operators, witnesses and recipes.
//!
//! Complex numbers are written as `[re, im]`; on input a bare real number or
//! a literal such as `"0.5-2i"` is accepted as well.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bases::{ClassicalFamily, LambdaMethod};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Operator};
use crate::multipartite::{LocalOperation, Recipe, Step};
use crate::state::{DensityMatrix, PureState, State};
use crate::witness::Witness;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Pair([f64; 2]),
    Real(f64),
    Literal(#[serde(with = "literal")] C64),
}

mod literal {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&z.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_complex(&s).map_err(serde::de::Error::custom)
    }
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson::Pair([z.re, z.im])
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        match z {
            ComplexJson::Pair([re, im]) => C64::new(re, im),
            ComplexJson::Real(re) => C64::new(re, 0.0),
            ComplexJson::Literal(z) => z,
        }
    }
}

/// Parses `"a+bi"`, `"-2i"`, `"1.5"` and similar.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.replace('j', "i")
        .parse::<C64>()
        .map_err(|_| Error::Invalid(format!("cannot parse complex number {s:?}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pure,
    Mixed,
    Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Data {
    Vector(Vec<ComplexJson>),
    Matrix(Vec<Vec<ComplexJson>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayFile {
    pub dims: Vec<usize>,
    pub kind: Kind,
    pub data: Data,
}

fn vector_data(v: &CVector) -> Data {
    Data::Vector(v.iter().map(|&z| z.into()).collect())
}

fn matrix_data(m: &CMatrix) -> Data {
    Data::Matrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect())
}

fn to_matrix(rows: &[Vec<ComplexJson>]) -> Result<CMatrix> {
    let n = rows.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        for (j, &z) in row.iter().enumerate() {
            m[(i, j)] = z.into();
        }
    }
    Ok(m)
}

impl ArrayFile {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => Self { dims: p.dims().to_vec(), kind: Kind::Pure, data: vector_data(p.amplitudes()) },
            State::Mixed(r) => Self { dims: r.dims().to_vec(), kind: Kind::Mixed, data: matrix_data(r.entries()) },
        }
    }

    pub fn from_operator(op: &Operator, dims: Vec<usize>) -> Self {
        Self { dims, kind: Kind::Operator, data: matrix_data(op.entries()) }
    }

    pub fn into_state(self) -> Result<State> {
        match (self.kind, self.data) {
            (Kind::Pure, Data::Vector(v)) => {
                let amps: Vec<C64> = v.into_iter().map(C64::from).collect();
                Ok(State::Pure(PureState::from_slice(self.dims, &amps)?))
            }
            (Kind::Mixed, Data::Matrix(rows)) => Ok(State::Mixed(DensityMatrix::new(self.dims, to_matrix(&rows)?)?)),
            (Kind::Operator, _) => Err(Error::Invalid("expected a state, found an operator".into())),
            (kind, _) => Err(Error::Invalid(format!("data layout does not match kind {kind:?}"))),
        }
    }

    pub fn into_operator(self) -> Result<(Vec<usize>, Operator)> {
        match (self.kind, self.data) {
            (Kind::Operator, Data::Matrix(rows)) => {
                let m = Operator::new(to_matrix(&rows)?)?;
                let d: usize = self.dims.iter().product();
                if d != m.dim() {
                    return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
                }
                Ok((self.dims, m))
            }
            (Kind::Operator, _) => Err(Error::Invalid("operator data must be a matrix".into())),
            _ => Err(Error::Invalid("expected an operator".into())),
        }
    }
}

pub fn state_to_json(state: &State) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ArrayFile::from_state(state))?)
}

pub fn parse_state(json: &str) -> Result<State> {
    serde_json::from_str::<ArrayFile>(json)?.into_state()
}

pub fn operator_to_json(op: &Operator, dims: Vec<usize>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ArrayFile::from_operator(op, dims))?)
}

pub fn parse_operator(json: &str) -> Result<(Vec<usize>, Operator)> {
    serde_json::from_str::<ArrayFile>(json)?.into_operator()
}

/// Operator file that must hold a Hermitian matrix.
pub fn parse_observable(json: &str) -> Result<(Vec<usize>, Operator)> {
    let (dims, op) = parse_operator(json)?;
    op.require_hermitian()?;
    Ok((dims, op))
}

pub fn parse_family(json: &str) -> Result<ClassicalFamily> {
    let f: ClassicalFamily = serde_json::from_str(json)?;
    f.validate()?;
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub observable: ArrayFile,
    pub family: ClassicalFamily,
    pub lambda: f64,
    pub method: LambdaMethod,
    pub certified_tolerance: f64,
}

impl WitnessFile {
    pub fn new(w: &Witness, dims: Vec<usize>) -> Self {
        Self {
            observable: ArrayFile::from_operator(&w.m, dims),
            family: w.family.clone(),
            lambda: w.lambda,
            method: w.method,
            certified_tolerance: w.certified_tolerance,
        }
    }

    pub fn into_witness(self) -> Result<Witness> {
        let (_, m) = self.observable.into_operator()?;
        m.require_hermitian()?;
        self.family.validate()?;
        if m.dim() != self.family.dim() {
            return Err(Error::DimensionMismatch { expected: self.family.dim(), found: m.dim() });
        }
        Ok(Witness {
            m,
            lambda: self.lambda,
            family: self.family,
            method: self.method,
            certified_tolerance: self.certified_tolerance,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFile {
    /// 1-based party index.
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexJson>>>,
    /// `(block size, eigenvalue)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan: Option<Vec<(usize, ComplexJson)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepFile {
    /// 1-based `[control, target]`.
    #[serde(rename = "cd")]
    Cd([usize; 2]),
    #[serde(rename = "local")]
    Local(LocalFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeFile {
    pub dims: Vec<usize>,
    pub initial: Vec<ComplexJson>,
    pub steps: Vec<StepFile>,
}

fn zero_based(k: usize) -> Result<usize> {
    k.checked_sub(1).ok_or_else(|| Error::Invalid("party indices in recipe files start at 1".into()))
}

impl RecipeFile {
    pub fn new(r: &Recipe) -> Self {
        let steps = r
            .steps
            .iter()
            .map(|s| match s {
                Step::Cd { control, target } => StepFile::Cd([control + 1, target + 1]),
                Step::Local(op) => StepFile::Local(LocalFile {
                    target: op.target + 1,
                    matrix: Some(
                        (0..op.dim()).map(|i| (0..op.dim()).map(|j| op.matrix()[(i, j)].into()).collect()).collect(),
                    ),
                    jordan: None,
                }),
            })
            .collect();
        Self {
            dims: r.dims().to_vec(),
            initial: r.initial.amplitudes().iter().map(|&z| z.into()).collect(),
            steps,
        }
    }

    pub fn into_recipe(self) -> Result<Recipe> {
        let initial: Vec<C64> = self.initial.into_iter().map(C64::from).collect();
        let mut r = Recipe::new(self.dims, &initial)?;
        for s in self.steps {
            r = match s {
                StepFile::Cd([c, t]) => r.cd(zero_based(c)?, zero_based(t)?),
                StepFile::Local(l) => {
                    let target = zero_based(l.target)?;
                    let op = match (l.matrix, l.jordan) {
                        (Some(m), None) => LocalOperation::new(target, to_matrix(&m)?)?,
                        (None, Some(blocks)) => {
                            let blocks: Vec<(usize, C64)> = blocks.into_iter().map(|(s, z)| (s, z.into())).collect();
                            LocalOperation::jordan(target, &blocks)?
                        }
                        _ => return Err(Error::Invalid("local step needs exactly one of matrix or jordan".into())),
                    };
                    r.local(op)
                }
            };
        }
        Ok(r)
    }
}

pub fn parse_recipe(json: &str) -> Result<Recipe> {
    serde_json::from_str::<RecipeFile>(json)?.into_recipe()
}
