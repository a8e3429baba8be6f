//! Validated density matrices and POVM effects.

use serde::{Deserialize, Serialize};

use super::matrix::{hermiticity_defect, operator_norm, validate_hermitian, ComplexMatrix};
use super::spectral::eigen_unchecked;
use super::{HERMITIAN_TOL, POSITIVE_TOL};
use crate::error::{Error, Result};
use crate::C64;

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !validate_hermitian(m, HERMITIAN_TOL) {
        return Err(Error::NotHermitian { deviation: hermiticity_defect(m) });
    }
    Ok(())
}

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_hermitian(&m)?;
        let tr = m.trace().re;
        if (tr - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        let min = eigen_unchecked(&m).values[0];
        if min < -POSITIVE_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(DensityMatrix(m))
    }

    /// Normalizes a positive semidefinite matrix by its trace.
    pub fn from_unnormalized(m: &ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if tr.abs() <= f64::EPSILON {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        Self::new(m.scale_real(1.0 / tr))
    }

    /// `|ψ><ψ|` for the normalized direction of `ket`.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(ket))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag(probs))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        DensityMatrix(m)
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(rho: DensityMatrix) -> Self {
        rho.0
    }
}

/// A positive semidefinite effect. Unnormalized multiples (eigenvalues above
/// one) are allowed and flagged through [`PovmElement::is_normalized`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct PovmElement {
    matrix: ComplexMatrix,
    normalized: bool,
}

impl PovmElement {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_positivity_tolerance(m, POSITIVE_TOL)
    }

    /// Like [`PovmElement::new`] but accepting eigenvalues down to `-tol_pos`,
    /// for effects estimated from noisy data.
    pub fn with_positivity_tolerance(m: ComplexMatrix, tol_pos: f64) -> Result<Self> {
        check_hermitian(&m)?;
        if operator_norm(&m) == 0.0 {
            return Err(Error::ZeroEffect);
        }
        let eig = eigen_unchecked(&m);
        let min = eig.values[0];
        if min < -tol_pos {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let max = *eig.values.last().unwrap();
        if max <= 0.0 {
            return Err(Error::ZeroEffect);
        }
        Ok(PovmElement { matrix: m, normalized: max <= 1.0 + POSITIVE_TOL })
    }

    /// Rank-one projector effect `|φ><φ|`.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(ket))
    }

    pub fn identity(dim: usize) -> Self {
        PovmElement { matrix: ComplexMatrix::identity(dim), normalized: true }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag(values))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// True iff every eigenvalue is at most one.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Positive multiple `c · E`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {c} must be positive")));
        }
        Self::new(self.matrix.scale_real(c))
    }
}

impl TryFrom<ComplexMatrix> for PovmElement {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        PovmElement::new(m)
    }
}

impl From<PovmElement> for ComplexMatrix {
    fn from(e: PovmElement) -> Self {
        e.matrix
    }
}

impl From<DensityMatrix> for PovmElement {
    /// A state reinterpreted as an effect.
    fn from(rho: DensityMatrix) -> Self {
        PovmElement { matrix: rho.0, normalized: true }
    }
}

/// A complete family of effects, `Σ_l E_l = I`.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("POVM needs at least one element".into()))?;
        let d = first.dim();
        let mut sum = ComplexMatrix::zeros(d);
        for e in &elements {
            e.matrix().check_dim(d)?;
            sum += e.matrix();
        }
        let deviation = operator_norm(&(&sum - &ComplexMatrix::identity(d)));
        if deviation > HERMITIAN_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Povm { elements })
    }

    /// Two-outcome POVM `{E, I - E}`.
    pub fn binary(e: &PovmElement) -> Result<Self> {
        let d = e.dim();
        let complement = PovmElement::new(&ComplexMatrix::identity(d) - e.matrix())?;
        Self::new(vec![e.clone(), complement])
    }

    /// Projective measurement in the eigenbasis of an observable.
    pub fn from_projectors(projectors: &[ComplexMatrix]) -> Result<Self> {
        Self::new(projectors.iter().cloned().map(PovmElement::new).collect::<Result<_>>()?)
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
