//! Connection states `w = ρE / Tr(ρE)` and their analysis.
//!
//! A connection state plays the role of a density matrix for a pre- and
//! post-selected ensemble: weak values are `A_w = Tr(A w)`. It has unit trace
//! but is generally neither Hermitian nor positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmcore::{min_eigenvalue, operator_norm, ComplexMatrix, DensityMatrix, Observable, Povm, PovmElement};
use crate::C64;

/// Cutoff on `Tr(ρE)` below which the connection state is considered divergent.
pub const POST_SELECTION_EPS: f64 = 1e-12;
/// Tolerance used by [`classify`] when no explicit one is given.
pub const CLASSIFY_TOL: f64 = 1e-10;
/// Outcome probabilities at or below this are treated as exact zeros.
const EXACT_ZERO_PROB: f64 = 16.0 * f64::EPSILON;

/// The `(ρ, E)` pair a connection state was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Factors {
    pub rho: ComplexMatrix,
    pub effect: ComplexMatrix,
}

/// `w = w' + i w''` with cached Hermitian and anti-Hermitian parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionState {
    w: ComplexMatrix,
    w_herm: ComplexMatrix,
    w_antiherm: ComplexMatrix,
    post_selection_prob: Option<f64>,
    normalized: bool,
    factors: Option<Factors>,
}

impl ConnectionState {
    /// Wraps a unit-trace matrix that did not come from an explicit `(ρ, E)`
    /// pair, e.g. a reconstruction or an integrated trajectory point.
    pub fn from_matrix(w: ComplexMatrix, post_selection_prob: Option<f64>) -> Result<Self> {
        let tr = w.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::NotUnitTrace { trace: tr.re });
        }
        Ok(ConnectionState {
            w_herm: w.hermitian_part(),
            w_antiherm: w.antihermitian_part(),
            w,
            post_selection_prob,
            normalized: true,
            factors: None,
        })
    }

    /// `ρE / Tr(ρE)` for arbitrary (possibly unnormalized) positive factors.
    pub(crate) fn from_factors(rho: &ComplexMatrix, effect: &ComplexMatrix, normalized: bool) -> Result<Self> {
        effect.check_dim(rho.dim())?;
        let product = rho * effect;
        let tr = product.trace();
        if tr.im.abs() > 1e-12 * tr.re.abs().max(1.0) {
            return Err(Error::ComplexTrace { imag: tr.im });
        }
        let p = tr.re;
        if p < POST_SELECTION_EPS {
            return Err(Error::DegeneratePostSelection { probability: p });
        }
        let w = product.scale_real(1.0 / p);
        Ok(ConnectionState {
            w_herm: w.hermitian_part(),
            w_antiherm: w.antihermitian_part(),
            w,
            post_selection_prob: Some(p),
            normalized,
            factors: Some(Factors { rho: rho.clone(), effect: effect.clone() }),
        })
    }

    /// The full (generally non-Hermitian) matrix `w`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    /// `w' = (w + w†)/2`.
    pub fn hermitian_part(&self) -> &ComplexMatrix {
        &self.w_herm
    }

    /// `w'' = (w - w†)/2i`.
    pub fn antihermitian_part(&self) -> &ComplexMatrix {
        &self.w_antiherm
    }

    /// `Tr(ρE)` when known. This is a probability only when both factors
    /// are normalized; see [`ConnectionState::is_normalized`].
    pub fn post_selection_prob(&self) -> Option<f64> {
        self.post_selection_prob
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn factors(&self) -> Option<&Factors> {
        self.factors.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub(crate) fn with_factors(mut self, factors: Factors) -> Self {
        self.factors = Some(factors);
        self
    }

    /// `w†`, the connection state of the ensemble with `ρ` and `E` exchanged.
    pub fn adjoint(&self) -> ConnectionState {
        ConnectionState {
            w: self.w.adjoint(),
            w_herm: self.w_herm.clone(),
            w_antiherm: self.w_antiherm.scale_real(-1.0),
            post_selection_prob: self.post_selection_prob,
            normalized: self.normalized,
            factors: self
                .factors
                .as_ref()
                .map(|f| Factors { rho: f.effect.clone(), effect: f.rho.clone() }),
        }
    }
}

/// Builds the connection state of the ensemble prepared in `rho` and
/// post-selected on `effect`.
pub fn connection_state(rho: &DensityMatrix, effect: &PovmElement) -> Result<ConnectionState> {
    ConnectionState::from_factors(rho.matrix(), effect.matrix(), effect.is_normalized())
}

/// `A_w = Tr(A w)`.
pub fn weak_value(a: &Observable, w: &ConnectionState) -> Result<C64> {
    a.matrix().check_dim(w.dim())?;
    Ok(a.matrix().trace_product(w.matrix()))
}

/// `(Tr(A w'), Tr(A w''))`, the real and imaginary parts of the weak value
/// computed from the two Hermitian parts separately.
pub fn weak_value_parts(a: &Observable, w: &ConnectionState) -> Result<(f64, f64)> {
    a.matrix().check_dim(w.dim())?;
    Ok((
        a.matrix().trace_product(w.hermitian_part()).re,
        a.matrix().trace_product(w.antihermitian_part()).re,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Usualness {
    /// Hermitian and positive: every weak value is real and inside the spectrum.
    Usual,
    /// Some observable has a complex or out-of-range weak value.
    Unusual,
}

/// Classification label with the measured margins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub kind: Usualness,
    /// `‖w''‖`.
    pub antiherm_norm: f64,
    /// Smallest eigenvalue of `w'`.
    pub herm_min_eigenvalue: f64,
}

impl Classification {
    pub fn is_usual(&self) -> bool {
        self.kind == Usualness::Usual
    }
}

/// Usual iff `‖w''‖ ≤ tol` and `λ_min(w') ≥ -tol`.
pub fn classify(w: &ConnectionState, tol: f64) -> Classification {
    let antiherm_norm = operator_norm(w.antihermitian_part());
    let herm_min_eigenvalue = min_eigenvalue(w.hermitian_part());
    let kind = if antiherm_norm <= tol && herm_min_eigenvalue >= -tol {
        Usualness::Usual
    } else {
        Usualness::Unusual
    };
    Classification { kind, antiherm_norm, herm_min_eigenvalue }
}

/// Operator norms of `w`, `w'` and `w''` and whether `‖w'‖ + ‖w''‖ ≥ ‖w‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormBound {
    pub c_herm: f64,
    pub c_antiherm: f64,
    pub norm: f64,
    pub holds: bool,
}

pub fn norm_bound_check(w: &ConnectionState) -> NormBound {
    let c_herm = operator_norm(w.hermitian_part());
    let c_antiherm = operator_norm(w.antihermitian_part());
    let norm = operator_norm(w.matrix());
    NormBound { c_herm, c_antiherm, norm, holds: c_herm + c_antiherm >= norm - 1e-12 }
}

/// One outcome of a posterior family; `state` is `None` for outcomes that
/// never occur (`P_l = 0`).
#[derive(Clone, Debug)]
pub struct PosteriorOutcome {
    pub probability: f64,
    pub state: Option<ConnectionState>,
}

impl PosteriorOutcome {
    pub fn is_excluded(&self) -> bool {
        self.state.is_none()
    }
}

/// Outcome probabilities and connection states for every element of a POVM.
#[derive(Clone, Debug)]
pub struct PosteriorFamily {
    outcomes: Vec<PosteriorOutcome>,
    dim: usize,
}

impl PosteriorFamily {
    pub fn outcomes(&self) -> &[PosteriorOutcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    fn weighted_sum(&self, part: impl Fn(&ConnectionState) -> &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for o in &self.outcomes {
            if let Some(w) = &o.state {
                acc += &part(w).scale_real(o.probability);
            }
        }
        acc
    }

    /// `Σ_l P_l w_l`, which equals `ρ`.
    pub fn reconstruct_state(&self) -> ComplexMatrix {
        self.weighted_sum(ConnectionState::matrix)
    }

    /// `Σ_l P_l w'_l`, which equals `ρ`.
    pub fn hermitian_sum(&self) -> ComplexMatrix {
        self.weighted_sum(ConnectionState::hermitian_part)
    }

    /// `Σ_l P_l w''_l`, which vanishes.
    pub fn antihermitian_sum(&self) -> ComplexMatrix {
        self.weighted_sum(ConnectionState::antihermitian_part)
    }

    /// `Σ_l P_l A_{w,l}`, which equals `Tr(Aρ)`.
    pub fn average_weak_value(&self, a: &Observable) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for o in &self.outcomes {
            if let Some(w) = &o.state {
                acc += weak_value(a, w)? * o.probability;
            }
        }
        Ok(acc)
    }
}

pub fn posterior_family(rho: &DensityMatrix, povm: &Povm) -> Result<PosteriorFamily> {
    povm.elements()[0].matrix().check_dim(rho.dim())?;
    let outcomes = povm
        .elements()
        .iter()
        .map(|e| {
            let p = rho.matrix().trace_product(e.matrix()).re;
            if p.abs() <= EXACT_ZERO_PROB {
                Ok(PosteriorOutcome { probability: 0.0, state: None })
            } else {
                let w = connection_state(rho, e)?;
                Ok(PosteriorOutcome { probability: w.post_selection_prob().unwrap_or(p), state: Some(w) })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorFamily { outcomes, dim: rho.dim() })
}

/// `E / Tr E`, the connection state for a completely random preparation.
pub fn retrodictive_state(effect: &PovmElement) -> Result<ConnectionState> {
    let d = effect.dim();
    let tr = effect.matrix().trace().re;
    if tr < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: tr / d as f64 });
    }
    let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let w = ConnectionState::from_matrix(effect.matrix().scale_real(1.0 / tr), Some(tr / d as f64))?;
    let mut w = w.with_factors(Factors { rho: mixed, effect: effect.matrix().clone() });
    w.normalized = effect.is_normalized();
    Ok(w)
}

/// `ρ_pred ρ_retr / Tr(ρ_pred ρ_retr)`, the symmetric prediction/retrodiction form.
pub fn connection_from_pred_retr(rho_pred: &DensityMatrix, rho_retr: &DensityMatrix) -> Result<ConnectionState> {
    ConnectionState::from_factors(rho_pred.matrix(), rho_retr.matrix(), true)
}

/// Prior `p_i` and likelihood table `e_{i,l}` of a classical measurement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalEnsemble {
    priors: Vec<f64>,
    likelihoods: Vec<Vec<f64>>,
}

impl ClassicalEnsemble {
    pub fn new(priors: Vec<f64>, likelihoods: Vec<Vec<f64>>) -> Result<Self> {
        if priors.is_empty() || priors.len() != likelihoods.len() {
            return Err(Error::InvalidEnsemble("need one likelihood row per prior".into()));
        }
        if priors.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidEnsemble("priors must lie in [0, 1]".into()));
        }
        if (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble("priors must sum to one".into()));
        }
        let cols = likelihoods[0].len();
        if likelihoods.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidEnsemble("ragged likelihood table".into()));
        }
        if likelihoods.iter().flatten().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidEnsemble("likelihoods must lie in [0, 1]".into()));
        }
        Ok(ClassicalEnsemble { priors, likelihoods })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn outcomes(&self) -> usize {
        self.likelihoods[0].len()
    }

    /// Bayes: `P_l = Σ_i p_i e_{i,l}` and `P_{i|l} = p_i e_{i,l} / P_l`.
    pub fn posterior(&self, outcome: usize) -> Result<(f64, Vec<f64>)> {
        if outcome >= self.outcomes() {
            return Err(Error::InvalidArgument(format!("outcome {outcome} out of range")));
        }
        let joint: Vec<f64> = self.priors.iter().zip(&self.likelihoods).map(|(p, row)| p * row[outcome]).collect();
        let total: f64 = joint.iter().sum();
        if total < POST_SELECTION_EPS {
            return Err(Error::ZeroProbabilityOutcome { outcome });
        }
        Ok((total, joint.into_iter().map(|j| j / total).collect()))
    }
}

pub fn classical_posterior(ens: &ClassicalEnsemble, outcome: usize) -> Result<(f64, Vec<f64>)> {
    ens.posterior(outcome)
}

/// JSON wire form of a connection state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectionStateJson {
    pub w: ComplexMatrix,
    pub w_herm: ComplexMatrix,
    pub w_antiherm: ComplexMatrix,
    pub post_selection_prob: Option<f64>,
}

impl From<&ConnectionState> for ConnectionStateJson {
    fn from(w: &ConnectionState) -> Self {
        ConnectionStateJson {
            w: w.matrix().clone(),
            w_herm: w.hermitian_part().clone(),
            w_antiherm: w.antihermitian_part().clone(),
            post_selection_prob: w.post_selection_prob(),
        }
    }
}

impl TryFrom<ConnectionStateJson> for ConnectionState {
    type Error = Error;

    fn try_from(j: ConnectionStateJson) -> Result<Self> {
        let w = ConnectionState::from_matrix(j.w, j.post_selection_prob)?;
        let recombined = w.hermitian_part() - &j.w_herm;
        let recombined_i = w.antihermitian_part() - &j.w_antiherm;
        let tol = 1e-10 * operator_norm(w.matrix()).max(1.0);
        if operator_norm(&recombined) > tol || operator_norm(&recombined_i) > tol {
            return Err(Error::Parse("w_herm/w_antiherm inconsistent with w".into()));
        }
        Ok(w)
    }
}

impl Serialize for ConnectionState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConnectionStateJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConnectionState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ConnectionStateJson::deserialize(d)?;
        ConnectionState::try_from(j).map_err(serde::de::Error::custom)
    }
}
