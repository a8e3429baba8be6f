//! Linear tomography of connection states and detectors from weak values.
//!
//! Expanding `w = Σ_i α_i B_i` in an operator basis turns the weak values of
//! a probe set into the linear system `Σ_i a_ji α_i = (A_j)_w` with
//! `a_ji = Tr(A_j B_i)`, solved here through an SVD pseudo-inverse.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::connection::{connection_state, weak_value, ConnectionState};
use crate::dynamics::csv_err;
use crate::error::{Error, Result};
use crate::measurement::abl_probabilities;
use crate::qmcore::{min_eigenvalue, pauli, ComplexMatrix, DensityMatrix, Observable, PovmElement};
use crate::C64;

/// Singular values at or below this make a design matrix unusable.
pub const SINGULAR_CUTOFF: f64 = 1e-10;
/// Trace deviation above which a reconstruction is renormalized and flagged.
pub const TRACE_TOL: f64 = 1e-10;

fn smallest_singular_value(m: DMatrix<C64>) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// A list of `d²` linearly independent operators.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    operators: Vec<ComplexMatrix>,
    label: String,
}

impl OperatorBasis {
    pub fn new(operators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let d = operators.first().map(|b| b.dim()).ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        if operators.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "a basis in dimension {d} needs {} operators, got {}",
                d * d,
                operators.len()
            )));
        }
        for b in &operators {
            b.check_dim(d)?;
        }
        let n = operators.len();
        let gram = DMatrix::from_fn(n, n, |i, j| operators[i].adjoint().trace_product(&operators[j]));
        let smallest = smallest_singular_value(gram);
        if smallest <= SINGULAR_CUTOFF {
            return Err(Error::SingularDesign { smallest });
        }
        Ok(OperatorBasis { operators, label: label.into() })
    }

    /// `{I, σ₁, σ₂, σ₃} / √2`.
    pub fn pauli() -> Self {
        let ops = (0..4).map(|k| pauli::by_index(k).scale_real(std::f64::consts::FRAC_1_SQRT_2)).collect();
        OperatorBasis { operators: ops, label: "pauli".into() }
    }

    /// Identity plus generalized Gell-Mann matrices, all with `Tr(B_i B_j) = δ_ij`.
    pub fn gell_mann(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedDimension(d));
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let unit = |j: usize, k: usize, z: C64| ComplexMatrix::from_fn(d, |a, b| if a == j && b == k { z } else { C64::new(0.0, 0.0) });
        let mut ops = vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())];
        for j in 0..d {
            for k in j + 1..d {
                ops.push(&unit(j, k, C64::new(r, 0.0)) + &unit(k, j, C64::new(r, 0.0)));
                ops.push(&unit(j, k, C64::new(0.0, -r)) + &unit(k, j, C64::new(0.0, r)));
            }
        }
        for l in 1..d {
            let c = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let diag: Vec<f64> = (0..d).map(|m| if m < l { c } else if m == l { -(l as f64) * c } else { 0.0 }).collect();
            ops.push(ComplexMatrix::diag(&diag));
        }
        OperatorBasis::new(ops, "gell-mann")
    }

    /// The Pauli set for qubits, Gell-Mann otherwise.
    pub fn standard(d: usize) -> Result<Self> {
        if d == 2 {
            Ok(Self::pauli())
        } else {
            Self::gell_mann(d)
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// The basis elements as observables (all must be Hermitian).
    pub fn as_probes(&self) -> Result<Vec<Observable>> {
        self.operators.iter().map(|b| Observable::new(b.clone())).collect()
    }
}

/// `a_ji = Tr(A_j B_i)` with its pseudo-inverse.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    a: DMatrix<C64>,
    pinv: DMatrix<C64>,
    smallest: f64,
}

impl DesignMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.smallest
    }
}

pub fn design_matrix(probes: &[Observable], basis: &OperatorBasis) -> Result<DesignMatrix> {
    if probes.len() < basis.len() {
        return Err(Error::InvalidArgument(format!("need at least {} probes, got {}", basis.len(), probes.len())));
    }
    for p in probes {
        p.matrix().check_dim(basis.dim())?;
    }
    let a = DMatrix::from_fn(probes.len(), basis.len(), |j, i| probes[j].matrix().trace_product(&basis.operators[i]));
    let svd = a.clone().svd(true, true);
    let smallest = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= SINGULAR_CUTOFF {
        return Err(Error::SingularDesign { smallest });
    }
    let pinv = svd.pseudo_inverse(SINGULAR_CUTOFF).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(DesignMatrix { a, pinv, smallest })
}

/// Output of [`reconstruct_connection`].
#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub w: ConnectionState,
    /// `‖a α - data‖₂`; zero for a square design.
    pub residual_norm: f64,
    /// `|Tr w - 1|` before renormalization.
    pub trace_deviation: f64,
    /// Set when the raw trace missed 1 by more than [`TRACE_TOL`].
    pub renormalized: bool,
}

/// Solves for `α` and returns `w = Σ α_i B_i`.
pub fn reconstruct_connection(weak_values: &[C64], probes: &[Observable], basis: &OperatorBasis) -> Result<Reconstruction> {
    if weak_values.len() != probes.len() {
        return Err(Error::DimensionMismatch { expected: probes.len(), found: weak_values.len() });
    }
    let design = design_matrix(probes, basis)?;
    let data = DVector::from_column_slice(weak_values);
    let alpha = &design.pinv * &data;
    let residual_norm = (&design.a * &alpha - &data).norm();
    let mut w = ComplexMatrix::zeros(basis.dim());
    for (c, b) in alpha.iter().zip(&basis.operators) {
        w += &b.scale(*c);
    }
    let tr = w.trace();
    let trace_deviation = (tr - C64::new(1.0, 0.0)).norm();
    let renormalized = trace_deviation > TRACE_TOL;
    if renormalized {
        if tr.norm() <= f64::EPSILON {
            return Err(Error::NotUnitTrace { trace: tr.re });
        }
        w = w.scale(C64::new(1.0, 0.0) / tr);
    }
    Ok(Reconstruction { w: ConnectionState::from_matrix(w, None)?, residual_norm, trace_deviation, renormalized })
}

/// `(A_j)_w` plus independent Gaussian noise of standard deviation `sigma` on
/// each quadrature, reproducible for a given seed.
pub fn simulate_weak_value_data(w: &ConnectionState, probes: &[Observable], sigma: f64, seed: u64) -> Result<Vec<C64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise sigma {sigma} must be non-negative")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    probes
        .iter()
        .map(|a| {
            let exact = weak_value(a, w)?;
            Ok(exact + C64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        })
        .collect()
}

/// Probe weak values of a completely random preparation obtained from strong
/// PPS statistics: `Σ_i a_i P(a_i | E)` with ABL probabilities for `ρ = I/d`.
///
/// Valid because `I/d` commutes with every probe.
pub fn weak_values_from_strong_pps(effect: &PovmElement, probes: &[Observable]) -> Result<Vec<C64>> {
    let mixed = DensityMatrix::maximally_mixed(effect.dim());
    probes
        .iter()
        .map(|a| {
            let probs = abl_probabilities(&mixed, a, effect)?;
            Ok(C64::new(probs.iter().zip(a.eigenvalues()).map(|(p, v)| p * v).sum(), 0.0))
        })
        .collect()
}

/// Exact probe weak values for a detector under `ρ = I/d`.
pub fn detector_weak_values(effect: &PovmElement, probes: &[Observable]) -> Result<Vec<C64>> {
    let w = connection_state(&DensityMatrix::maximally_mixed(effect.dim()), effect)?;
    probes.iter().map(|a| weak_value(a, &w)).collect()
}

/// Detector tomography: reconstruct `ρ_retr` from weak values measured with a
/// completely random preparation, then rescale by `Tr E = P d`.
///
/// The Hermitian part of the reconstruction is used. Eigenvalues below
/// `-max(10 σ, 1e-10)` are reported as [`Error::InconsistentData`].
pub fn detector_tomography(
    weak_values: &[C64],
    probes: &[Observable],
    basis: &OperatorBasis,
    post_selection_prob: f64,
    noise_sigma: f64,
) -> Result<PovmElement> {
    if !(post_selection_prob > 0.0 && post_selection_prob <= 1.0) {
        return Err(Error::InvalidArgument(format!("post-selection probability {post_selection_prob} not in (0, 1]")));
    }
    let rec = reconstruct_connection(weak_values, probes, basis)?;
    let d = basis.dim() as f64;
    let e = rec.w.hermitian_part().scale_real(post_selection_prob * d);
    let tol = (10.0 * noise_sigma).max(1e-10);
    let lowest = min_eigenvalue(&e);
    if lowest < -tol {
        return Err(Error::InconsistentData { min_eigenvalue: lowest });
    }
    PovmElement::with_positivity_tolerance(e, tol)
}

#[derive(Serialize, Deserialize)]
struct DataRow {
    probe_index: usize,
    re_weak_value: f64,
    im_weak_value: f64,
}

/// CSV with columns `probe_index, re_weak_value, im_weak_value`.
pub fn write_weak_value_csv<W: Write>(out: W, values: &[C64]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(["probe_index", "re_weak_value", "im_weak_value"]).map_err(csv_err)?;
    for (k, z) in values.iter().enumerate() {
        wtr.write_record([k.to_string(), format!("{:.16e}", z.re), format!("{:.16e}", z.im)]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a file written by [`write_weak_value_csv`]; rows must be in probe order.
pub fn read_weak_value_csv<R: Read>(input: R) -> Result<Vec<C64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<DataRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if row.probe_index != k {
            return Err(Error::Parse(format!("row {k} has probe_index {}", row.probe_index)));
        }
        out.push(C64::new(row.re_weak_value, row.im_weak_value));
    }
    Ok(out)
}
