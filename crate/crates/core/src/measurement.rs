//! Conventional and strong pre/post-selected measurements.
//!
//! Strong PPS probabilities come from the generalized ABL rule. When the
//! measured observable commutes with the preparation or with the
//! post-selection effect, the same probabilities follow from the connection
//! state as `Tr(Π_i w) = Tr(Π_i w')`; the connection-state routes here check
//! that condition before answering.

use crate::connection::{ConnectionState, POST_SELECTION_EPS};
use crate::error::{Error, Result};
use crate::qmcore::{commutes, operator_norm, psd_sqrt, ComplexMatrix, DensityMatrix, Observable, PovmElement};

/// Commutation tolerance for the equivalence gate.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Born rule, `Tr(ρE)`.
pub fn born_probability(rho: &DensityMatrix, effect: &PovmElement) -> Result<f64> {
    effect.matrix().check_dim(rho.dim())?;
    if !effect.is_normalized() {
        return Err(Error::UnnormalizedEffect { max_eigenvalue: crate::qmcore::max_eigenvalue(effect.matrix()) });
    }
    let p = rho.matrix().trace_product(effect.matrix());
    if p.im.abs() > 1e-12 {
        return Err(Error::ComplexTrace { imag: p.im });
    }
    Ok(p.re.clamp(0.0, 1.0))
}

/// `Tr(Aρ)`.
pub fn expectation(a: &Observable, rho: &DensityMatrix) -> Result<f64> {
    a.matrix().check_dim(rho.dim())?;
    Ok(a.matrix().trace_product(rho.matrix()).re)
}

/// Per-eigenvalue Born probabilities `Tr(ρ Π_i)`.
pub fn born_distribution(a: &Observable, rho: &DensityMatrix) -> Result<Vec<f64>> {
    a.matrix().check_dim(rho.dim())?;
    Ok(a.projectors().iter().map(|p| rho.matrix().trace_product(p).re).collect())
}

fn check_projector(p: &ComplexMatrix) -> Result<()> {
    let deviation = operator_norm(&(&(p * p) - p)).max(operator_norm(&(p - &p.adjoint())));
    if deviation > 1e-10 {
        return Err(Error::NotProjector { deviation });
    }
    Ok(())
}

/// Lüders update `Π ρ Π / Tr(ρΠ)` after a projective outcome.
pub fn projective_posterior(rho: &DensityMatrix, projector: &ComplexMatrix) -> Result<DensityMatrix> {
    projector.check_dim(rho.dim())?;
    check_projector(projector)?;
    let kept = projector * rho.matrix() * projector;
    let p = kept.trace().re;
    if p < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: p });
    }
    Ok(DensityMatrix::from_trusted(kept.scale_real(1.0 / p).hermitian_part()))
}

/// `√E ρ √E / Tr(ρE)`, the posterior state of a minimally disturbing measurement.
pub fn minimally_disturbing_posterior(rho: &DensityMatrix, effect: &PovmElement) -> Result<DensityMatrix> {
    effect.matrix().check_dim(rho.dim())?;
    if !effect.is_normalized() {
        return Err(Error::UnnormalizedEffect { max_eigenvalue: crate::qmcore::max_eigenvalue(effect.matrix()) });
    }
    let root = psd_sqrt(effect.matrix())?;
    let p = rho.matrix().trace_product(effect.matrix()).re;
    if p < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: p });
    }
    let post = (&root * rho.matrix() * &root).scale_real(1.0 / p);
    Ok(DensityMatrix::from_trusted(post.hermitian_part()))
}

/// Generalized ABL rule:
/// `P_{i|E} = Tr(E Π_i ρ Π_i) / Σ_j Tr(E Π_j ρ Π_j)`.
pub fn abl_probabilities(rho: &DensityMatrix, a: &Observable, effect: &PovmElement) -> Result<Vec<f64>> {
    a.matrix().check_dim(rho.dim())?;
    effect.matrix().check_dim(rho.dim())?;
    let weights: Vec<f64> = a
        .projectors()
        .iter()
        .map(|p| effect.matrix().trace_product(&(p * rho.matrix() * p)).re.max(0.0))
        .collect();
    let total: f64 = weights.iter().sum();
    if total < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: total });
    }
    Ok(weights.into_iter().map(|x| x / total).collect())
}

/// Checks `[A, ρ] = 0` or `[A, E] = 0` for explicit factors.
pub fn commuting_condition(a: &Observable, rho: &ComplexMatrix, effect: &ComplexMatrix) -> Result<bool> {
    Ok(commutes(a.matrix(), rho, COMMUTATION_TOL)? || commutes(a.matrix(), effect, COMMUTATION_TOL)?)
}

fn gate(a: &Observable, w: &ConnectionState) -> Result<()> {
    let f = w.factors().ok_or(Error::MissingFactors)?;
    gate_with(a, &f.rho, &f.effect)
}

fn gate_with(a: &Observable, rho: &ComplexMatrix, effect: &ComplexMatrix) -> Result<()> {
    if commuting_condition(a, rho, effect)? {
        Ok(())
    } else {
        Err(Error::CommutationRequired)
    }
}

fn projector_weights(a: &Observable, w: &ConnectionState) -> Result<Vec<f64>> {
    a.matrix().check_dim(w.dim())?;
    Ok(a.projectors().iter().map(|p| p.trace_product(w.hermitian_part()).re).collect())
}

/// Strong PPS probabilities from the connection state, `Tr(Π_i w')`.
///
/// Only valid when the observable commutes with `ρ` or `E`; the stored
/// factors of `w` are checked and [`Error::CommutationRequired`] returned
/// otherwise.
pub fn strong_pps_via_connection(a: &Observable, w: &ConnectionState) -> Result<Vec<f64>> {
    gate(a, w)?;
    projector_weights(a, w)
}

/// [`strong_pps_via_connection`] for a connection state without stored
/// factors; the caller supplies `ρ` and `E` for the gate.
pub fn strong_pps_via_connection_with(
    a: &Observable,
    w: &ConnectionState,
    rho: &ComplexMatrix,
    effect: &ComplexMatrix,
) -> Result<Vec<f64>> {
    gate_with(a, rho, effect)?;
    projector_weights(a, w)
}

/// Projector weak values `Tr(Π_i w)` with no gate. They are complex in
/// general; use the gated routes for probabilities.
pub fn projector_weak_values(a: &Observable, w: &ConnectionState) -> Result<Vec<crate::C64>> {
    a.matrix().check_dim(w.dim())?;
    Ok(a.projectors().iter().map(|p| p.trace_product(w.matrix())).collect())
}

/// Spectral form of the weak value, `Σ_i Tr(Π_i w) a_i`, under the same gate.
pub fn weak_value_spectral(a: &Observable, w: &ConnectionState) -> Result<f64> {
    let probs = strong_pps_via_connection(a, w)?;
    Ok(probs.iter().zip(a.eigenvalues()).map(|(p, a)| p * a).sum())
}

/// `(A²)_w - (A_w)²` evaluated with the Hermitian part `w'`.
pub fn connection_variance(a: &Observable, w: &ConnectionState) -> Result<f64> {
    a.matrix().check_dim(w.dim())?;
    let wh = w.hermitian_part();
    let mean = a.matrix().trace_product(wh).re;
    let square = (a.matrix() * a.matrix()).trace_product(wh).re;
    Ok(square - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{connection_state, retrodictive_state, weak_value};
    use crate::qmcore::{kets, pauli};
    use crate::C64;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    fn z() -> Observable {
        Observable::new(pauli::z()).unwrap()
    }

    #[test]
    fn born_rule() {
        let p0 = DensityMatrix::pure(&kets::zero()).unwrap();
        assert!((born_probability(&p0, &PovmElement::pure(&kets::zero()).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((born_probability(&p0, &PovmElement::pure(&kets::plus()).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        let e = PovmElement::diagonal(&[0.9, 0.3, 0.6]).unwrap();
        let p = born_probability(&DensityMatrix::maximally_mixed(3), &e).unwrap();
        assert!((p - 1.8 / 3.0).abs() < 1e-15);
        let big = PovmElement::diagonal(&[2.0, 0.0]).unwrap();
        assert!(matches!(born_probability(&p0, &big), Err(Error::UnnormalizedEffect { .. })));
    }

    #[test]
    fn expectations() {
        assert!(expectation(&z(), &DensityMatrix::maximally_mixed(2)).unwrap().abs() < 1e-15);
        assert!((expectation(&z(), &DensityMatrix::diagonal(&[0.7, 0.3]).unwrap()).unwrap() - 0.4).abs() < 1e-15);
        let one = Observable::new(ComplexMatrix::identity(2)).unwrap();
        assert!((expectation(&one, &DensityMatrix::diagonal(&[0.7, 0.3]).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projective_updates() {
        let p0 = ComplexMatrix::diag(&[1.0, 0.0]);
        let post = projective_posterior(&DensityMatrix::maximally_mixed(2), &p0).unwrap();
        assert!(close(post.matrix(), &p0, 1e-15));
        let post = projective_posterior(&DensityMatrix::pure(&kets::plus()).unwrap(), &p0).unwrap();
        assert!(close(post.matrix(), &p0, 1e-15));
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let post = projective_posterior(&rho, &ComplexMatrix::diag(&[1.0, 1.0, 0.0])).unwrap();
        assert!(close(post.matrix(), &ComplexMatrix::diag(&[0.625, 0.375, 0.0]), 1e-15));
        let orth = projective_posterior(&DensityMatrix::pure(&kets::one()).unwrap(), &p0);
        assert!(matches!(orth, Err(Error::DegeneratePostSelection { .. })));
        assert!(matches!(
            projective_posterior(&rho, &ComplexMatrix::diag(&[0.5, 0.0, 0.0])),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn minimally_disturbing_updates() {
        let rho = DensityMatrix::pure(&kets::plus()).unwrap();
        let proj = PovmElement::pure(&kets::zero()).unwrap();
        let a = minimally_disturbing_posterior(&rho, &proj).unwrap();
        let b = projective_posterior(&rho, proj.matrix()).unwrap();
        assert!(close(a.matrix(), b.matrix(), 1e-14));

        let e = PovmElement::pure(&kets::plus_i()).unwrap();
        let post = minimally_disturbing_posterior(&DensityMatrix::maximally_mixed(2), &e).unwrap();
        assert!(close(post.matrix(), retrodictive_state(&e).unwrap().matrix(), 1e-14));

        let post = minimally_disturbing_posterior(
            &DensityMatrix::diagonal(&[0.7, 0.3]).unwrap(),
            &PovmElement::diagonal(&[0.9, 0.1]).unwrap(),
        )
        .unwrap();
        assert!(close(post.matrix(), &ComplexMatrix::diag(&[0.63 / 0.66, 0.03 / 0.66]), 1e-15));
    }

    #[test]
    fn abl_rule() {
        let plus = PovmElement::pure(&kets::plus()).unwrap();
        let p = abl_probabilities(&DensityMatrix::pure(&kets::zero()).unwrap(), &z(), &plus).unwrap();
        // eigenvalues ascending: index 0 is a = -1
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);

        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let p = abl_probabilities(&rho, &z(), &plus).unwrap();
        assert!((p[1] - 0.7).abs() < 1e-15 && (p[0] - 0.3).abs() < 1e-15);

        let p = abl_probabilities(&rho, &z(), &PovmElement::identity(2)).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[1] - 0.7).abs() < 1e-15);

        let killed = abl_probabilities(
            &DensityMatrix::pure(&kets::zero()).unwrap(),
            &z(),
            &PovmElement::pure(&kets::one()).unwrap(),
        );
        assert!(matches!(killed, Err(Error::DegeneratePostSelection { .. })));
    }

    #[test]
    fn connection_route_matches_abl_when_commuting() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let plus = PovmElement::pure(&kets::plus()).unwrap();
        let w = connection_state(&rho, &plus).unwrap();
        let p = strong_pps_via_connection(&z(), &w).unwrap();
        assert!((p[1] - 0.7).abs() < 1e-15 && (p[0] - 0.3).abs() < 1e-15);
        let full: Vec<C64> = projector_weak_values(&z(), &w).unwrap();
        assert!((full[1] - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert!((weak_value_spectral(&z(), &w).unwrap() - 0.4).abs() < 1e-15);

        let w = connection_state(&DensityMatrix::maximally_mixed(2), &PovmElement::diagonal(&[0.9, 0.1]).unwrap()).unwrap();
        let p = strong_pps_via_connection(&z(), &w).unwrap();
        assert!((p[1] - 0.9).abs() < 1e-15 && (p[0] - 0.1).abs() < 1e-15);

        let one = Observable::new(ComplexMatrix::identity(2)).unwrap();
        assert_eq!(strong_pps_via_connection(&one, &w).unwrap().len(), 1);
        assert!((weak_value_spectral(&one, &w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gate_rejects_non_commuting() {
        let rho = DensityMatrix::pure(&kets::plus()).unwrap();
        let e = PovmElement::pure(&kets::plus_i()).unwrap();
        let w = connection_state(&rho, &e).unwrap();
        assert_eq!(strong_pps_via_connection(&z(), &w).unwrap_err(), Error::CommutationRequired);
        assert_eq!(weak_value_spectral(&z(), &w).unwrap_err(), Error::CommutationRequired);

        let bare = ConnectionState::from_matrix(w.matrix().clone(), None).unwrap();
        assert_eq!(strong_pps_via_connection(&z(), &bare).unwrap_err(), Error::MissingFactors);
        let ok = strong_pps_via_connection_with(&z(), &bare, &ComplexMatrix::diag(&[0.5, 0.5]), e.matrix());
        assert!(ok.is_ok());
    }

    #[test]
    fn spectral_form_matches_trace_form() {
        let i2 = ComplexMatrix::identity(2);
        let rho = DensityMatrix::new((&i2 + &pauli::x().scale_real(0.8)).scale_real(0.5)).unwrap();
        let e = PovmElement::new((&i2 + &pauli::y().scale_real(0.8)).scale_real(0.5)).unwrap();
        let w = connection_state(&rho, &e).unwrap();
        let x = Observable::new(pauli::x()).unwrap();
        assert!((weak_value_spectral(&x, &w).unwrap() - 0.8).abs() < 1e-15);
        assert!((weak_value(&x, &w).unwrap().re - 0.8).abs() < 1e-15);
        let var = connection_variance(&x, &w).unwrap();
        assert!((var - (1.0 - 0.64)).abs() < 1e-15);
    }
}
