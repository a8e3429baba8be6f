//! Finite-dimensional von Neumann meter.
//!
//! The system couples to the meter through `U_c = exp(-i g A ⊗ F)` and the
//! pointer observable `R` is read afterwards. The default meter is a grid of
//! `dim_M` points on `[-L, L]`: `R` is the position and `F` the spectral
//! (DFT) momentum on that grid, so `exp(-i g a F)` translates the pointer by
//! `g a`. The initial meter state is a truncated Gaussian.

use serde::{Deserialize, Serialize};

use crate::connection::{ConnectionState, POST_SELECTION_EPS};
use crate::error::{Error, Result};
use crate::measurement::commuting_condition;
use crate::qmcore::{
    ensure_unitary, hermitian_eigen, operator_norm, ComplexMatrix, DensityMatrix, HermitianEigen, Observable,
    PovmElement,
};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Gaussian,
}

/// Meter configuration, JSON `{"dim_M", "L", "width", "g", "profile"}`.
///
/// `momentum` is an optional carrier momentum `p0` of the initial Gaussian
/// (`ψ(x) ∝ exp(-x²/4σ² + i p0 x)`); it defaults to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeterConfig {
    #[serde(rename = "dim_M")]
    pub dim_m: usize,
    #[serde(rename = "L")]
    pub half_length: f64,
    pub width: f64,
    pub g: f64,
    pub profile: Profile,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub momentum: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl MeterConfig {
    /// 32-point grid on `[-8, 8]` with a width-1 Gaussian and coupling `g`.
    pub fn gaussian(g: f64) -> Self {
        MeterConfig { dim_m: 32, half_length: 8.0, width: 1.0, g, profile: Profile::Gaussian, momentum: 0.0 }
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        MeterConfig { g, ..self.clone() }
    }

    pub fn build(&self) -> Result<MeterModel> {
        MeterModel::from_config(self)
    }
}

/// Meter state `ρ_M`, coupling generator `F`, pointer `R` and strength `g`.
#[derive(Clone, Debug)]
pub struct MeterModel {
    rho_m: DensityMatrix,
    coupling: Observable,
    pointer: Observable,
    g: f64,
    coupling_eigen: HermitianEigen,
}

impl MeterModel {
    pub fn new(rho_m: DensityMatrix, coupling: Observable, pointer: Observable, g: f64) -> Result<Self> {
        let d = rho_m.dim();
        coupling.matrix().check_dim(d)?;
        pointer.matrix().check_dim(d)?;
        if !g.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling strength {g} is not finite")));
        }
        let coupling_eigen = hermitian_eigen(coupling.matrix())?;
        Ok(MeterModel { rho_m, coupling, pointer, g, coupling_eigen })
    }

    pub fn from_config(cfg: &MeterConfig) -> Result<Self> {
        let n = cfg.dim_m;
        if n < 2 {
            return Err(Error::InvalidArgument("meter needs at least two grid points".into()));
        }
        if !(cfg.half_length > 0.0 && cfg.width > 0.0) {
            return Err(Error::InvalidArgument("meter L and width must be positive".into()));
        }
        let dx = 2.0 * cfg.half_length / n as f64;
        let xs: Vec<f64> = (0..n).map(|k| -cfg.half_length + (k as f64 + 0.5) * dx).collect();

        // Momenta m·Δp for m in (-n/2, n/2); the unpaired Nyquist mode of an
        // even grid gets momentum zero so the spectrum stays symmetric.
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        let modes: Vec<(f64, f64)> = (0..n)
            .map(|m| {
                let k = m as i64 - (n as i64 - 1) / 2;
                let phase_rate = k as f64 * dp;
                let nyquist = n % 2 == 0 && k == n as i64 / 2;
                (phase_rate, if nyquist { 0.0 } else { phase_rate })
            })
            .collect();
        let momentum = ComplexMatrix::from_fn(n, |j, k| {
            let mut acc = C64::new(0.0, 0.0);
            for &(rate, p) in &modes {
                acc += C64::from_polar(p, rate * (xs[j] - xs[k]));
            }
            acc / n as f64
        });

        let amp: Vec<C64> = xs
            .iter()
            .map(|&x| C64::from_polar((-x * x / (4.0 * cfg.width * cfg.width)).exp(), cfg.momentum * x))
            .collect();
        let rho_m = DensityMatrix::pure(&amp)?;
        let pointer = Observable::new(ComplexMatrix::diag(&xs))?;
        let coupling = Observable::new(momentum.hermitian_part())?;
        MeterModel::new(rho_m, coupling, pointer, cfg.g)
    }

    pub fn dim(&self) -> usize {
        self.rho_m.dim()
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho_m
    }

    pub fn coupling(&self) -> &Observable {
        &self.coupling
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn with_coupling(&self, g: f64) -> MeterModel {
        MeterModel { g, ..self.clone() }
    }

    /// `exp(-i g a F)`, the meter block for system eigenvalue `a`.
    pub fn block(&self, a: f64) -> ComplexMatrix {
        let g = self.g;
        self.coupling_eigen.map(|f| C64::from_polar(1.0, -g * a * f))
    }

    /// Undisturbed pointer reading `Tr(R ρ_M)`.
    pub fn initial_pointer(&self) -> f64 {
        self.pointer.matrix().trace_product(self.rho_m.matrix()).re
    }

    /// `R̄_{f,i} = Tr[R U_c(a) ρ_M U_c†(a)]`, the pointer reading for a
    /// definite eigenvalue `a`.
    pub fn pointer_for_eigenvalue(&self, a: f64) -> f64 {
        let v = self.block(a);
        let moved = &v * self.rho_m.matrix() * &v.adjoint();
        self.pointer.matrix().trace_product(&moved).re
    }
}

/// `U_c = Σ_i Π_i ⊗ exp(-i g a_i F)` on system ⊗ meter.
pub fn coupling_unitary(a: &Observable, meter: &MeterModel) -> Result<ComplexMatrix> {
    let blocks: Vec<ComplexMatrix> = a.eigenvalues().iter().map(|&ai| meter.block(ai)).collect();
    if meter.g != 0.0 {
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if operator_norm(&(&blocks[i] - &blocks[j])) <= 1e-10 {
                    return Err(Error::AliasedCoupling { a: a.eigenvalues()[i], b: a.eigenvalues()[j] });
                }
            }
        }
    }
    let dim = a.dim() * meter.dim();
    let mut u = ComplexMatrix::zeros(dim);
    for (p, b) in a.projectors().iter().zip(&blocks) {
        u += &p.kron(b);
    }
    Ok(u)
}

/// `(Tr[(L ⊗ R) σ], Tr[(L ⊗ I) σ])` with `σ = U_c (S ⊗ ρ_M) U_c†`.
fn joint_readout(
    left: &ComplexMatrix,
    system: &ComplexMatrix,
    a: &Observable,
    meter: &MeterModel,
) -> Result<(C64, C64)> {
    system.check_dim(a.dim())?;
    left.check_dim(a.dim())?;
    let u = coupling_unitary(a, meter)?;
    let joint = &u * &system.kron(meter.rho_m.matrix()) * &u.adjoint();
    let num = left.kron(meter.pointer.matrix()).trace_product(&joint);
    let den = left.kron(&ComplexMatrix::identity(meter.dim())).trace_product(&joint);
    Ok((num, den))
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::ComplexTrace { imag: z.im });
    }
    Ok(z.re)
}

/// Pointer expectation of a conventional (preselected only) measurement.
pub fn pointer_expectation_preselected(rho: &DensityMatrix, a: &Observable, meter: &MeterModel) -> Result<f64> {
    let (num, den) = joint_readout(&ComplexMatrix::identity(a.dim()), rho.matrix(), a, meter)?;
    real_part(num / den)
}

/// Pointer expectation of a PPS measurement of arbitrary strength:
/// `Tr[(E⊗R) σ] / Tr[(E⊗I) σ]` with `σ = U_c (ρ ⊗ ρ_M) U_c†`.
pub fn pointer_expectation_pps(
    rho: &DensityMatrix,
    effect: &PovmElement,
    a: &Observable,
    meter: &MeterModel,
) -> Result<f64> {
    let (num, den) = joint_readout(effect.matrix(), rho.matrix(), a, meter)?;
    let den = real_part(den)?;
    if den < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: den });
    }
    real_part(num / den)
}

/// Which part of the connection state enters the system slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionPart {
    /// The full non-Hermitian `w`.
    Full,
    /// Only the Hermitian part `w'`.
    Hermitian,
}

/// Conventional pointer expectation with the connection state in place of
/// the preparation: `Tr[(I⊗R) U_c (w ⊗ ρ_M) U_c†]`.
///
/// Equal to [`pointer_expectation_pps`] only when `A` commutes with `ρ` or
/// `E`; the stored factors of `w` are checked first.
pub fn pointer_expectation_connection(
    w: &ConnectionState,
    a: &Observable,
    meter: &MeterModel,
    part: ConnectionPart,
) -> Result<f64> {
    let f = w.factors().ok_or(Error::MissingFactors)?;
    if !commuting_condition(a, &f.rho, &f.effect)? {
        return Err(Error::CommutationRequired);
    }
    let state = match part {
        ConnectionPart::Full => w.matrix(),
        ConnectionPart::Hermitian => w.hermitian_part(),
    };
    let (num, den) = joint_readout(&ComplexMatrix::identity(a.dim()), state, a, meter)?;
    if den.norm() < POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: den.re });
    }
    real_part(num / den)
}

/// `Σ_i q_i R̄_{f,i}` for eigenvalue weights `q_i` aligned with `A`'s spectrum.
pub fn classical_pointer_average(weights: &[f64], a: &Observable, meter: &MeterModel) -> f64 {
    weights.iter().zip(a.eigenvalues()).map(|(q, &ai)| q * meter.pointer_for_eigenvalue(ai)).sum()
}

/// Weak-value estimate from pointer shifts at two coupling strengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakLimitEstimate {
    pub g_coarse: f64,
    pub g_fine: f64,
    /// `(R̄(g) - R̄(0)) / g` at each strength.
    pub slope_coarse: f64,
    pub slope_fine: f64,
    /// Two-point Richardson extrapolation to `g → 0`, assuming a linear error.
    pub extrapolated: f64,
}

pub fn weak_limit_estimate(
    rho: &DensityMatrix,
    effect: &PovmElement,
    a: &Observable,
    meter: &MeterModel,
    g_coarse: f64,
    g_fine: f64,
) -> Result<WeakLimitEstimate> {
    if g_coarse == 0.0 || g_fine == 0.0 || g_coarse == g_fine {
        return Err(Error::InvalidArgument("need two distinct nonzero coupling strengths".into()));
    }
    let base = meter.initial_pointer();
    let slope = |g: f64| -> Result<f64> {
        Ok((pointer_expectation_pps(rho, effect, a, &meter.with_coupling(g))? - base) / g)
    };
    let slope_coarse = slope(g_coarse)?;
    let slope_fine = slope(g_fine)?;
    let extrapolated = (g_coarse * slope_fine - g_fine * slope_coarse) / (g_coarse - g_fine);
    Ok(WeakLimitEstimate { g_coarse, g_fine, slope_coarse, slope_fine, extrapolated })
}

/// The transformed triple `(ρ̃, Ẽ, Ã)` accounting for system dynamics.
#[derive(Clone, Debug)]
pub struct Substituted {
    pub rho: DensityMatrix,
    pub effect: PovmElement,
    pub observable: Observable,
}

/// Absorbs free evolution into the problem data:
/// `Ã = U₁AU₁†`, `ρ̃ = U₁ρ(t)U₁†`, `Ẽ = U₁E(t₁,t)U₁†`, where
/// `ρ(t) = U_before ρ U_before†` and `E(t₁,t) = U_after† E U_after`.
///
/// `u_before` is `U(t, t₀)`, `u_after` is `U(t₁, t)` and `u_frame` is the
/// arbitrary frame unitary `U₁`.
pub fn apply_dynamics_substitution(
    rho: &DensityMatrix,
    effect: &PovmElement,
    a: &Observable,
    u_before: &ComplexMatrix,
    u_after: &ComplexMatrix,
    u_frame: &ComplexMatrix,
) -> Result<Substituted> {
    for u in [u_before, u_after, u_frame] {
        u.check_dim(rho.dim())?;
        ensure_unitary(u)?;
    }
    let rho_t = u_before * rho.matrix() * &u_before.adjoint();
    let e_t = &u_after.adjoint() * effect.matrix() * u_after;
    let uf_d = u_frame.adjoint();
    Ok(Substituted {
        rho: DensityMatrix::from_trusted((u_frame * &rho_t * &uf_d).hermitian_part()),
        effect: PovmElement::new((u_frame * &e_t * &uf_d).hermitian_part())?,
        observable: a.conjugated(u_frame),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::connection_state;
    use crate::measurement::strong_pps_via_connection;
    use crate::qmcore::{kets, pauli, unitarity_defect, unitary_from_hamiltonian};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    fn z() -> Observable {
        Observable::new(pauli::z()).unwrap()
    }

    #[test]
    fn config_json_shape() {
        let cfg = MeterConfig::gaussian(0.5);
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(v["dim_M"], 32);
        assert_eq!(v["L"], 8.0);
        assert_eq!(v["profile"], "gaussian");
        assert!(v.get("momentum").is_none());
        let parsed: MeterConfig =
            serde_json::from_str(r#"{"dim_M": 16, "L": 6.0, "width": 1.0, "g": 0.1, "profile": "gaussian"}"#).unwrap();
        assert_eq!(parsed.dim_m, 16);
        assert_eq!(parsed.momentum, 0.0);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let meter = MeterConfig::gaussian(0.0).build().unwrap();
        let u = coupling_unitary(&z(), &meter).unwrap();
        assert!(close(&u, &ComplexMatrix::identity(64), 1e-12));
        let rho = DensityMatrix::pure(&kets::plus()).unwrap();
        let r = pointer_expectation_preselected(&rho, &z(), &meter).unwrap();
        assert!((r - meter.initial_pointer()).abs() < 1e-12);
    }

    #[test]
    fn coupling_is_block_diagonal_and_unitary() {
        let meter = MeterConfig::gaussian(0.7).build().unwrap();
        let u = coupling_unitary(&z(), &meter).unwrap();
        assert!(unitarity_defect(&u) < 1e-10);
        let n = meter.dim();
        let plus_block = meter.block(1.0);
        let minus_block = meter.block(-1.0);
        for i in 0..n {
            for j in 0..n {
                assert!((u.get(i, j) - plus_block.get(i, j)).norm() < 1e-13);
                assert!((u.get(n + i, n + j) - minus_block.get(i, j)).norm() < 1e-13);
                assert!(u.get(i, n + j).norm() < 1e-13);
            }
        }
        let expected = unitary_from_hamiltonian(meter.coupling().matrix(), 0.7).unwrap();
        assert!(close(&plus_block, &expected, 1e-12));
    }

    #[test]
    fn trivial_observable_leaves_pointer_independent_of_state() {
        let meter = MeterConfig::gaussian(0.9).build().unwrap();
        let one = Observable::new(ComplexMatrix::identity(2)).unwrap();
        let r1 = pointer_expectation_preselected(&DensityMatrix::pure(&kets::zero()).unwrap(), &one, &meter).unwrap();
        let r2 = pointer_expectation_preselected(&DensityMatrix::pure(&kets::plus_i()).unwrap(), &one, &meter).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
        assert!((r1 - meter.pointer_for_eigenvalue(1.0)).abs() < 1e-12);
    }

    #[test]
    fn translation_moves_the_pointer() {
        let meter = MeterConfig::gaussian(1.0).build().unwrap();
        assert!(meter.initial_pointer().abs() < 1e-12);
        assert!((meter.pointer_for_eigenvalue(1.0) - 1.0).abs() < 1e-6);
        assert!((meter.pointer_for_eigenvalue(-0.5) + 0.5).abs() < 1e-6);
    }

    #[test]
    fn aliasing_detected() {
        // F with spectrum {0, 2π}: blocks for a and a + 1 coincide at g = 1.
        let tau = 2.0 * std::f64::consts::PI;
        let meter = MeterModel::new(
            DensityMatrix::maximally_mixed(2),
            Observable::new(ComplexMatrix::diag(&[0.0, tau])).unwrap(),
            Observable::new(pauli::x()).unwrap(),
            1.0,
        )
        .unwrap();
        let a = Observable::new(ComplexMatrix::diag(&[0.0, 1.0])).unwrap();
        assert!(matches!(coupling_unitary(&a, &meter), Err(Error::AliasedCoupling { .. })));
    }

    #[test]
    fn eigenstate_and_mixture_readings() {
        let meter = MeterConfig::gaussian(0.8).build().unwrap();
        let up = DensityMatrix::pure(&kets::zero()).unwrap();
        let r = pointer_expectation_preselected(&up, &z(), &meter).unwrap();
        assert!((r - meter.pointer_for_eigenvalue(1.0)).abs() < 1e-12);
        let mix = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let r = pointer_expectation_preselected(&mix, &z(), &meter).unwrap();
        let expected = 0.3 * meter.pointer_for_eigenvalue(1.0) + 0.7 * meter.pointer_for_eigenvalue(-1.0);
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn pps_reduces_without_post_selection() {
        let meter = MeterConfig::gaussian(0.3).build().unwrap();
        let rho = DensityMatrix::pure(&kets::real_angle(0.4)).unwrap();
        let a = pointer_expectation_pps(&rho, &PovmElement::identity(2), &z(), &meter).unwrap();
        let b = pointer_expectation_preselected(&rho, &z(), &meter).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn commuting_case_is_a_classical_average() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let e = PovmElement::pure(&kets::real_angle(0.3)).unwrap();
        let w = connection_state(&rho, &e).unwrap();
        let probs = strong_pps_via_connection(&z(), &w).unwrap();
        for g in [0.01, 0.1, 1.0, 5.0] {
            let meter = MeterConfig::gaussian(g).build().unwrap();
            let direct = pointer_expectation_pps(&rho, &e, &z(), &meter).unwrap();
            let classical = classical_pointer_average(&probs, &z(), &meter);
            let full = pointer_expectation_connection(&w, &z(), &meter, ConnectionPart::Full).unwrap();
            let herm = pointer_expectation_connection(&w, &z(), &meter, ConnectionPart::Hermitian).unwrap();
            assert!((direct - classical).abs() < 1e-10, "g={g}");
            assert!((direct - full).abs() < 1e-10 && (direct - herm).abs() < 1e-10, "g={g}");
        }
    }

    #[test]
    fn connection_route_is_gated() {
        let meter = MeterConfig::gaussian(0.5).build().unwrap();
        let w = connection_state(
            &DensityMatrix::pure(&kets::plus()).unwrap(),
            &PovmElement::pure(&kets::plus_i()).unwrap(),
        )
        .unwrap();
        let err = pointer_expectation_connection(&w, &z(), &meter, ConnectionPart::Full).unwrap_err();
        assert_eq!(err, Error::CommutationRequired);
    }

    #[test]
    fn identity_substitution() {
        let rho = DensityMatrix::pure(&kets::real_angle(0.2)).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let s = apply_dynamics_substitution(&rho, &e, &z(), &i2, &i2, &i2).unwrap();
        assert!(close(s.rho.matrix(), rho.matrix(), 1e-15));
        assert!(close(s.effect.matrix(), e.matrix(), 1e-15));
        assert!(close(s.observable.matrix(), &pauli::z(), 1e-15));
        let bad = ComplexMatrix::diag(&[1.0, 0.5]);
        assert!(matches!(
            apply_dynamics_substitution(&rho, &e, &z(), &bad, &i2, &i2),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn substitution_matches_sequential_simulation() {
        let meter = MeterConfig::gaussian(0.6).build().unwrap();
        let rho = DensityMatrix::pure(&kets::real_angle(0.3)).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let a = Observable::new(pauli::x()).unwrap();
        let frame = unitary_from_hamiltonian(&pauli::y(), 0.37).unwrap();
        for (t0, t, t1) in [(0.0, 0.2, 1.0), (0.0, 0.5, 0.9), (0.1, 0.7, 1.3)] {
            let before = unitary_from_hamiltonian(&pauli::z(), t - t0).unwrap();
            let after = unitary_from_hamiltonian(&pauli::z(), t1 - t).unwrap();

            // brute force: evolve, couple, evolve, post-select
            let id_m = ComplexMatrix::identity(meter.dim());
            let uc = coupling_unitary(&a, &meter).unwrap();
            let total = &after.kron(&id_m) * &uc * &before.kron(&id_m);
            let joint = &total * &rho.matrix().kron(meter.state().matrix()) * &total.adjoint();
            let num = e.matrix().kron(meter.pointer().matrix()).trace_product(&joint).re;
            let den = e.matrix().kron(&id_m).trace_product(&joint).re;
            let oracle = num / den;

            for u1 in [ComplexMatrix::identity(2), frame.clone()] {
                let s = apply_dynamics_substitution(&rho, &e, &a, &before, &after, &u1).unwrap();
                let got = pointer_expectation_pps(&s.rho, &s.effect, &s.observable, &meter).unwrap();
                assert!((got - oracle).abs() < 1e-10, "t={t}");
            }
        }
    }
}
