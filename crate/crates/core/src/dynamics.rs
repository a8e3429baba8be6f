//! Unitary dynamics of PPS ensembles.
//!
//! Hamiltonians are piecewise constant, so every propagator is an exact
//! product of matrix exponentials. `U(t', t'')` evolves from `t''` to `t'`;
//! when `t' < t''` it is the adjoint of the forward propagator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::connection::{connection_state, retrodictive_state, ConnectionState};
use crate::error::{Error, Result};
use crate::qmcore::{ensure_unitary, hermitian_eigen, ComplexMatrix, DensityMatrix, HermitianEigen, Observable, PovmElement};
use crate::C64;

/// One constant-Hamiltonian piece of a schedule.
#[derive(Clone, Debug)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    hamiltonian: ComplexMatrix,
    eigen: HermitianEigen,
}

impl Segment {
    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    fn exp(&self, dt: f64) -> ComplexMatrix {
        self.eigen.map(|e| C64::from_polar(1.0, -e * dt))
    }
}

#[derive(Serialize, Deserialize)]
struct SegmentJson {
    t_start: f64,
    t_end: f64,
    #[serde(rename = "H")]
    h: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ScheduleJson {
    segments: Vec<SegmentJson>,
}

/// Contiguous piecewise-constant Hamiltonian on `[t0, t1]`.
///
/// JSON form: `{"segments": [{"t_start": .., "t_end": .., "H": matrix}, ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ScheduleJson", into = "ScheduleJson")]
pub struct HamiltonianSchedule {
    segments: Vec<Segment>,
}

impl TryFrom<ScheduleJson> for HamiltonianSchedule {
    type Error = Error;

    fn try_from(j: ScheduleJson) -> Result<Self> {
        HamiltonianSchedule::new(j.segments.into_iter().map(|s| (s.t_start, s.t_end, s.h)).collect())
    }
}

impl From<HamiltonianSchedule> for ScheduleJson {
    fn from(s: HamiltonianSchedule) -> Self {
        ScheduleJson {
            segments: s
                .segments
                .into_iter()
                .map(|seg| SegmentJson { t_start: seg.t_start, t_end: seg.t_end, h: seg.hamiltonian })
                .collect(),
        }
    }
}

fn time_tol(a: f64, b: f64) -> f64 {
    1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl HamiltonianSchedule {
    pub fn new(segments: Vec<(f64, f64, ComplexMatrix)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidSchedule("no segments".into()));
        }
        let dim = segments[0].2.dim();
        let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
        for (k, (t_start, t_end, h)) in segments.into_iter().enumerate() {
            if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
                return Err(Error::InvalidSchedule(format!("segment {k}: need t_start < t_end")));
            }
            h.check_dim(dim)?;
            if let Some(prev) = out.last() {
                if (prev.t_end - t_start).abs() > time_tol(prev.t_end, t_start) {
                    return Err(Error::InvalidSchedule(format!(
                        "segment {k} starts at {t_start} but the previous one ends at {}",
                        prev.t_end
                    )));
                }
            }
            let eigen = hermitian_eigen(&h)?;
            out.push(Segment { t_start, t_end, hamiltonian: h, eigen });
        }
        Ok(HamiltonianSchedule { segments: out })
    }

    /// A single segment with constant `h` on `[t0, t1]`.
    pub fn constant(h: ComplexMatrix, t0: f64, t1: f64) -> Result<Self> {
        Self::new(vec![(t0, t1, h)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn dim(&self) -> usize {
        self.segments[0].hamiltonian.dim()
    }

    pub fn start(&self) -> f64 {
        self.segments[0].t_start
    }

    pub fn end(&self) -> f64 {
        self.segments.last().expect("non-empty").t_end
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.start(), self.end());
        if !t.is_finite() || t < a - time_tol(a, t) || t > b + time_tol(b, t) {
            return Err(Error::OutOfScheduleRange { t, start: a, end: b });
        }
        Ok(t.clamp(a, b))
    }

    /// Hamiltonian in force at `t` (the later segment at a boundary).
    pub fn hamiltonian_at(&self, t: f64) -> Result<&ComplexMatrix> {
        let t = self.check_time(t)?;
        let seg = self.segments.iter().rev().find(|s| s.t_start <= t).unwrap_or(&self.segments[0]);
        Ok(&seg.hamiltonian)
    }

    /// Segment boundaries strictly inside `(lo, hi)`.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.segments.iter().map(|s| s.t_start).filter(|&b| b > lo && b < hi).collect()
    }
}

/// `U(t_to, t_from)`, the time-ordered propagator.
pub fn propagator(sched: &HamiltonianSchedule, t_to: f64, t_from: f64) -> Result<ComplexMatrix> {
    let t_to = sched.check_time(t_to)?;
    let t_from = sched.check_time(t_from)?;
    if t_to < t_from {
        return Ok(propagator(sched, t_from, t_to)?.adjoint());
    }
    let mut u = ComplexMatrix::identity(sched.dim());
    for seg in &sched.segments {
        let lo = seg.t_start.max(t_from);
        let hi = seg.t_end.min(t_to);
        if hi > lo {
            u = &seg.exp(hi - lo) * &u;
        }
    }
    Ok(u)
}

/// `U ρ U†`.
pub fn evolve_state(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    u.check_dim(rho.dim())?;
    ensure_unitary(u)?;
    Ok(DensityMatrix::from_trusted((u * rho.matrix() * &u.adjoint()).hermitian_part()))
}

/// `U† E U`.
pub fn heisenberg_effect(effect: &PovmElement, u: &ComplexMatrix) -> Result<PovmElement> {
    u.check_dim(effect.dim())?;
    ensure_unitary(u)?;
    PovmElement::new((&u.adjoint() * effect.matrix() * u).hermitian_part())
}

fn check_order(t0: f64, t: f64, t1: f64) -> Result<()> {
    if !(t0 - time_tol(t0, t) <= t && t <= t1 + time_tol(t1, t)) {
        return Err(Error::OutOfScheduleRange { t, start: t0, end: t1 });
    }
    Ok(())
}

/// `w(t) = U(t,t0) ρ U†(t1,t0) E U(t1,t) / P`, i.e. `ρ(t) E(t1,t) / P`.
pub fn connection_state_at(
    rho: &DensityMatrix,
    effect: &PovmElement,
    sched: &HamiltonianSchedule,
    t0: f64,
    t: f64,
    t1: f64,
) -> Result<ConnectionState> {
    check_order(t0, t, t1)?;
    let rho_t = evolve_state(rho, &propagator(sched, t, t0)?)?;
    let e_t = heisenberg_effect(effect, &propagator(sched, t1, t)?)?;
    connection_state(&rho_t, &e_t)
}

/// `P` computed three ways: `Tr[ρ(t)E(t1,t)]`, `Tr[ρE(t1,t0)]`, `Tr[ρ(t1)E]`.
pub fn post_selection_probabilities(
    rho: &DensityMatrix,
    effect: &PovmElement,
    sched: &HamiltonianSchedule,
    t0: f64,
    t: f64,
    t1: f64,
) -> Result<[f64; 3]> {
    check_order(t0, t, t1)?;
    let at = evolve_state(rho, &propagator(sched, t, t0)?)?
        .matrix()
        .trace_product(heisenberg_effect(effect, &propagator(sched, t1, t)?)?.matrix());
    let initial = rho.matrix().trace_product(heisenberg_effect(effect, &propagator(sched, t1, t0)?)?.matrix());
    let final_ = evolve_state(rho, &propagator(sched, t1, t0)?)?.matrix().trace_product(effect.matrix());
    Ok([at.re, initial.re, final_.re])
}

/// One sample of an integrated trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub w: ConnectionState,
}

fn rk4_step(h: &ComplexMatrix, w: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let minus_i = C64::new(0.0, -1.0);
    let f = |x: &ComplexMatrix| h.commutator(x).scale(minus_i);
    let k1 = f(w);
    let k2 = f(&(w + &k1.scale_real(dt / 2.0)));
    let k3 = f(&(w + &k2.scale_real(dt / 2.0)));
    let k4 = f(&(w + &k3.scale_real(dt)));
    let incr = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
    w + &incr.scale_real(dt / 6.0)
}

/// Integrates `dw/dt = -i[H(t), w]` with fixed-step RK4 from `t_start` to
/// `t_end` (either direction).
///
/// Each constant-`H` piece of the span is split into `ceil(len/dt)` equal
/// steps so no step straddles a segment boundary. The returned trajectory
/// starts with `w0` at `t_start` and ends at `t_end`.
pub fn evolve_connection_ode(
    w0: &ConnectionState,
    sched: &HamiltonianSchedule,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    w0.matrix().check_dim(sched.dim())?;
    let t_start = sched.check_time(t_start)?;
    let t_end = sched.check_time(t_end)?;
    let (lo, hi) = (t_start.min(t_end), t_start.max(t_end));
    let mut knots = vec![lo];
    knots.extend(sched.breakpoints(lo, hi));
    knots.push(hi);
    if t_end < t_start {
        knots.reverse();
    }

    let prob = w0.post_selection_prob();
    let mut w = w0.matrix().clone();
    let mut traj = vec![TrajectoryPoint { t: t_start, w: w0.clone() }];
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = b - a;
        if len == 0.0 {
            continue;
        }
        let h = sched.hamiltonian_at(a.min(b) + 0.5 * len.abs())?;
        let n = (len.abs() / dt).ceil().max(1.0) as usize;
        let step = len / n as f64;
        for k in 1..=n {
            w = rk4_step(h, &w, step);
            let t = if k == n { b } else { a + k as f64 * step };
            traj.push(TrajectoryPoint { t, w: ConnectionState::from_matrix(w.clone(), prob)? });
        }
    }
    Ok(traj)
}

/// Representation in which a weak value is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Picture {
    Schroedinger,
    /// Operators referenced to `t_r`, state `w(t_r)`.
    HeisenbergAt(f64),
    /// Reference time `t0`.
    ForwardHeisenberg,
    /// Reference time `t1`.
    BackwardHeisenberg,
}

/// Time window `t0 ≤ t ≤ t1` of a PPS experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub t0: f64,
    pub t: f64,
    pub t1: f64,
}

/// `A_w` at time `t`, evaluated in the requested picture.
pub fn weak_value_in_picture(
    a: &Observable,
    rho: &DensityMatrix,
    effect: &PovmElement,
    sched: &HamiltonianSchedule,
    win: Window,
    picture: Picture,
) -> Result<C64> {
    let Window { t0, t, t1 } = win;
    check_order(t0, t, t1)?;
    a.matrix().check_dim(rho.dim())?;
    match picture {
        Picture::Schroedinger => {
            let w = connection_state_at(rho, effect, sched, t0, t, t1)?;
            Ok(a.matrix().trace_product(w.matrix()))
        }
        Picture::HeisenbergAt(t_r) => {
            check_order(t0, t_r, t1)?;
            let u = propagator(sched, t, t_r)?;
            let a_r = &u.adjoint() * a.matrix() * &u;
            let w = connection_state_at(rho, effect, sched, t0, t_r, t1)?;
            Ok(a_r.trace_product(w.matrix()))
        }
        Picture::ForwardHeisenberg => {
            // Tr[A(t,t0) ρ E(t1,t0)] / P
            let u = propagator(sched, t, t0)?;
            let a_f = &u.adjoint() * a.matrix() * &u;
            let e_f = heisenberg_effect(effect, &propagator(sched, t1, t0)?)?;
            scaled_trace(&a_f, rho.matrix(), e_f.matrix())
        }
        Picture::BackwardHeisenberg => {
            // Tr[A(t,t1) ρ(t1) E] / P
            let u = propagator(sched, t, t1)?;
            let a_b = &u.adjoint() * a.matrix() * &u;
            let rho_f = evolve_state(rho, &propagator(sched, t1, t0)?)?;
            scaled_trace(&a_b, rho_f.matrix(), effect.matrix())
        }
    }
}

fn scaled_trace(a: &ComplexMatrix, rho: &ComplexMatrix, e: &ComplexMatrix) -> Result<C64> {
    let re = rho * e;
    let p = re.trace().re;
    if p < crate::connection::POST_SELECTION_EPS {
        return Err(Error::DegeneratePostSelection { probability: p });
    }
    Ok(a.trace_product(&re) / p)
}

/// `E(t1,t) / Tr E`.
pub fn retrodictive_at(effect: &PovmElement, sched: &HamiltonianSchedule, t: f64, t1: f64) -> Result<ConnectionState> {
    if t > t1 {
        return Err(Error::OutOfScheduleRange { t, start: sched.start(), end: t1 });
    }
    retrodictive_state(&heisenberg_effect(effect, &propagator(sched, t1, t)?)?)
}

/// Writes `t` then the row-major real and imaginary parts of `w(t)`.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &[TrajectoryPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let d = traj.first().map_or(0, |p| p.w.dim());
    let mut header = vec!["t".to_string()];
    for i in 0..d {
        for j in 0..d {
            header.push(format!("w_{i}_{j}_re"));
            header.push(format!("w_{i}_{j}_im"));
        }
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for p in traj {
        let mut row = vec![format!("{:.16e}", p.t)];
        for z in p.w.matrix().row_major() {
            row.push(format!("{:.16e}", z.re));
            row.push(format!("{:.16e}", z.im));
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::connection_from_pred_retr;
    use crate::qmcore::{kets, operator_norm, pauli, unitarity_defect, unitary_from_hamiltonian};
    use std::f64::consts::PI;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    fn half_z(omega: f64) -> ComplexMatrix {
        pauli::z().scale_real(omega / 2.0)
    }

    #[test]
    fn propagator_basics() {
        let s = HamiltonianSchedule::constant(half_z(1.3), 0.0, 2.0).unwrap();
        assert!(close(&propagator(&s, 0.7, 0.7).unwrap(), &ComplexMatrix::identity(2), 1e-15));
        let u = propagator(&s, 1.5, 0.5).unwrap();
        let expected = ComplexMatrix::from_row_major(
            2,
            &[C64::from_polar(1.0, -0.65), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, 0.65)],
        )
        .unwrap();
        assert!(close(&u, &expected, 1e-14));
        let back = propagator(&s, 0.5, 1.5).unwrap();
        assert!(close(&back, &u.adjoint(), 1e-15));
        assert!(matches!(propagator(&s, 2.5, 0.0), Err(Error::OutOfScheduleRange { .. })));
    }

    #[test]
    fn time_ordering() {
        let s = HamiltonianSchedule::new(vec![(0.0, 0.4, pauli::x()), (0.4, 1.0, pauli::z())]).unwrap();
        let u = propagator(&s, 1.0, 0.0).unwrap();
        let expected =
            &unitary_from_hamiltonian(&pauli::z(), 0.6).unwrap() * &unitary_from_hamiltonian(&pauli::x(), 0.4).unwrap();
        assert!(close(&u, &expected, 1e-13));
        let swapped = HamiltonianSchedule::new(vec![(0.0, 0.6, pauli::z()), (0.6, 1.0, pauli::x())]).unwrap();
        assert!(operator_norm(&(&propagator(&swapped, 1.0, 0.0).unwrap() - &expected)) > 1e-6);
        let comp = &propagator(&s, 1.0, 0.3).unwrap() * &propagator(&s, 0.3, 0.1).unwrap();
        assert!(close(&comp, &propagator(&s, 1.0, 0.1).unwrap(), 1e-13));
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(HamiltonianSchedule::new(vec![(0.0, 1.0, pauli::x()), (1.5, 2.0, pauli::z())]).is_err());
        assert!(HamiltonianSchedule::new(vec![(1.0, 1.0, pauli::x())]).is_err());
        let skew = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(matches!(HamiltonianSchedule::constant(skew, 0.0, 1.0), Err(Error::NotHermitian { .. })));
        let s = HamiltonianSchedule::new(vec![(0.0, 1.0, pauli::x()), (1.0, 2.0, pauli::z())]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: HamiltonianSchedule = serde_json::from_str(&json).unwrap();
        assert!(close(&propagator(&back, 2.0, 0.0).unwrap(), &propagator(&s, 2.0, 0.0).unwrap(), 1e-15));
    }

    #[test]
    fn state_and_effect_evolution() {
        let up = DensityMatrix::pure(&kets::zero()).unwrap();
        let flipped = evolve_state(&up, &pauli::x()).unwrap();
        assert!(close(flipped.matrix(), &ComplexMatrix::projector(&kets::one()), 1e-15));
        let any = unitary_from_hamiltonian(&pauli::y(), 0.3).unwrap();
        let id = heisenberg_effect(&PovmElement::identity(2), &any).unwrap();
        assert!(close(id.matrix(), &ComplexMatrix::identity(2), 1e-14));
        assert!(matches!(evolve_state(&up, &ComplexMatrix::diag(&[1.0, 2.0])), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn heisenberg_effect_matches_backward_equation() {
        // dE/dt = -i[H, E] integrated backwards from E(t1,t1) = E, explicit midpoint
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let s = HamiltonianSchedule::constant(pauli::z(), 0.0, PI / 2.0).unwrap();
        let exact = heisenberg_effect(&e, &propagator(&s, PI / 2.0, 0.0).unwrap()).unwrap();
        assert!(close(exact.matrix(), &ComplexMatrix::projector(&kets::minus()), 1e-13));
        let quarter = heisenberg_effect(&e, &propagator(&s, PI / 2.0, PI / 4.0).unwrap()).unwrap();
        assert!(close(quarter.matrix(), &ComplexMatrix::projector(&kets::minus_i()), 1e-13));
        let mut errs = vec![];
        for n in [200usize, 400] {
            let dt = (PI / 2.0) / n as f64;
            let mut m = e.matrix().clone();
            let f = |x: &ComplexMatrix| pauli::z().commutator(x).scale(C64::new(0.0, -1.0));
            for _ in 0..n {
                let mid = &m - &f(&m).scale_real(dt / 2.0);
                m = &m - &f(&mid).scale_real(dt);
            }
            errs.push(operator_norm(&(&m - exact.matrix())));
        }
        assert!(errs[0] < 1e-4);
        let ratio = errs[0] / errs[1];
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn static_connection_state() {
        let rho = DensityMatrix::pure(&kets::zero()).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let s = HamiltonianSchedule::constant(ComplexMatrix::zeros(2), 0.0, 1.0).unwrap();
        let w0 = connection_state(&rho, &e).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let w = connection_state_at(&rho, &e, &s, 0.0, t, 1.0).unwrap();
            assert!(close(w.matrix(), w0.matrix(), 1e-15));
        }
    }

    #[test]
    fn pure_state_form_and_final_condition() {
        let omega = 1.7;
        let s = HamiltonianSchedule::constant(half_z(omega), 0.0, 2.0).unwrap();
        let psi = kets::zero();
        let phi = kets::plus();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let e = PovmElement::pure(&phi).unwrap();
        for t in [0.0, 0.5, 1.2, 2.0] {
            // |ψ(t)><φ(t)| / <φ(t)|ψ(t)> with kets propagated as column vectors
            let u_f = unitary_from_hamiltonian(&half_z(omega), t).unwrap();
            let u_b = unitary_from_hamiltonian(&half_z(omega), 2.0 - t).unwrap().adjoint();
            let apply = |u: &ComplexMatrix, v: &[C64]| -> Vec<C64> {
                (0..2).map(|i| (0..2).map(|j| u.get(i, j) * v[j]).sum()).collect()
            };
            let psi_t = apply(&u_f, &psi);
            let phi_t = apply(&u_b, &phi);
            let overlap: C64 = phi_t.iter().zip(&psi_t).map(|(a, b)| a.conj() * b).sum();
            let direct = ComplexMatrix::outer(&psi_t, &phi_t).scale(C64::new(1.0, 0.0) / overlap);
            let w = connection_state_at(&rho, &e, &s, 0.0, t, 2.0).unwrap();
            assert!(close(w.matrix(), &direct, 1e-12), "t={t}");
        }
        let w1 = connection_state_at(&rho, &e, &s, 0.0, 2.0, 2.0).unwrap();
        let rho1 = evolve_state(&rho, &propagator(&s, 2.0, 0.0).unwrap()).unwrap();
        let p = rho1.matrix().trace_product(e.matrix()).re;
        assert!(close(w1.matrix(), &(rho1.matrix() * e.matrix()).scale_real(1.0 / p), 1e-13));
    }

    #[test]
    fn three_probabilities_agree() {
        let s = HamiltonianSchedule::new(vec![(0.0, 0.5, pauli::x()), (0.5, 1.5, pauli::y().scale_real(0.7))]).unwrap();
        let rho = DensityMatrix::diagonal(&[0.8, 0.2]).unwrap();
        let e = PovmElement::pure(&kets::plus_i()).unwrap();
        for k in 0..=10 {
            let t = 1.5 * k as f64 / 10.0;
            let [a, b, c] = post_selection_probabilities(&rho, &e, &s, 0.0, t, 1.5).unwrap();
            assert!((a - b).abs() < 1e-12 && (b - c).abs() < 1e-12);
            let w = connection_state_at(&rho, &e, &s, 0.0, t, 1.5).unwrap();
            assert!((w.post_selection_prob().unwrap() - a).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_form_over_time() {
        let s = HamiltonianSchedule::constant(pauli::x().scale_real(0.9), 0.0, 1.0).unwrap();
        let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        let e = PovmElement::new(ComplexMatrix::diag(&[0.3, 0.9])).unwrap();
        for t in [0.0, 0.4, 1.0] {
            let w = connection_state_at(&rho, &e, &s, 0.0, t, 1.0).unwrap();
            let pred = evolve_state(&rho, &propagator(&s, t, 0.0).unwrap()).unwrap();
            let retr = retrodictive_at(&e, &s, t, 1.0).unwrap();
            let retr = DensityMatrix::new(retr.matrix().clone()).unwrap();
            let sym = connection_from_pred_retr(&pred, &retr).unwrap();
            assert!(close(w.matrix(), sym.matrix(), 1e-12));
        }
    }

    #[test]
    fn ode_convergence_and_reversibility() {
        let s = HamiltonianSchedule::constant(pauli::z(), 0.0, 1.0).unwrap();
        let rho = DensityMatrix::pure(&kets::real_angle(0.4)).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let w0 = connection_state_at(&rho, &e, &s, 0.0, 0.0, 1.0).unwrap();
        let w1 = connection_state_at(&rho, &e, &s, 0.0, 1.0, 1.0).unwrap();
        let err = |dt: f64| {
            let traj = evolve_connection_ode(&w0, &s, 0.0, 1.0, dt).unwrap();
            let last = traj.last().unwrap();
            assert_eq!(last.t, 1.0);
            operator_norm(&(last.w.matrix() - w1.matrix()))
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
        let back = evolve_connection_ode(&w1, &s, 1.0, 0.0, 0.01).unwrap();
        assert_eq!(back.last().unwrap().t, 0.0);
        assert!(operator_norm(&(back.last().unwrap().w.matrix() - w0.matrix())) < 1e-8);
    }

    #[test]
    fn ode_with_zero_hamiltonian_is_constant() {
        let s = HamiltonianSchedule::constant(ComplexMatrix::zeros(2), 0.0, 1.0).unwrap();
        let w0 = connection_state(
            &DensityMatrix::pure(&kets::zero()).unwrap(),
            &PovmElement::pure(&kets::plus()).unwrap(),
        )
        .unwrap();
        let traj = evolve_connection_ode(&w0, &s, 0.0, 1.0, 0.25).unwrap();
        assert_eq!(traj.len(), 5);
        for p in &traj {
            assert!(close(p.w.matrix(), w0.matrix(), 0.0));
        }
    }

    #[test]
    fn ode_steps_respect_segment_boundaries() {
        let s = HamiltonianSchedule::new(vec![(0.0, 0.35, pauli::x()), (0.35, 1.0, pauli::z())]).unwrap();
        let rho = DensityMatrix::pure(&kets::zero()).unwrap();
        let e = PovmElement::pure(&kets::plus_i()).unwrap();
        let w0 = connection_state_at(&rho, &e, &s, 0.0, 0.0, 1.0).unwrap();
        let w1 = connection_state_at(&rho, &e, &s, 0.0, 1.0, 1.0).unwrap();
        let traj = evolve_connection_ode(&w0, &s, 0.0, 1.0, 0.1).unwrap();
        assert!(traj.iter().any(|p| p.t == 0.35));
        assert!(operator_norm(&(traj.last().unwrap().w.matrix() - w1.matrix())) < 1e-4);
    }

    #[test]
    fn pictures_agree() {
        let omega = 1.1;
        let s = HamiltonianSchedule::constant(half_z(omega), 0.0, 1.0).unwrap();
        let rho = DensityMatrix::pure(&kets::zero()).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let a = Observable::new(pauli::x()).unwrap();
        for k in 0..20 {
            let t = k as f64 / 19.0;
            let win = Window { t0: 0.0, t, t1: 1.0 };
            let vals: Vec<C64> = [
                Picture::Schroedinger,
                Picture::ForwardHeisenberg,
                Picture::BackwardHeisenberg,
                Picture::HeisenbergAt(0.37),
            ]
            .iter()
            .map(|&p| weak_value_in_picture(&a, &rho, &e, &s, win, p).unwrap())
            .collect();
            for v in &vals[1..] {
                assert!((v - vals[0]).norm() < 1e-12, "t={t}");
            }
        }
    }

    #[test]
    fn commuting_observable_uses_final_state() {
        let s = HamiltonianSchedule::constant(pauli::z(), 0.0, 1.0).unwrap();
        let rho = DensityMatrix::pure(&kets::real_angle(0.3)).unwrap();
        let e = PovmElement::pure(&kets::plus()).unwrap();
        let a = Observable::new(pauli::z()).unwrap();
        let rho1 = evolve_state(&rho, &propagator(&s, 1.0, 0.0).unwrap()).unwrap();
        let expected = crate::connection::weak_value(&a, &connection_state(&rho1, &e).unwrap()).unwrap();
        for t in [0.0, 0.5, 1.0] {
            let got =
                weak_value_in_picture(&a, &rho, &e, &s, Window { t0: 0.0, t, t1: 1.0 }, Picture::Schroedinger).unwrap();
            assert!((got - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn retrodictive_states_over_time() {
        let s = HamiltonianSchedule::constant(pauli::x(), 0.0, 1.0).unwrap();
        let id = retrodictive_at(&PovmElement::identity(2), &s, 0.2, 1.0).unwrap();
        assert!(close(id.matrix(), &ComplexMatrix::identity(2).scale_real(0.5), 1e-14));
        let e = PovmElement::pure(&kets::zero()).unwrap();
        let t1 = 1.0;
        let t = t1 - PI / 4.0;
        let r = retrodictive_at(&e, &s, t, t1).unwrap();
        let via = heisenberg_effect(&e, &propagator(&s, t1, t).unwrap()).unwrap();
        assert!(close(r.matrix(), via.matrix(), 1e-14));
        let fin = retrodictive_at(&e, &s, t1, t1).unwrap();
        assert!(close(fin.matrix(), e.matrix(), 1e-15));
    }

    #[test]
    fn trajectory_csv_layout() {
        let s = HamiltonianSchedule::constant(ComplexMatrix::zeros(2), 0.0, 1.0).unwrap();
        let w0 = connection_state(&DensityMatrix::maximally_mixed(2), &PovmElement::identity(2)).unwrap();
        let traj = evolve_connection_ode(&w0, &s, 0.0, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("t,w_0_0_re,w_0_0_im,w_0_1_re"));
        assert_eq!(lines[1].split(',').count(), 9);
    }
}
