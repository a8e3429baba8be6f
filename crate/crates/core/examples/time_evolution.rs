//! Connection state under a piecewise-constant Hamiltonian: exact
//! propagators, RK4 on dw/dt = -i[H, w], and weak values in four pictures.
//!
//! cargo run --example time_evolution

use ppslab::connection::weak_value;
use ppslab::dynamics::{
    connection_state_at, evolve_connection_ode, post_selection_probabilities, propagator, weak_value_in_picture,
    HamiltonianSchedule, Picture, Window,
};
use ppslab::qmcore::{kets, operator_norm, pauli, unitarity_defect, DensityMatrix, Observable, PovmElement};

fn main() -> ppslab::Result<()> {
    let sched =
        HamiltonianSchedule::new(vec![(0.0, 1.0, pauli::z().scale_real(0.5)), (1.0, 2.0, pauli::x().scale_real(0.8))])?;
    let rho = DensityMatrix::pure(&kets::plus())?;
    let e = PovmElement::pure(&kets::real_angle(0.4))?;
    let (t0, t1) = (sched.start(), sched.end());

    let u = propagator(&sched, t1, t0)?;
    println!("unitarity defect of U(t1, t0): {:.1e}", unitarity_defect(&u));
    println!("P three ways: {:?}", post_selection_probabilities(&rho, &e, &sched, t0, 1.3, t1)?);

    let w0 = connection_state_at(&rho, &e, &sched, t0, t0, t1)?;
    let traj = evolve_connection_ode(&w0, &sched, t0, t1, 0.05)?;
    let y = Observable::new(pauli::y())?;
    for p in traj.iter().step_by(10) {
        let exact = connection_state_at(&rho, &e, &sched, t0, p.t, t1)?;
        let mut diff = p.w.matrix().clone();
        diff += &-exact.matrix().clone();
        let v = weak_value(&y, &exact)?;
        println!("t = {:.2}  (s2)_w = {:+.5} {:+.5}i  |w_rk4 - w| = {:.1e}", p.t, v.re, v.im, operator_norm(&diff));
    }

    let win = Window { t0, t: 1.3, t1 };
    for pic in [Picture::Schroedinger, Picture::HeisenbergAt(0.5), Picture::ForwardHeisenberg, Picture::BackwardHeisenberg] {
        let v = weak_value_in_picture(&y, &rho, &e, &sched, win, pic)?;
        println!("{pic:?}: {:+.12} {:+.12}i", v.re, v.im);
    }
    Ok(())
}
