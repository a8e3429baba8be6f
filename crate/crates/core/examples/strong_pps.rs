//! Strong intermediate measurements: ABL probabilities against Tr(Pi w'),
//! which only agree when A commutes with rho or E.
//!
//! cargo run --example strong_pps

use ppslab::connection::connection_state;
use ppslab::measurement::{abl_probabilities, projector_weak_values, strong_pps_via_connection};
use ppslab::qmcore::{kets, pauli, DensityMatrix, Observable, PovmElement};

fn main() -> ppslab::Result<()> {
    let z = Observable::new(pauli::z())?;

    let rho = DensityMatrix::diagonal(&[0.8, 0.2])?;
    let e = PovmElement::pure(&kets::plus_i())?;
    let w = connection_state(&rho, &e)?;
    println!("[A, rho] = 0");
    println!("  ABL         {:?}", abl_probabilities(&rho, &z, &e)?);
    println!("  Tr(Pi w')   {:?}", strong_pps_via_connection(&z, &w)?);

    let rho = DensityMatrix::pure(&kets::plus())?;
    let e = PovmElement::pure(&kets::real_angle(1.2))?;
    let w = connection_state(&rho, &e)?;
    println!("neither commutes");
    println!("  ABL         {:?}", abl_probabilities(&rho, &z, &e)?);
    let naive: Vec<f64> = projector_weak_values(&z, &w)?.iter().map(|c| c.re).collect();
    println!("  Re Tr(Pi w) {naive:?}");
    println!("  gated route {:?}", strong_pps_via_connection(&z, &w).unwrap_err());
    Ok(())
}
