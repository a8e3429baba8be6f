//! Finite-dimensional von Neumann meter: the full system-meter calculation
//! against the connection-state shortcut, which needs a commuting triple.
//!
//! cargo run --release --example meter_model

use ppslab::connection::connection_state;
use ppslab::measurement::abl_probabilities;
use ppslab::meter::{
    classical_pointer_average, pointer_expectation_connection, pointer_expectation_pps,
    pointer_expectation_preselected, ConnectionPart, MeterConfig,
};
use ppslab::qmcore::{kets, pauli, DensityMatrix, Observable, PovmElement};

fn main() -> ppslab::Result<()> {
    let meter = MeterConfig::gaussian(1.5).build()?;
    let z = Observable::new(pauli::z())?;
    println!("meter: {} grid points, g = {}", meter.dim(), meter.g());

    let plus = DensityMatrix::pure(&kets::plus())?;
    println!("no post-selection, rho = |+>: <R> = {:+.6}", pointer_expectation_preselected(&plus, &z, &meter)?);

    // [A, rho] = 0, so the shortcut is allowed
    let rho = DensityMatrix::diagonal(&[0.75, 0.25])?;
    let e = PovmElement::pure(&kets::plus_i())?;
    let w = connection_state(&rho, &e)?;
    let full = pointer_expectation_pps(&rho, &e, &z, &meter)?;
    let short = pointer_expectation_connection(&w, &z, &meter, ConnectionPart::Hermitian)?;
    let abl = abl_probabilities(&rho, &z, &e)?;
    let classical = classical_pointer_average(&abl, &z, &meter);
    println!("commuting: full {full:+.10} connection {short:+.10} ABL mixture {classical:+.10}");

    // generic triple: the full calculation still works, the shortcut refuses
    let rho = DensityMatrix::pure(&kets::plus())?;
    let e = PovmElement::pure(&kets::real_angle(1.1))?;
    let w = connection_state(&rho, &e)?;
    println!("generic: full {:+.6}", pointer_expectation_pps(&rho, &e, &z, &meter)?);
    println!("generic: connection -> {}", pointer_expectation_connection(&w, &z, &meter, ConnectionPart::Full).unwrap_err());
    Ok(())
}
