//! Pointer shift over coupling strength approaches Re A_w as g -> 0.
//! A carrier momentum p0 couples in Im A_w at first order.
//!
//! cargo run --release --example weak_limit

use std::f64::consts::PI;

use ppslab::connection::{connection_state, weak_value};
use ppslab::meter::{pointer_expectation_pps, weak_limit_estimate, MeterConfig};
use ppslab::qmcore::{kets, pauli, DensityMatrix, Observable, PovmElement};
use ppslab::C64;

fn main() -> ppslab::Result<()> {
    let rho = DensityMatrix::pure(&kets::zero())?;
    let e = PovmElement::pure(&[C64::new((PI / 6.0).cos(), 0.0), C64::from_polar((PI / 6.0).sin(), PI / 4.0)])?;
    let x = Observable::new(pauli::x())?;
    let aw = weak_value(&x, &connection_state(&rho, &e)?)?;
    println!("A_w = {:.6} {:+.6}i", aw.re, aw.im);

    for p0 in [0.0, 1.0] {
        let cfg = MeterConfig { momentum: p0, ..MeterConfig::gaussian(0.0) };
        let meter = cfg.build()?;
        println!("p0 = {p0}");
        for g in [1e-1, 1e-2, 1e-3] {
            let shift = (pointer_expectation_pps(&rho, &e, &x, &meter.with_coupling(g))? - meter.initial_pointer()) / g;
            println!("  g = {g:<6} shift/g = {shift:.8}  error = {:.3e}", (shift - aw.re).abs());
        }
        let est = weak_limit_estimate(&rho, &e, &x, &meter, 1e-2, 5e-3)?;
        println!("  extrapolated {:.10}", est.extrapolated);
    }
    Ok(())
}
