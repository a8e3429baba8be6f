//! Growth of |w| = 1/|<phi|psi>| for nearly orthogonal pre- and post-selection.
//!
//! cargo run --example amplification

use ppslab::connection::{connection_state, weak_value};
use ppslab::qmcore::{pauli, DensityMatrix, Observable, PovmElement};
use ppslab::scenario::amplification_scan;
use ppslab::C64;

fn main() -> ppslab::Result<()> {
    let overlaps = [1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-6];
    println!("{:>10} {:>14} {:>12} {:>12}", "overlap", "|w|", "c'", "c''");
    for r in amplification_scan(&overlaps)? {
        println!("{:>10.0e} {:>14.6e} {:>12.4e} {:>12.4e}", r.overlap, r.norm, r.c_herm, r.c_antiherm);
    }

    // the anomalous weak value of s3 grows like 1/overlap
    let z = Observable::new(pauli::z())?;
    let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)])?;
    for eps in [0.1f64, 0.01, 0.001] {
        let e = PovmElement::pure(&[C64::new(1.0, 0.0), C64::new(eps - 1.0, 0.0)])?;
        let v = weak_value(&z, &connection_state(&rho, &e)?)?;
        println!("eps = {eps:<6} (s3)_w = {:+.3}", v.re);
    }
    Ok(())
}
