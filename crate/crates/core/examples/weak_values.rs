//! Connection state of a pure pre/post-selected qubit, its weak values and
//! the usual/unusual classification.
//!
//! cargo run --example weak_values

use ppslab::connection::{classify, connection_state, norm_bound_check, weak_value, CLASSIFY_TOL};
use ppslab::qmcore::{kets, pauli, DensityMatrix, Observable, PovmElement};
use ppslab::C64;

fn main() -> ppslab::Result<()> {
    let rho = DensityMatrix::pure(&kets::zero())?;
    let theta = 0.45 * std::f64::consts::PI;
    let effect = PovmElement::pure(&[C64::new(theta.cos(), 0.0), C64::from_polar(theta.sin(), 0.3)])?;
    let w = connection_state(&rho, &effect)?;

    println!("w =\n{}", w.matrix());
    println!("P = Tr(rho E) = {:.6}", w.post_selection_prob().unwrap());
    for (name, k) in [("sigma_1", 1), ("sigma_2", 2), ("sigma_3", 3)] {
        let a = Observable::new(pauli::by_index(k))?;
        let v = weak_value(&a, &w)?;
        println!("({name})_w = {:+.6} {:+.6}i", v.re, v.im);
    }

    let c = classify(&w, CLASSIFY_TOL);
    println!("usual: {} (|w''| = {:.4}, min eig w' = {:.4})", c.is_usual(), c.antiherm_norm, c.herm_min_eigenvalue);
    let nb = norm_bound_check(&w);
    println!("|w| = {:.4} <= c' + c'' = {:.4}", nb.norm, nb.c_herm + nb.c_antiherm);

    // commuting factors give a proper density matrix
    let mixed = DensityMatrix::diagonal(&[0.7, 0.3])?;
    let diag = PovmElement::diagonal(&[0.2, 0.9])?;
    let w2 = connection_state(&mixed, &diag)?;
    println!("diagonal case usual: {}\n{}", classify(&w2, CLASSIFY_TOL).is_usual(), w2.matrix());
    Ok(())
}
