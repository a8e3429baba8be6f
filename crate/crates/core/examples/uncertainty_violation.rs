//! Scan of the qubit ensemble rho = (I + l1 s1)/2, E = (I + l2 s2)/2 and the
//! region where the weak variances beat the uncertainty bound.
//!
//! cargo run --release --example uncertainty_violation

use ppslab::connection::{connection_state, weak_value};
use ppslab::qmcore::{pauli, Observable};
use ppslab::scenario::{qubit_ensemble, uncertainty_scan};

fn main() -> ppslab::Result<()> {
    let n = 21;
    let rows = uncertainty_scan(n)?;
    let violating = rows.iter().filter(|r| r.violates).count();
    println!("{violating} of {} grid points have var_sum < 1", rows.len());

    // coarse picture of the region, l2 increasing downwards
    for j in 0..n {
        let line: String = (0..n).map(|i| if rows[i * n + j].violates { '#' } else { '.' }).collect();
        println!("  {line}");
    }

    let s3 = Observable::new(pauli::z())?;
    for (l1, l2) in [(0.0, 0.0), (0.6, 0.6), (0.8, 0.8), (1.0, -1.0)] {
        let (rho, e) = qubit_ensemble(l1, l2)?;
        let w = connection_state(&rho, &e)?;
        let r = rows.iter().find(|r| (r.lambda1 - l1).abs() < 1e-12 && (r.lambda2 - l2).abs() < 1e-12).unwrap();
        let v = weak_value(&s3, &w)?;
        println!(
            "l=({l1:+.1},{l2:+.1}) var_sum={:.4} min eig w'={:+.4} unusual={} (s3)_w={:.2}i",
            r.var_sum, r.wprime_min_eig, r.w_unusual, v.im
        );
    }
    Ok(())
}
