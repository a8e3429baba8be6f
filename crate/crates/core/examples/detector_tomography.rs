//! Recovering an unknown effect E from weak values with a maximally mixed
//! preparation. Weak and strong-measurement data give the same answer.
//!
//! cargo run --example detector_tomography

use ppslab::qmcore::operator_norm;
use ppslab::random;
use ppslab::tomography::{detector_tomography, detector_weak_values, weak_values_from_strong_pps, OperatorBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ppslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = 3;
    let e = random::effect(&mut rng, d);
    let p = e.matrix().trace().re / d as f64;
    let basis = OperatorBasis::standard(d)?;
    let probes = basis.as_probes()?;

    for (name, data) in [
        ("weak", detector_weak_values(&e, &probes)?),
        ("strong", weak_values_from_strong_pps(&e, &probes)?),
    ] {
        let est = detector_tomography(&data, &probes, &basis, p, 0.0)?;
        let mut diff = est.matrix().clone();
        diff += &-e.matrix().clone();
        println!("{name:>6} data: |E_est - E| = {:.2e}", operator_norm(&diff));
    }
    println!("E =\n{}", e.matrix());
    Ok(())
}
