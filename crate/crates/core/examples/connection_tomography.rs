//! Reconstruction of w from the weak values of an operator basis, with and
//! without noise.
//!
//! cargo run --example connection_tomography

use ppslab::connection::connection_state;
use ppslab::qmcore::operator_norm;
use ppslab::random;
use ppslab::tomography::{design_matrix, reconstruct_connection, simulate_weak_value_data, OperatorBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ppslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2, 3, 4] {
        let w = connection_state(&random::density(&mut rng, d), &random::effect(&mut rng, d))?;
        let basis = OperatorBasis::standard(d)?;
        let probes = basis.as_probes()?;
        let design = design_matrix(&probes, &basis)?;
        println!("d = {d} ({} basis, smallest singular value {:.3})", basis.label(), design.smallest_singular_value());
        for sigma in [0.0, 1e-3, 1e-2] {
            let data = simulate_weak_value_data(&w, &probes, sigma, 7)?;
            let rec = reconstruct_connection(&data, &probes, &basis)?;
            let mut diff = rec.w.matrix().clone();
            diff += &-w.matrix().clone();
            println!("  sigma = {sigma:<6} error = {:.2e}  renormalized = {}", operator_norm(&diff), rec.renormalized);
        }
    }
    Ok(())
}
