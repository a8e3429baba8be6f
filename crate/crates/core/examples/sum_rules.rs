//! Posterior family of a random POVM: probability-weighted connection states
//! rebuild the preparation, and the diagonal case reduces to Bayes' rule.
//!
//! cargo run --example sum_rules

use ppslab::connection::{classical_posterior, posterior_family, ClassicalEnsemble};
use ppslab::qmcore::{operator_norm, DensityMatrix, Povm, PovmElement};
use ppslab::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ppslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random::density(&mut rng, 3);
    let povm = random::povm(&mut rng, 3, 4);
    let a = random::observable(&mut rng, 3);
    let fam = posterior_family(&rho, &povm)?;
    println!("P_l = {:.4?}", fam.probabilities());
    let mut diff = fam.reconstruct_state();
    diff += &-rho.matrix().clone();
    println!("|sum P_l w_l - rho| = {:.2e}", operator_norm(&diff));
    let avg = fam.average_weak_value(&a)?;
    let mean = a.matrix().trace_product(rho.matrix()).re;
    println!("sum P_l A_w,l = {:.6} {:+.1e}i, <A> = {mean:.6}", avg.re, avg.im);

    let priors = vec![0.5, 0.3, 0.2];
    let likelihoods = vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.2, 0.8]];
    let rho = DensityMatrix::diagonal(&priors)?;
    let povm = Povm::new(vec![
        PovmElement::diagonal(&[0.9, 0.4, 0.2])?,
        PovmElement::diagonal(&[0.1, 0.6, 0.8])?,
    ])?;
    let fam = posterior_family(&rho, &povm)?;
    let ens = ClassicalEnsemble::new(priors, likelihoods)?;
    for l in 0..2 {
        let (p, post) = classical_posterior(&ens, l)?;
        let w = fam.outcomes()[l].state.as_ref().unwrap();
        let diag: Vec<f64> = (0..3).map(|i| w.matrix().get(i, i).re).collect();
        println!("outcome {l}: P = {p:.3}, Bayes {post:.4?}, diag(w) {diag:.4?}");
    }
    Ok(())
}
