#![allow(dead_code)]

use ppslab::dynamics::HamiltonianSchedule;
use ppslab::qmcore::{operator_norm, ComplexMatrix, DensityMatrix, Observable, PovmElement};
use ppslab::random;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    operator_norm(&(a - b))
}

#[derive(Clone, Copy, Debug)]
pub enum Branch {
    /// `[A, ρ] = 0`
    State,
    /// `[A, E] = 0`
    Effect,
}

/// `(ρ, E, A)` where `A` shares an eigenbasis with `ρ` or `E`; the spectrum of
/// `A` is drawn from small integers so degeneracies occur.
pub fn commuting_triple(rng: &mut ChaCha8Rng, d: usize, branch: Branch) -> (DensityMatrix, PovmElement, Observable) {
    let u = random::unitary(rng, d);
    let a = random::observable_in_basis(&u, &random::small_integer_spectrum(rng, d));
    match branch {
        Branch::State => {
            let p = random::probabilities(rng, d);
            let rho = DensityMatrix::new(random::with_spectrum(&u, &p).hermitian_part()).unwrap();
            (rho, random::effect(rng, d), a)
        }
        Branch::Effect => {
            let vals: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
            let e = PovmElement::new(random::with_spectrum(&u, &vals).hermitian_part()).unwrap();
            (random::density(rng, d), e, a)
        }
    }
}

pub fn random_triple(rng: &mut ChaCha8Rng, d: usize) -> (DensityMatrix, PovmElement, Observable) {
    (random::density(rng, d), random::effect(rng, d), random::observable(rng, d))
}

/// `[ρ, E] = 0` with a shared random eigenbasis.
pub fn commuting_pair(rng: &mut ChaCha8Rng, d: usize) -> (DensityMatrix, PovmElement) {
    let u = random::unitary(rng, d);
    let p = random::probabilities(rng, d);
    let vals: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    (
        DensityMatrix::new(random::with_spectrum(&u, &p).hermitian_part()).unwrap(),
        PovmElement::new(random::with_spectrum(&u, &vals).hermitian_part()).unwrap(),
    )
}

/// 1–3 random segments covering `[0, T]` with `T` in `[0.5, 2]`.
pub fn random_schedule(rng: &mut ChaCha8Rng, d: usize) -> HamiltonianSchedule {
    let n = rng.random_range(1..=3);
    let mut t = 0.0;
    let mut segs = Vec::new();
    for _ in 0..n {
        let len = rng.random_range(0.2..0.7);
        segs.push((t, t + len, random::hermitian(rng, d)));
        t += len;
    }
    HamiltonianSchedule::new(segs).unwrap()
}
