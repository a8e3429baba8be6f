//! Seeded generators for random states, effects, POVMs, observables and
//! unitaries. Used by the property tests, the scenarios and the examples.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmcore::{hermitian_eigen, ComplexMatrix, DensityMatrix, Observable, Povm, PovmElement};
use crate::C64;

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| gaussian_c64(rng))
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = ginibre(rng, dim).into_inner().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::new(q).expect("finite unitary")
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ginibre(rng, dim).hermitian_part()
}

/// Random observable (non-degenerate with probability one).
pub fn observable<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    Observable::new(hermitian(rng, dim)).expect("Hermitian by construction")
}

/// Random full-rank mixed state, `G G† / Tr(G G†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = ginibre(rng, dim);
    let m = &g * &g.adjoint();
    DensityMatrix::from_unnormalized(&m).expect("positive by construction")
}

/// Random normalized ket.
pub fn ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian_c64(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// `U diag(values) U†`.
pub fn with_spectrum(u: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    u * &ComplexMatrix::diag(values) * &u.adjoint()
}

/// Random normalized effect: eigenvalues uniform in `[0.05, 1]`, Haar eigenbasis.
pub fn effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PovmElement {
    let u = unitary(rng, dim);
    let vals: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    PovmElement::new(with_spectrum(&u, &vals)).expect("positive by construction")
}

/// Random POVM with `outcomes` full-rank elements: `S^{-1/2} G_l S^{-1/2}`
/// with `G_l` Wishart and `S = Σ G_l`.
pub fn povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, dim);
            &g * &g.adjoint()
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(dim);
    for g in &raw {
        sum += g;
    }
    let eig = hermitian_eigen(&sum).expect("Hermitian sum");
    let inv_sqrt = eig.map(|l| C64::new(1.0 / l.sqrt(), 0.0));
    let mut elements: Vec<ComplexMatrix> = raw.iter().map(|g| &(&inv_sqrt * g) * &inv_sqrt).collect();
    // absorb the roundoff in the last element so the family sums to I
    let mut partial = ComplexMatrix::zeros(dim);
    for e in &elements[..outcomes - 1] {
        partial += e;
    }
    let last = (&ComplexMatrix::identity(dim) - &partial).hermitian_part();
    elements[outcomes - 1] = last;
    Povm::new(
        elements
            .into_iter()
            .map(|m| PovmElement::new(m.hermitian_part()))
            .collect::<crate::Result<_>>()
            .expect("positive by construction"),
    )
    .expect("complete by construction")
}

/// Random discrete probability vector with entries bounded away from zero.
pub fn probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Observable diagonal in the basis `u` with the given (possibly repeated) eigenvalues.
pub fn observable_in_basis(u: &ComplexMatrix, values: &[f64]) -> Observable {
    Observable::new(with_spectrum(u, values).hermitian_part()).expect("Hermitian by construction")
}

/// Random integer-valued spectrum of length `dim` drawn from `{-2, ..., 2}`,
/// producing degeneracies at small `dim` on purpose.
pub fn small_integer_spectrum<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect()
}
