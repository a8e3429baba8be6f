//! Dense complex linear algebra and validated quantum objects.
//!
//! Everything is built on [`ComplexMatrix`], a square matrix of `Complex<f64>`
//! with finite entries and dimension at most [`MAX_DIM`]. Hermitian problems go
//! through a single eigensolver path ([`hermitian_eigen`]); observables cache
//! their grouped spectral decomposition at construction.
//!
//! ħ = 1 throughout, so Hamiltonians are angular frequencies.

mod matrix;
mod spectral;
mod states;

pub use matrix::{commutes, operator_norm, validate_hermitian, ComplexMatrix, MatrixJson};
pub use spectral::{
    hermitian_eigen, max_eigenvalue, min_eigenvalue, psd_sqrt, spectral_decompose, unitary_from_hamiltonian,
    HermitianEigen, Observable,
};
pub use states::{DensityMatrix, Povm, PovmElement};

use crate::error::{Error, Result};

/// Relative tolerance for Hermiticity, trace and completeness checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed negative eigenvalue magnitude for positive operators.
pub const POSITIVE_TOL: f64 = 1e-10;
/// Degeneracy threshold relative to the operator norm.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;
/// Unitarity tolerance, `‖U†U - I‖`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;

/// `‖U†U - I‖`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    operator_norm(&(&(u.adjoint() * u) - &ComplexMatrix::identity(u.dim())))
}

pub fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    let deviation = unitarity_defect(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Pauli matrices.
pub mod pauli {
    use super::ComplexMatrix;
    use crate::C64;

    fn m(entries: [C64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &entries).expect("2x2 constant")
    }

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn x() -> ComplexMatrix {
        m([O, ONE, ONE, O])
    }

    pub fn y() -> ComplexMatrix {
        m([O, -I, I, O])
    }

    pub fn z() -> ComplexMatrix {
        m([ONE, O, O, -ONE])
    }

    /// `σ_k` for `k` in 0..=3, with `σ_0 = I`.
    pub fn by_index(k: usize) -> ComplexMatrix {
        match k {
            0 => ComplexMatrix::identity(2),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("Pauli index {k} out of range"),
        }
    }
}

/// Common qubit kets.
pub mod kets {
    use crate::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn zero() -> Vec<C64> {
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }

    pub fn one() -> Vec<C64> {
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    }

    pub fn plus() -> Vec<C64> {
        vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]
    }

    pub fn minus() -> Vec<C64> {
        vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]
    }

    /// `(|0> ± i|1>)/√2`, the σ₂ eigenstates.
    pub fn plus_i() -> Vec<C64> {
        vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)]
    }

    pub fn minus_i() -> Vec<C64> {
        vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2)]
    }

    /// `cos θ |0> + sin θ |1>`.
    pub fn real_angle(theta: f64) -> Vec<C64> {
        vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]
    }
}
