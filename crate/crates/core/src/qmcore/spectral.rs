//! Hermitian eigendecomposition, spectral grouping and matrix functions.

use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{hermiticity_defect, operator_norm, validate_hermitian, ComplexMatrix};
use super::{DEGENERACY_REL_TOL, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Rebuilds `Σ f(λ_k) |v_k><v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for i in 0..d {
                scaled[(i, k)] *= fk;
            }
        }
        ComplexMatrix::from_inner(scaled * self.vectors.adjoint())
    }
}

fn ensure_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !validate_hermitian(m, HERMITIAN_TOL) {
        return Err(Error::NotHermitian { deviation: hermiticity_defect(m) });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, sorted by ascending eigenvalue.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    ensure_hermitian(m)?;
    Ok(eigen_unchecked(m))
}

pub(crate) fn eigen_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let sym = m.hermitian_part().into_inner();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let d = order.len();
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Smallest eigenvalue of a Hermitian matrix (Hermiticity not re-checked).
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigen_unchecked(m).values[0]
}

/// Largest eigenvalue of a Hermitian matrix (Hermiticity not re-checked).
pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    *eigen_unchecked(m).values.last().expect("non-empty matrix")
}

/// `exp(-i H dt)` for Hermitian `H`, with ħ = 1.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt} is not finite")));
    }
    let eig = hermitian_eigen(h)?;
    Ok(eig.map(|lambda| C64::from_polar(1.0, -lambda * dt)))
}

/// Principal square root of a positive semidefinite matrix. Tiny negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.map(|lambda| C64::new(lambda.max(0.0).sqrt(), 0.0)))
}

/// A Hermitian operator with its cached spectral decomposition
/// `A = Σ_i a_i Π_i` over distinct eigenvalues.
#[derive(Clone, Debug)]
pub struct Observable {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl Observable {
    /// Decomposes `m` with the default degeneracy threshold `1e-8 · ‖m‖`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tol = DEGENERACY_REL_TOL * operator_norm(&m);
        spectral_decompose(&m, tol)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Spectral projectors, aligned with [`Observable::eigenvalues`].
    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `f(A) = Σ_i f(a_i) Π_i`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim());
        for (a, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out += &p.scale(f(*a));
        }
        out
    }

    /// `U A U†`, reusing the decomposition.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Observable {
        let ud = u.adjoint();
        Observable {
            matrix: u * &self.matrix * &ud,
            eigenvalues: self.eigenvalues.clone(),
            projectors: self.projectors.iter().map(|p| u * p * &ud).collect(),
        }
    }
}

/// Spectral decomposition with eigenvalues closer than `tol_deg` (sorted-gap
/// clustering) merged into one degenerate group.
pub fn spectral_decompose(m: &ComplexMatrix, tol_deg: f64) -> Result<Observable> {
    let eig = hermitian_eigen(m)?;
    let d = eig.values.len();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match groups.last_mut() {
            Some(g) if eig.values[k] - eig.values[*g.last().unwrap()] <= tol_deg => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|&k| eig.values[k]).sum::<f64>() / g.len() as f64;
        let mut p = DMatrix::<C64>::zeros(d, d);
        for &k in g {
            let v = eig.vectors.column(k);
            p += &v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(ComplexMatrix::from_inner(p));
    }

    Ok(Observable { matrix: m.clone(), eigenvalues, projectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmcore::pauli;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    #[test]
    fn diagonal_spectrum() {
        let obs = Observable::new(pauli::z()).unwrap();
        assert_eq!(obs.eigenvalues().len(), 2);
        assert!((obs.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((obs.eigenvalues()[1] - 1.0).abs() < 1e-15);
        assert!(close(&obs.projectors()[1], &ComplexMatrix::diag(&[1.0, 0.0]), 1e-15));
        assert!(close(&obs.projectors()[0], &ComplexMatrix::diag(&[0.0, 1.0]), 1e-15));
    }

    #[test]
    fn identity_is_fully_degenerate() {
        let obs = spectral_decompose(&ComplexMatrix::identity(2), 1e-8).unwrap();
        assert_eq!(obs.eigenvalues(), &[1.0]);
        assert!(close(&obs.projectors()[0], &ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn sigma_x_projectors() {
        let obs = Observable::new(pauli::x()).unwrap();
        let s = FRAC_1_SQRT_2;
        let plus = ComplexMatrix::projector(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
        let minus = ComplexMatrix::projector(&[C64::new(s, 0.0), C64::new(-s, 0.0)]);
        assert!((obs.eigenvalues()[1] - 1.0).abs() < 1e-14);
        assert!(close(&obs.projectors()[1], &plus, 1e-14));
        assert!(close(&obs.projectors()[0], &minus, 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(2, &[0., 1., 0., 0.]).unwrap();
        assert!(matches!(Observable::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exponentials() {
        assert!(close(&unitary_from_hamiltonian(&ComplexMatrix::zeros(2), 3.7).unwrap(), &ComplexMatrix::identity(2), 1e-15));
        let u = unitary_from_hamiltonian(&pauli::z(), PI).unwrap();
        assert!(close(&u, &ComplexMatrix::identity(2).scale_real(-1.0), 1e-14));
        let u = unitary_from_hamiltonian(&pauli::x(), PI / 2.0).unwrap();
        assert!(close(&u, &pauli::x().scale(C64::new(0.0, -1.0)), 1e-14));
    }

    #[test]
    fn square_root() {
        let e = ComplexMatrix::diag(&[0.81, 0.04]);
        assert!(close(&psd_sqrt(&e).unwrap(), &ComplexMatrix::diag(&[0.9, 0.2]), 1e-15));
    }
}
