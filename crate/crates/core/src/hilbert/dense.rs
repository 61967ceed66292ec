//! Dense `f64` reference implementations used as oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::SparseOperator;
use super::state::StateVector;
use crate::error::{Error, Result};

pub fn to_dense(op: &SparseOperator<f64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(op.nrows(), op.ncols());
    for (r, c, v) in op.triplets() {
        m[(r, c)] += v;
    }
    m
}

pub fn to_dvector(psi: &StateVector<f64>) -> DVector<Complex64> {
    DVector::from_column_slice(psi.amplitudes())
}

/// Full Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(op: &SparseOperator<f64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if op.nrows() != op.ncols() {
        return Err(Error::invalid("eigh needs a square operator"));
    }
    let eig = to_dense(op).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(op.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

pub fn eigvalsh(op: &SparseOperator<f64>) -> Result<Vec<f64>> {
    Ok(eigh(op)?.0)
}

/// Dense `exp(-i H t)` by scaling and squaring (Padé).
pub fn expm_minus_i(op: &SparseOperator<f64>, t: f64) -> DMatrix<Complex64> {
    (to_dense(op) * Complex64::new(0.0, -t)).exp()
}

/// `exp(-i H t) ψ` through the dense exponential.
pub fn evolve_dense(op: &SparseOperator<f64>, psi: &StateVector<f64>, t: f64) -> StateVector<f64> {
    let out = expm_minus_i(op, t) * to_dvector(psi);
    StateVector::from_amplitudes(psi.basis().clone(), out.as_slice().to_vec())
        .expect("dimension preserved")
}
