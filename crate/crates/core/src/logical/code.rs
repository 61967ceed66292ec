use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::states::{dimer_state, ring_covering, ring_translation, twist_operator};
use crate::error::{Error, Result};
use crate::hilbert::SpinBasis;
use crate::{Operator, State};

/// How a code was built.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodeMeta {
    pub construction: String,
    /// Site carrying `n = 1` in twist operators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_origin: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rings: Vec<Vec<usize>>,
}

/// Orthonormal codewords with bitstring labels.
#[derive(Clone, Debug)]
pub struct LogicalCode {
    pub basis: Arc<SpinBasis>,
    pub codewords: Vec<State>,
    pub labels: Vec<String>,
    pub meta: CodeMeta,
}

impl LogicalCode {
    pub fn dim(&self) -> usize {
        self.codewords.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.codewords.len().trailing_zeros() as usize
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.codewords.iter().enumerate() {
            for (j, b) in self.codewords.iter().enumerate() {
                let g = a.inner(b).expect("shared basis");
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).norm());
            }
        }
        worst
    }

    pub fn with_meta(mut self, meta: CodeMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Symmetric (Löwdin) orthonormalization `|c_i⟩ = Σ_j |s_j⟩ (S^{-1/2})_{ji}`.
pub fn code_from_states(states: &[State], labels: &[&str]) -> Result<LogicalCode> {
    let n = states.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("codeword count {n} is not a power of two")));
    }
    if labels.len() != n {
        return Err(Error::invalid("one label per codeword"));
    }
    let basis = states[0].basis().clone();
    let gram = DMatrix::from_fn(n, n, |i, j| states[i].inner(&states[j]).unwrap_or(Complex64::new(f64::NAN, 0.0)));
    if gram.iter().any(|g| !g.re.is_finite()) {
        return Err(Error::BasisMismatch("codeword candidates live in different bases".into()));
    }
    let eig = gram.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 1e-10 {
        return Err(Error::RankDeficient(min));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::new(e.powf(-0.5), 0.0)));
    let s_inv_half = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    let codewords = (0..n)
        .map(|i| {
            let mut c = State::zeros(basis.clone());
            for (j, s) in states.iter().enumerate() {
                c.axpy(s_inv_half[(j, i)], s).expect("shared basis");
            }
            c
        })
        .collect();
    Ok(LogicalCode {
        basis,
        codewords,
        labels: labels.iter().map(|s| s.to_string()).collect(),
        meta: CodeMeta {
            construction: "lowdin".into(),
            ..Default::default()
        },
    })
}

/// A ring qubit: covering code plus its twist `F` and translation `T`.
#[derive(Clone, Debug)]
pub struct RingQubit {
    pub code: LogicalCode,
    pub twist: Operator,
    pub translation: Operator,
    pub sites: Vec<usize>,
}

impl RingQubit {
    /// Löwdin-orthonormalized coverings of the ring `sites` (traversal
    /// order, twist origin at `sites[0]`): `|0⟩` pairs `(s0,s1), …`, `|1⟩`
    /// contains the wrap singlet.
    pub fn new(basis: &Arc<SpinBasis>, sites: &[usize]) -> Result<Self> {
        if basis.n_sites() != sites.len() {
            return Err(Error::invalid("a ring qubit spans the whole basis"));
        }
        let a = dimer_state(basis, &ring_covering(sites, 0))?;
        let b = dimer_state(basis, &ring_covering(sites, 1))?;
        let code = code_from_states(&[a, b], &["0", "1"])?.with_meta(CodeMeta {
            construction: "lowdin dimer coverings".into(),
            twist_origin: Some(sites[0]),
            rings: vec![sites.to_vec()],
        });
        Ok(RingQubit {
            code,
            twist: twist_operator(basis, sites)?,
            translation: ring_translation(basis, sites, 1)?,
            sites: sites.to_vec(),
        })
    }
}
