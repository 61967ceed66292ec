use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::code::LogicalCode;
use crate::error::{Error, Result};
use crate::{Operator, State};

/// What acted on the code.
pub enum Process<'a> {
    Operator(&'a Operator),
    /// `U|in_j⟩` for every input codeword, in order.
    Images(&'a [State]),
}

/// Matrix of a process restricted to code spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalAction {
    /// Phase-fixed `M_ij = ⟨out_i|U|in_j⟩`.
    pub matrix: DMatrix<Complex64>,
    pub leakage: f64,
    /// Phase removed from the raw matrix, in `(−π, π]`.
    pub global_phase: f64,
    pub fidelity_to_unitary: f64,
}

#[derive(Serialize, Deserialize)]
struct ActionJson {
    dim: usize,
    /// Row-major `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    leakage: f64,
    global_phase: f64,
    fidelity_to_unitary: f64,
}

impl Serialize for LogicalAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.matrix.nrows();
        ActionJson {
            dim: n,
            matrix: (0..n)
                .map(|i| (0..n).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
                .collect(),
            leakage: self.leakage,
            global_phase: self.global_phase,
            fidelity_to_unitary: self.fidelity_to_unitary,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogicalAction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ActionJson::deserialize(d)?;
        if j.matrix.len() != j.dim || j.matrix.iter().any(|r| r.len() != j.dim) {
            return Err(serde::de::Error::custom("matrix shape does not match dim"));
        }
        Ok(LogicalAction {
            matrix: DMatrix::from_fn(j.dim, j.dim, |r, c| Complex64::new(j.matrix[r][c][0], j.matrix[r][c][1])),
            leakage: j.leakage,
            global_phase: j.global_phase,
            fidelity_to_unitary: j.fidelity_to_unitary,
        })
    }
}

impl LogicalAction {
    pub fn from_matrix(raw: DMatrix<Complex64>) -> Self {
        let n = raw.nrows() as f64;
        let leakage = (1.0 - (raw.adjoint() * &raw).trace().re / n).clamp(0.0, 1.0);
        let sv = singular_values(&raw);
        let fidelity_to_unitary = (sv.iter().sum::<f64>() / n).powi(2).clamp(0.0, 1.0);
        let (matrix, global_phase) = fix_phase(raw);
        LogicalAction {
            matrix,
            leakage,
            global_phase,
            fidelity_to_unitary,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Makes the largest-magnitude entry real and positive (first in
/// column-major order on ties).
fn fix_phase(m: DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return (m, 0.0);
    }
    let pivot = m.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied().unwrap();
    let phase = pivot.arg();
    let rot = Complex64::from_polar(1.0, -phase);
    (m.map(|z| z * rot), wrap_angle(phase))
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = a.rem_euclid(two_pi);
    if x > std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    SVD::new(m.clone(), false, false).singular_values.iter().copied().collect()
}

/// Unitary factor `W` of the polar decomposition `M = W P`.
pub fn closest_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = SVD::new(m.clone(), true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// `M_ij = ⟨out_i|U|in_j⟩` with leakage, unitarity and phase bookkeeping.
pub fn extract_action(code_in: &LogicalCode, code_out: &LogicalCode, process: Process<'_>) -> Result<LogicalAction> {
    if *code_in.basis != *code_out.basis {
        return Err(Error::BasisMismatch("codes live in different bases".into()));
    }
    if code_in.dim() != code_out.dim() {
        return Err(Error::invalid("input and output codes differ in size"));
    }
    let images: Vec<State> = match process {
        Process::Operator(op) => code_in
            .codewords
            .iter()
            .map(|c| op.apply(c))
            .collect::<Result<_>>()?,
        Process::Images(imgs) => {
            if imgs.len() != code_in.dim() {
                return Err(Error::invalid("one image per input codeword"));
            }
            imgs.to_vec()
        }
    };
    let n = code_in.dim();
    let mut raw = DMatrix::zeros(n, n);
    for (j, img) in images.iter().enumerate() {
        for (i, out) in code_out.codewords.iter().enumerate() {
            raw[(i, j)] = out.inner(img)?;
        }
    }
    Ok(LogicalAction::from_matrix(raw))
}

/// Fidelity `|tr(G† M)|² / (N · tr(M† M))` of the action to a target gate,
/// insensitive to the global phase and to the overall shrinkage that
/// leakage already accounts for.
pub fn gate_fidelity(m: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows() as f64;
    let norm = (m.adjoint() * m).trace().re;
    if norm == 0.0 {
        return 0.0;
    }
    ((target.adjoint() * m).trace().norm_sqr() / (n * norm)).clamp(0.0, 1.0)
}

/// `M · diag(e^{-i φ_j})`: removes per-input phases.
pub fn phase_corrected(m: &DMatrix<Complex64>, phases: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * Complex64::from_polar(1.0, -phases[j]))
}

/// Single-qubit input for [`bloch_readout`].
pub enum BlochInput<'a> {
    Pure(&'a [Complex64; 2]),
    Density(&'a [[Complex64; 2]; 2]),
}

/// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)`.
pub fn bloch_readout(input: BlochInput<'_>) -> [f64; 3] {
    let rho = match input {
        BlochInput::Pure(v) => {
            let n = v[0].norm_sqr() + v[1].norm_sqr();
            [
                [v[0] * v[0].conj() / n, v[0] * v[1].conj() / n],
                [v[1] * v[0].conj() / n, v[1] * v[1].conj() / n],
            ]
        }
        BlochInput::Density(r) => *r,
    };
    [2.0 * rho[1][0].re, 2.0 * rho[1][0].im, (rho[0][0] - rho[1][1]).re]
}
