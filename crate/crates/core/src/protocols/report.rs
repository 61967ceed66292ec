use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logical::{gate_fidelity, LogicalAction};

/// Measured phases, all in `(−π, π]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseBook {
    /// Diagonal phase of each basis state relative to the first, in label order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_state: Vec<f64>,
    /// Per-input phases removed before scoring.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correction: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_2: Option<f64>,
}

/// One ramp time of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub leakage: f64,
    pub fidelity: f64,
    pub flagged: bool,
}

/// Outcome of a logical-gate protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ramp_times: Vec<f64>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub action: LogicalAction,
    pub target_name: String,
    #[serde(with = "cmatrix")]
    pub target: DMatrix<Complex64>,
    /// Fidelity to the target after phase correction.
    pub fidelity: f64,
    pub leakage: f64,
    pub leakage_threshold: f64,
    pub flagged: bool,
    pub phases: PhaseBook,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl ProtocolReport {
    pub(crate) fn new(protocol: &str, action: LogicalAction, target_name: &str, target: DMatrix<Complex64>) -> Self {
        let fidelity = gate_fidelity(&action.matrix, &target);
        let leakage = action.leakage;
        ProtocolReport {
            protocol: protocol.into(),
            parameters: BTreeMap::new(),
            ramp_times: vec![],
            input_labels: vec![],
            output_labels: vec![],
            action,
            target_name: target_name.into(),
            target,
            fidelity,
            leakage,
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
            flagged: false,
            phases: PhaseBook::default(),
            sweep: vec![],
            diagnostics: BTreeMap::new(),
        }
    }

    pub(crate) fn with_labels(mut self, input: &[String], output: &[String]) -> Self {
        self.input_labels = input.to_vec();
        self.output_labels = output.to_vec();
        self
    }

    pub(crate) fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }

    pub(crate) fn diag(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    pub(crate) fn set_threshold(&mut self, threshold: f64) {
        self.leakage_threshold = threshold;
        self.flagged = self.leakage > threshold;
    }

    /// `‖M†M − (1 − leakage) I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.action.matrix;
        let n = m.nrows();
        let g = m.adjoint() * m - DMatrix::<Complex64>::identity(n, n) * Complex64::new(1.0 - self.leakage, 0.0);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Summary table: one row per sweep entry, or one row for the report.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["protocol", "tau", "fidelity", "leakage", "delta", "delta_1", "delta_2", "flagged"])
            .map_err(csv_err)?;
        let f = |x: f64| format!("{x:.16e}");
        let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
        let ph = &self.phases;
        let rows: Vec<(Option<f64>, f64, f64, bool)> = if self.sweep.is_empty() {
            vec![(self.ramp_times.last().copied(), self.fidelity, self.leakage, self.flagged)]
        } else {
            self.sweep.iter().map(|r| (Some(r.tau), r.fidelity, r.leakage, r.flagged)).collect()
        };
        for (tau, fid, leak, flag) in rows {
            w.write_record([
                self.protocol.clone(),
                opt(tau),
                f(fid),
                f(leak),
                opt(ph.delta),
                opt(ph.delta_1),
                opt(ph.delta_2),
                flag.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Default leakage above which a protocol result is flagged.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 0.2;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn pauli_x_gate() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_z_gate() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn hadamard_gate() -> DMatrix<Complex64> {
    let h = FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
}

/// `Λ_n = diag(1, …, 1, −1)` on `n` qubits.
pub fn controlled_z_gate(n: usize) -> DMatrix<Complex64> {
    let d = 1usize << n;
    DMatrix::from_fn(d, d, |i, j| match (i == j, i == d - 1) {
        (true, true) => c(-1.0),
        (true, false) => c(1.0),
        _ => c(0.0),
    })
}

/// Largest fidelity of `m` to `D₁ G D₂` over diagonal phase matrices.
pub fn phase_equivalent_fidelity(m: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> (f64, DMatrix<Complex64>) {
    let n = m.nrows();
    let mut best = (gate_fidelity(m, target), target.clone());
    let starts = 12;
    for s in 0..starts * starts {
        let mut a: Vec<f64> = (0..n).map(|i| if i == 1 { 2.0 * PI * (s / starts) as f64 / starts as f64 } else { 0.0 }).collect();
        let mut b: Vec<f64> = (0..n).map(|j| if j == 1 { 2.0 * PI * (s % starts) as f64 / starts as f64 } else { 0.0 }).collect();
        // alternate the optimal column and row phases
        for _ in 0..50 {
            for j in 0..n {
                let col: Complex64 = (0..n)
                    .map(|i| (target[(i, j)] * Complex64::from_polar(1.0, a[i])).conj() * m[(i, j)])
                    .sum();
                b[j] = col.arg();
            }
            for i in 0..n {
                let row: Complex64 = (0..n)
                    .map(|j| (target[(i, j)] * Complex64::from_polar(1.0, b[j])).conj() * m[(i, j)])
                    .sum();
                a[i] = row.arg();
            }
        }
        let g = DMatrix::from_fn(n, n, |i, j| target[(i, j)] * Complex64::from_polar(1.0, a[i] + b[j]));
        let f = gate_fidelity(m, &g);
        if f > best.0 + 1e-14 {
            best = (f, g);
        }
    }
    best
}

/// Circular mean of angles, in `(−π, π]`.
pub(crate) fn mean_angle(angles: &[f64]) -> f64 {
    let s: Complex64 = angles.iter().map(|&a| Complex64::from_polar(1.0, a)).sum();
    crate::logical::wrap_angle(s.arg())
}

/// Largest pairwise angular distance.
pub(crate) fn angle_spread(angles: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in angles {
        for b in angles {
            worst = worst.max(crate::logical::wrap_angle(a - b).abs());
        }
    }
    worst
}

mod cmatrix {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}
