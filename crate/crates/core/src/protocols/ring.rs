use nalgebra::DMatrix;
use num_complex::Complex64;

use super::report::{pauli_x_gate, pauli_z_gate, ProtocolReport};
use crate::error::{Error, Result};
use crate::logical::{extract_action, gate_fidelity, ring_translation, twist_operator, LogicalAction, LogicalCode, Process};
use crate::Operator;

/// Ring sites in twist order (origin first).
fn ring_sites(code: &LogicalCode) -> Result<Vec<usize>> {
    let [ring] = code.meta.rings.as_slice() else {
        return Err(Error::invalid("pump and twist act on a single-ring code"));
    };
    if code.dim() != 2 {
        return Err(Error::invalid("single-ring code must hold two codewords"));
    }
    let origin = code.meta.twist_origin.unwrap_or(ring[0]);
    let k = ring
        .iter()
        .position(|&s| s == origin)
        .ok_or_else(|| Error::invalid(format!("twist origin {origin} not on the ring")))?;
    let mut sites = ring[k..].to_vec();
    sites.extend_from_slice(&ring[..k]);
    Ok(sites)
}

fn power(op: &Operator, k: usize) -> Result<Operator> {
    let mut out = Operator::identity(op.basis().clone());
    for _ in 0..k {
        out = out.compose(op)?;
    }
    Ok(out)
}

fn gate_power(g: DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    (0..k).fold(DMatrix::identity(2, 2), |acc, _| acc * &g)
}

fn run_ring(code: &LogicalCode, name: &str, op: Operator, k: usize, target: DMatrix<Complex64>, target_name: &str) -> Result<ProtocolReport> {
    let sites = ring_sites(code)?;
    let once = extract_action(code, code, Process::Operator(&op))?;
    let action = LogicalAction::from_matrix(gate_power(once.matrix, k));
    let raw = extract_action(code, code, Process::Operator(&power(&op, k)?))?;
    let mut r = ProtocolReport::new(name, action, target_name, target.clone())
        .with_labels(&code.labels, &code.labels)
        .param("L", sites.len() as f64)
        .param("repetitions", k as f64);
    r.diag("operator_power_fidelity", gate_fidelity(&raw.matrix, &target));
    r.diag("operator_power_leakage", raw.leakage);
    r.diag("unitarity_defect", r.unitarity_defect());
    let t = r.leakage_threshold;
    r.set_threshold(t);
    Ok(r)
}

/// Pump repeated `k` times, each round read out in the code space; target
/// `X_L^k`. The bare operator power `T^k` is scored as a diagnostic.
pub fn run_pump_times(code: &LogicalCode, k: usize) -> Result<ProtocolReport> {
    let sites = ring_sites(code)?;
    let t = ring_translation(&code.basis, &sites, 1)?;
    let target = gate_power(pauli_x_gate(), k);
    run_ring(code, "pump", t, k, target, if k % 2 == 1 { "X" } else { "I" })
}

/// Twist repeated `k` times, each round read out in the code space; target
/// `Z_L^k`. The bare operator power `F^k` is scored as a diagnostic.
pub fn run_twist_times(code: &LogicalCode, k: usize) -> Result<ProtocolReport> {
    let sites = ring_sites(code)?;
    let f = twist_operator(&code.basis, &sites)?;
    let target = gate_power(pauli_z_gate(), k);
    run_ring(code, "twist", f, k, target, if k % 2 == 1 { "Z" } else { "I" })
}

/// One-site translation on a ring code, scored against `X_L`.
pub fn run_pump(code: &LogicalCode) -> Result<ProtocolReport> {
    run_pump_times(code, 1)
}

/// Twist `F` on a ring code, scored against `Z_L` up to a global phase.
pub fn run_twist(code: &LogicalCode) -> Result<ProtocolReport> {
    run_twist_times(code, 1)
}
