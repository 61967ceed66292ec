use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::report::{hadamard_gate, ProtocolReport};
use crate::error::{Error, Result};
use crate::logical::LogicalAction;

/// Result of one teleportation round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Teleported {
    /// `X^m`-corrected output.
    pub output: [Complex64; 2],
    /// Normalized state before the correction.
    pub raw: [Complex64; 2],
    /// Whether `X` was applied.
    pub correction: bool,
    /// Probability of the outcome `m`.
    pub probability: f64,
}

/// `⟨m|_S H_S CZ |ψ⟩_S |+⟩_A`, renormalized and `X^m`-corrected.
pub fn run_teleport_h(psi: [Complex64; 2], m: u8) -> Result<Teleported> {
    if m > 1 {
        return Err(Error::invalid(format!("measurement outcome must be 0 or 1, got {m}")));
    }
    let n = psi[0].norm_sqr() + psi[1].norm_sqr();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("input state has norm² {n}")));
    }
    // amplitudes indexed by 2s + a
    let h = FRAC_1_SQRT_2;
    let mut v = [Complex64::new(0.0, 0.0); 4];
    for s in 0..2 {
        for a in 0..2 {
            v[2 * s + a] = psi[s] * h;
        }
    }
    v[3] = -v[3];
    let w = [
        (v[0] + v[2]) * h,
        (v[1] + v[3]) * h,
        (v[0] - v[2]) * h,
        (v[1] - v[3]) * h,
    ];
    let m = m as usize;
    let branch = [w[2 * m], w[2 * m + 1]];
    let p = branch[0].norm_sqr() + branch[1].norm_sqr();
    let raw = [branch[0] / p.sqrt(), branch[1] / p.sqrt()];
    let output = if m == 1 { [raw[1], raw[0]] } else { raw };
    Ok(Teleported {
        output,
        raw,
        correction: m == 1,
        probability: p,
    })
}

/// Haar-random single-qubit state from a seeded generator.
pub fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    let z = [Complex64::new(g(), g()), Complex64::new(g(), g())];
    let n = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    [z[0] / n, z[1] / n]
}

/// Logical action of the corrected circuit for outcome `m`, plus the worst
/// output error and outcome-probability error over `samples` random inputs.
pub fn teleport_report(m: u8, samples: usize, seed: u64) -> Result<ProtocolReport> {
    let mut cols = Vec::new();
    for k in 0..2 {
        let mut e = [Complex64::new(0.0, 0.0); 2];
        e[k] = Complex64::new(1.0, 0.0);
        cols.push(run_teleport_h(e, m)?.output);
    }
    let raw = DMatrix::from_fn(2, 2, |i, j| cols[j][i]);
    let action = LogicalAction::from_matrix(raw);
    let hm = hadamard_gate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_out, mut worst_p): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let psi = random_qubit(&mut rng);
        let t = run_teleport_h(psi, m)?;
        for i in 0..2 {
            let want = hm[(i, 0)] * psi[0] + hm[(i, 1)] * psi[1];
            worst_out = worst_out.max((t.output[i] - want).norm());
        }
        worst_p = worst_p.max((t.probability - 0.5).abs());
    }
    let labels = vec!["0".to_string(), "1".to_string()];
    let mut r = ProtocolReport::new("teleport-h", action, "H", hm)
        .with_labels(&labels, &labels)
        .param("outcome", m as f64)
        .param("samples", samples as f64);
    r.diag("max_output_error", worst_out);
    r.diag("max_probability_error", worst_p);
    let t = r.leakage_threshold;
    r.set_threshold(t);
    Ok(r)
}
