use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{hadamard_gate, phase_equivalent_fidelity, ProtocolReport, SweepRow, DEFAULT_LEAKAGE_THRESHOLD};
use crate::dynamics::{evolve_schedule, Ramp, Schedule, Segment};
use crate::error::{Error, Result};
use crate::hilbert::ops::s_squared;
use crate::hilbert::{HalfInt, SpinBasis};
use crate::logical::{code_from_states, dimer_state, extract_action, ladder_translation, ring_covering, LogicalCode, Process};
use crate::models::{assemble, CouplingAssignment, LatticeLayout, LayoutKind};
use crate::observables::{classify_with, ClassifyOptions, PhaseLabel};
use crate::spectral::{lowest_eigenpairs_with, LanczosOptions};
use crate::{Operator, State};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShuffleOptions {
    pub leakage_threshold: f64,
    /// Weight of the `S²` penalty separating singlets from higher multiplets.
    pub singlet_penalty: f64,
    pub seed: u64,
    /// Frozen-Hamiltonian step of generated schedules.
    pub dt: f64,
    pub krylov_dim: usize,
}

impl Default for ShuffleOptions {
    fn default() -> Self {
        ShuffleOptions {
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
            singlet_penalty: 2.0,
            seed: 0x5eed,
            dt: 0.5,
            krylov_dim: 30,
        }
    }
}

/// Smoothstep ramp of every class whose value differs between the endpoints.
pub fn shuffle_schedule(point_c: &CouplingAssignment, point_r: &CouplingAssignment, tau: f64, opts: &ShuffleOptions) -> Schedule {
    let segments = point_r
        .0
        .iter()
        .filter_map(|(&class, &end)| {
            let start = point_c.get(class).unwrap_or(0.0);
            (start != end).then(|| Segment::new(class, Ramp::Smoothstep, start, end))
        })
        .collect();
    let mut s = Schedule::new(tau, segments).with_dt(opts.dt);
    s.krylov_dim = opts.krylov_dim;
    s
}

/// Lowest `count` total-spin singlets of `h`.
pub fn lowest_singlets(h: &Operator, count: usize, penalty: f64, seed: u64) -> Result<(Vec<f64>, Vec<State>)> {
    let basis = h.basis().clone();
    let s2 = s_squared::<f64>(&basis)?;
    let hp = h.add_scaled(&s2, Complex64::new(penalty, 0.0))?;
    let k = (count + 4).min(basis.dim());
    let sol = lowest_eigenpairs_with(&hp, &LanczosOptions::new(k, 1e-9).with_seed(seed))?;
    let mut energies = vec![];
    let mut states = vec![];
    for (e, v) in sol.eigenvalues.iter().zip(&sol.eigenvectors) {
        if s2.expectation(v)?.re < 0.5 && states.len() < count {
            energies.push(*e);
            states.push(v.clone());
        }
    }
    if states.len() < count {
        return Err(Error::invalid(format!(
            "only {} singlets among the lowest {k} levels; raise the singlet penalty",
            states.len()
        )));
    }
    Ok((energies, states))
}

/// Projection of `psi` onto the span of orthonormal `space`.
fn project(psi: &State, space: &[State]) -> Result<State> {
    let mut out = State::zeros(psi.basis().clone());
    for v in space {
        out.axpy(v.inner(psi)?, v)?;
    }
    Ok(out)
}

struct Setup {
    layout: LatticeLayout,
    base: CouplingAssignment,
    code_in: LogicalCode,
    code_out: LogicalCode,
    parity: [f64; 2],
}

fn require_label(c: &CouplingAssignment, l: usize, want: PhaseLabel, opts: &ShuffleOptions) -> Result<()> {
    let copts = ClassifyOptions {
        seed: opts.seed,
        ..Default::default()
    };
    let got = classify_with(c, l, &copts)?.label;
    if got != want {
        return Err(Error::Misclassified {
            expected: want.to_string(),
            got: got.to_string(),
        });
    }
    Ok(())
}

fn setup(layout: &LatticeLayout, point_c: &CouplingAssignment, point_r: &CouplingAssignment, opts: &ShuffleOptions) -> Result<Setup> {
    if layout.kind != LayoutKind::Ladder || !layout.pbc {
        return Err(Error::invalid("shuffle runs on a periodic two-leg ladder"));
    }
    let l = layout.length();
    require_label(point_c, l, PhaseLabel::C, opts)?;
    require_label(point_r, l, PhaseLabel::R, opts)?;
    let basis = Arc::new(SpinBasis::new(2 * l, Some(HalfInt(0)))?);
    let base = layout.couplings.merged(point_c);

    let hc = assemble(layout, &base, &basis)?;
    let (_, low_c) = lowest_singlets(&hc, 2, opts.singlet_penalty, opts.seed)?;
    let aligned: Vec<State> = (0..2)
        .map(|p| {
            let mut cov = ring_covering(&layout.rings[0], p);
            cov.extend(ring_covering(&layout.rings[1], p));
            project(&dimer_state(&basis, &cov)?, &low_c)
        })
        .collect::<Result<_>>()?;
    let code_in = code_from_states(&aligned, &["0", "1"])?;

    let hr = assemble(layout, &layout.couplings.merged(point_r), &basis)?;
    let (_, low_r) = lowest_singlets(&hr, 2, opts.singlet_penalty, opts.seed)?;
    let x = ladder_translation(&basis, layout, false)?;
    let mut tagged: Vec<(f64, State)> = low_r
        .into_iter()
        .map(|v| Ok((x.expectation(&v)?.re, v)))
        .collect::<Result<_>>()?;
    tagged.sort_by(|a, b| b.0.total_cmp(&a.0));
    let parity = [tagged[0].0, tagged[1].0];
    let out: Vec<State> = tagged.into_iter().map(|(_, v)| v).collect();
    let code_out = code_from_states(&out, &["+", "-"])?;
    Ok(Setup {
        layout: layout.clone(),
        base,
        code_in,
        code_out,
        parity,
    })
}

fn run_one(s: &Setup, sched: &Schedule, opts: &ShuffleOptions) -> Result<ProtocolReport> {
    let images: Vec<State> = s
        .code_in
        .codewords
        .par_iter()
        .map(|c| Ok(evolve_schedule(&s.layout, &s.base, sched, c)?.final_state().clone()))
        .collect::<Result<_>>()?;
    let action = extract_action(&s.code_in, &s.code_out, Process::Images(&images))?;
    let (fidelity, target) = phase_equivalent_fidelity(&action.matrix, &hadamard_gate());
    let m = action.matrix.clone();
    let mut r = ProtocolReport::new("shuffle", action, "H", target)
        .with_labels(&s.code_in.labels, &s.code_out.labels)
        .param("L", s.layout.length() as f64);
    r.fidelity = fidelity;
    r.ramp_times = vec![sched.duration];
    for (k, v) in s.base.0.iter() {
        r.parameters.insert(format!("start.{k}"), *v);
    }
    let end = sched.couplings_at(&s.base, sched.duration);
    for (k, v) in end.0.iter() {
        r.parameters.insert(format!("end.{k}"), *v);
    }
    for (i, out) in s.code_out.labels.iter().enumerate() {
        for (j, inp) in s.code_in.labels.iter().enumerate() {
            r.diag(format!("overlap_sq.{out}.{inp}"), m[(i, j)].norm_sqr());
        }
    }
    r.diag("rung_parity.+", s.parity[0]);
    r.diag("rung_parity.-", s.parity[1]);
    r.diag("unitarity_defect", r.unitarity_defect());
    r.set_threshold(opts.leakage_threshold);
    Ok(r)
}

/// Shuffle along `sched` from `point_c` (phase C) to `point_r` (phase R).
///
/// Input codewords are the aligned leg coverings projected onto the two
/// lowest singlets at `point_c`; output codewords are the two lowest
/// singlets at `point_r`, `+` being the one with the larger `⟨T₁T₂⟩`.
pub fn run_shuffle(
    layout: &LatticeLayout,
    point_c: &CouplingAssignment,
    point_r: &CouplingAssignment,
    sched: &Schedule,
    opts: &ShuffleOptions,
) -> Result<ProtocolReport> {
    sched.validate()?;
    check_endpoints(sched, &layout.couplings.merged(point_c), point_r)?;
    let s = setup(layout, point_c, point_r, opts)?;
    run_one(&s, sched, opts)
}

fn check_endpoints(sched: &Schedule, start: &CouplingAssignment, point_r: &CouplingAssignment) -> Result<()> {
    let a = sched.couplings_at(start, 0.0);
    let b = sched.couplings_at(start, sched.duration);
    for (class, v) in &start.0 {
        if (a.get(*class).unwrap_or(0.0) - v).abs() > 1e-12 {
            return Err(Error::invalid(format!("schedule does not start at point C for {class}")));
        }
    }
    for (class, v) in &point_r.0 {
        if (b.get(*class).unwrap_or(0.0) - v).abs() > 1e-12 {
            return Err(Error::invalid(format!("schedule does not end at point R for {class}")));
        }
    }
    Ok(())
}

/// Shuffle over a grid of ramp times; the report is the slowest ramp, with
/// one sweep row per ramp time and the instant-quench leakage.
pub fn run_shuffle_sweep(
    layout: &LatticeLayout,
    point_c: &CouplingAssignment,
    point_r: &CouplingAssignment,
    taus: &[f64],
    opts: &ShuffleOptions,
) -> Result<ProtocolReport> {
    if taus.is_empty() {
        return Err(Error::invalid("empty ramp-time grid"));
    }
    let s = setup(layout, point_c, point_r, opts)?;
    let mut reports = taus
        .iter()
        .map(|&tau| run_one(&s, &shuffle_schedule(&s.base, point_r, tau, opts), opts))
        .collect::<Result<Vec<_>>>()?;
    let quench = extract_action(&s.code_in, &s.code_out, Process::Images(&s.code_in.codewords))?;
    let slowest = (0..taus.len()).max_by(|&a, &b| taus[a].total_cmp(&taus[b])).unwrap();
    let sweep: Vec<SweepRow> = taus
        .iter()
        .zip(&reports)
        .map(|(&tau, r)| SweepRow {
            tau,
            leakage: r.leakage,
            fidelity: r.fidelity,
            flagged: r.flagged,
        })
        .collect();
    let mut r = reports.swap_remove(slowest);
    r.ramp_times = taus.to_vec();
    r.diag("quench_leakage", quench.leakage);
    r.diag("leakage_decreasing", f64::from(u8::from(decreasing(&sweep))));
    r.sweep = sweep;
    Ok(r)
}

/// Leakage strictly decreasing with ramp time.
pub(crate) fn decreasing(rows: &[SweepRow]) -> bool {
    let mut v: Vec<&SweepRow> = rows.iter().collect();
    v.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    v.windows(2).all(|w| w[1].leakage < w[0].leakage)
}
