use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{angle_spread, controlled_z_gate, mean_angle, ProtocolReport, SweepRow, DEFAULT_LEAKAGE_THRESHOLD};
use super::shuffle::decreasing;
use crate::dynamics::{evolve_schedule, evolve_static_with, FluxControl, KrylovOptions, Ramp, Schedule, Segment};
use crate::error::{Error, Result};
use crate::hilbert::{HalfInt, SpinBasis};
use crate::logical::{
    code_from_states, dimer_state, extract_action, gate_fidelity, phase_corrected, ring_covering, twist_operator,
    wrap_angle, CodeMeta, LogicalCode, Process,
};
use crate::models::{
    assemble, ring_network, Corner, CornerKind, CornerSpec, CouplingAssignment, CouplingClass, LatticeLayout,
    RingSpec,
};
use crate::{Operator, State};

/// How the global twist acts on the glued loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwistKind {
    /// The twist operator `F` over the glued-loop traversal, applied at once.
    Sudden,
    /// A `2π` Peierls flux threaded through the loop's cut bonds over `duration`.
    Flux { duration: f64 },
    /// No twist.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GtgOptions {
    pub twist: TwistKind,
    /// Free evolution at the glued point after the twist.
    pub free_time: f64,
    pub leakage_threshold: f64,
    /// Measure per-state phases with a twist-free run and remove them.
    pub calibrate: bool,
    /// Frozen-Hamiltonian step of generated schedules.
    pub dt: f64,
    pub krylov_dim: usize,
}

impl Default for GtgOptions {
    fn default() -> Self {
        GtgOptions {
            twist: TwistKind::Sudden,
            free_time: 0.0,
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
            calibrate: true,
            dt: 1.0,
            krylov_dim: 40,
        }
    }
}

/// `n` identical MG rings (`J2 = J1/2`) joined at one square (`n = 2`) or
/// triangular (`n = 3`) corner.
pub fn gtg_network(n: usize, l: usize) -> Result<LatticeLayout> {
    let ring = RingSpec { l, j1: 1.0, j2: 0.5 };
    match n {
        2 => ring_network(&[ring; 2], &[CornerSpec::square(0, 1)]),
        3 => ring_network(&[ring; 3], &[CornerSpec::triangular(0, 1, 2)]),
        _ => Err(Error::invalid(format!("GTG supports 2 or 3 qubits, got {n}"))),
    }
}

fn corner(layout: &LatticeLayout) -> Result<&Corner> {
    match layout.corners.as_slice() {
        [c] => Ok(c),
        _ => Err(Error::invalid("GTG needs a network with exactly one corner")),
    }
}

/// Glue ramp of duration `tau`: over the first half `J_glue` (and
/// `J_glue_2nn`) rise to the corner values, over the second half `J_corner`
/// (and `J_corner_2nn`) fall to zero, so `J_g/J` runs from 0 to ∞.
pub fn glue_schedule(layout: &LatticeLayout, tau: f64, opts: &GtgOptions) -> Result<Schedule> {
    corner(layout)?;
    let c = &layout.couplings;
    let j = c.require(CouplingClass::JCorner)?;
    let mut segments = vec![
        Segment::new(CouplingClass::JGlue, Ramp::Smoothstep, 0.0, j).within(0.0, 0.5),
        Segment::new(CouplingClass::JCorner, Ramp::Smoothstep, j, 0.0).within(0.5, 1.0),
    ];
    if let Some(j2) = c.get(CouplingClass::JCorner2nn) {
        segments.push(Segment::new(CouplingClass::JGlue2nn, Ramp::Smoothstep, 0.0, j2).within(0.0, 0.5));
        segments.push(Segment::new(CouplingClass::JCorner2nn, Ramp::Smoothstep, j2, 0.0).within(0.5, 1.0));
    }
    let mut s = Schedule::new(tau, segments).with_dt(opts.dt);
    s.krylov_dim = opts.krylov_dim;
    Ok(s)
}

/// Loop traversal split per ring, each segment running from the ring's
/// `start` to its `end`.
fn segments(layout: &LatticeLayout, c: &Corner) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut at = 0;
    for &r in &c.rings {
        let l = layout.rings[r].len();
        out.push(c.loop_sites[at..at + l].to_vec());
        at += l;
    }
    out
}

fn label(bits: usize, n: usize) -> String {
    (0..n).map(|k| if (bits >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Covering-product code of the corner's rings: bit `k` of a label is ring
/// `k` of the corner, `1` meaning the covering with the corner singlet.
pub fn gtg_code(layout: &LatticeLayout, basis: &Arc<SpinBasis>) -> Result<LogicalCode> {
    let c = corner(layout)?;
    let segs = segments(layout, c);
    let n = segs.len();
    let labels: Vec<String> = (0..1usize << n).map(|b| label(b, n)).collect();
    let states: Vec<State> = labels
        .iter()
        .map(|lab| {
            let cov: Vec<(usize, usize)> = lab
                .chars()
                .zip(&segs)
                .flat_map(|(ch, seg)| ring_covering(seg, usize::from(ch == '1')))
                .collect();
            dimer_state(basis, &cov)
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(code_from_states(&states, &refs)?.with_meta(CodeMeta {
        construction: "lowdin ring covering products".into(),
        twist_origin: Some(c.loop_sites[0]),
        rings: segs,
    }))
}

struct Setup {
    layout: LatticeLayout,
    code: LogicalCode,
    loop_sites: Vec<usize>,
    glued_loop: State,
    twist_loop: Operator,
    twist_rings: Operator,
}

fn setup(layout: &LatticeLayout) -> Result<Setup> {
    let c = corner(layout)?;
    let basis = Arc::new(SpinBasis::new(layout.n_sites(), Some(HalfInt(0)))?);
    let code = gtg_code(layout, &basis)?;
    let mut twist_rings = Operator::identity(basis.clone());
    for seg in segments(layout, c) {
        twist_rings = twist_rings.compose(&twist_operator(&basis, &seg)?)?;
    }
    Ok(Setup {
        layout: layout.clone(),
        code,
        loop_sites: c.loop_sites.clone(),
        glued_loop: dimer_state(&basis, &ring_covering(&c.loop_sites, 1))?,
        twist_loop: twist_operator(&basis, &c.loop_sites)?,
        twist_rings,
    })
}

/// Cut of the glued loop: the glue bond closing the traversal and, when
/// present, the second-neighbour bonds spanning it.
fn flux_cut(s: &Setup) -> Vec<(usize, usize)> {
    let lp = &s.loop_sites;
    let n = lp.len();
    let mut cut = vec![(lp[n - 1], lp[0])];
    if s.layout.classes().contains(&CouplingClass::JGlue2nn) {
        cut.push((lp[n - 2], lp[0]));
        cut.push((lp[n - 1], lp[1]));
    }
    cut
}

struct Pass {
    images: Vec<State>,
    norm_drift: f64,
}

/// Glue ramp on every codeword: glued states and their norm drift.
fn glue_stage(s: &Setup, glue: &Schedule) -> Result<Vec<(State, f64)>> {
    s.code
        .codewords
        .par_iter()
        .map(|c| {
            let g = evolve_schedule(&s.layout, &s.layout.couplings, glue, c)?;
            Ok((g.final_state().clone(), g.norm_drift))
        })
        .collect()
}

/// Twist, free evolution and deglue from the glued states.
fn pass(s: &Setup, glue: &Schedule, glued: &[(State, f64)], twist: TwistKind, free_time: f64) -> Result<Pass> {
    let glued_c = glue.couplings_at(&s.layout.couplings, glue.duration);
    let deglue = glue.reversed();
    let kopts = KrylovOptions {
        m: glue.krylov_dim,
        tol: glue.krylov_tol,
    };
    let h_glued = if free_time > 0.0 {
        Some(assemble(&s.layout, &glued_c, &s.code.basis)?)
    } else {
        None
    };
    let flux = match twist {
        TwistKind::Flux { duration } => {
            let mut f = Schedule::new(duration, vec![]).with_dt(glue.dt.unwrap_or(1.0)).with_flux(FluxControl {
                cut: flux_cut(s),
                ramp: Ramp::Smoothstep,
                start: 0.0,
                end: 2.0 * PI,
                window: None,
            });
            f.krylov_dim = glue.krylov_dim;
            Some(f)
        }
        _ => None,
    };
    let runs: Vec<(State, f64)> = glued
        .par_iter()
        .map(|(g, drift)| {
            let mut drift = *drift;
            let mut psi = match (twist, &flux) {
                (TwistKind::Sudden, _) => s.twist_loop.apply(g)?,
                (TwistKind::Flux { .. }, Some(f)) => {
                    let t = evolve_schedule(&s.layout, &glued_c, f, g)?;
                    drift = drift.max(t.norm_drift);
                    t.final_state().clone()
                }
                _ => g.clone(),
            };
            if let Some(h) = &h_glued {
                psi = evolve_static_with(h, &psi, free_time, kopts)?;
            }
            let d = evolve_schedule(&s.layout, &glued_c, &deglue, &psi)?;
            Ok((d.final_state().clone(), drift.max(d.norm_drift)))
        })
        .collect::<Result<_>>()?;
    let norm_drift = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Pass {
        images: runs.into_iter().map(|r| r.0).collect(),
        norm_drift,
    })
}

/// Diagonal phases relative to the first basis state.
fn relative_phases(m: &DMatrix<Complex64>) -> Vec<f64> {
    let a0 = m[(0, 0)].arg();
    (0..m.nrows()).map(|j| wrap_angle(m[(j, j)].arg() - a0)).collect()
}

fn class_phases(per_state: &[f64], n: usize, weight: u32) -> Vec<f64> {
    (0..1usize << n)
        .filter(|b| b.count_ones() == weight)
        .map(|b| per_state[b])
        .collect()
}

fn run_one(s: &Setup, glue: &Schedule, opts: &GtgOptions) -> Result<ProtocolReport> {
    let n = s.code.n_qubits();
    let glued = glue_stage(s, glue)?;
    let main = pass(s, glue, &glued, opts.twist, opts.free_time)?;
    let action = extract_action(&s.code, &s.code, Process::Images(&main.images))?;
    let target = controlled_z_gate(n);
    let raw_fidelity = gate_fidelity(&action.matrix, &target);
    let zero_return = action.matrix[(0, 0)].norm_sqr();
    let m = action.matrix.clone();
    let per_state = relative_phases(&m);

    let mut r = ProtocolReport::new(if n == 2 { "gtg2" } else { "gtg3" }, action, &format!("Lambda_{n}"), target.clone())
        .with_labels(&s.code.labels, &s.code.labels)
        .param("n_qubits", n as f64)
        .param("n_sites", s.layout.n_sites() as f64)
        .param("free_time", opts.free_time);
    if let TwistKind::Flux { duration } = opts.twist {
        r.parameters.insert("flux_duration".into(), duration);
    }
    r.ramp_times = vec![glue.duration];
    r.phases.per_state = per_state.clone();
    if n == 2 {
        r.phases.delta = Some(mean_angle(&class_phases(&per_state, 2, 1)));
    } else {
        let (d1, d2) = (class_phases(&per_state, n, 1), class_phases(&per_state, n, 2));
        r.phases.delta_1 = Some(mean_angle(&d1));
        r.phases.delta_2 = Some(mean_angle(&d2));
        r.diag("delta_1_spread", angle_spread(&d1));
        r.diag("delta_2_spread", angle_spread(&d2));
    }
    if opts.calibrate {
        let cal = pass(s, glue, &glued, TwistKind::Identity, opts.free_time)?;
        let ca = extract_action(&s.code, &s.code, Process::Images(&cal.images))?;
        let correction = relative_phases(&ca.matrix);
        r.fidelity = gate_fidelity(&phase_corrected(&m, &correction), &target);
        r.phases.correction = correction;
        r.diag("calibration_leakage", ca.leakage);
    }
    r.diag("raw_fidelity", raw_fidelity);
    r.diag("zero_return_fidelity", zero_return);
    r.diag("norm_drift", main.norm_drift);
    let all_ones = glued.len() - 1;
    r.diag("glue_endpoint_overlap", s.glued_loop.inner(&glued[all_ones].0)?.norm_sqr());
    for (lab, (g, _)) in s.code.labels.iter().zip(&glued) {
        let fl = s.twist_loop.expectation(g)?;
        let fr = s.twist_rings.expectation(g)?;
        r.diag(format!("twist_loop.{lab}.abs"), fl.norm());
        r.diag(format!("twist_loop.{lab}.arg"), wrap_angle(fl.arg()));
        r.diag(format!("twist_rings.{lab}.abs"), fr.norm());
        r.diag(format!("twist_rings.{lab}.arg"), wrap_angle(fr.arg()));
    }
    r.diag("unitarity_defect", r.unitarity_defect());
    r.set_threshold(opts.leakage_threshold);
    Ok(r)
}

/// Glue–twist–deglue on every covering-product basis state of the corner's
/// rings; deglue is the time reverse of `glue`.
pub fn run_gtg(layout: &LatticeLayout, glue: &Schedule, opts: &GtgOptions) -> Result<ProtocolReport> {
    glue.validate()?;
    let s = setup(layout)?;
    let n = s.code.n_qubits();
    if !(2..=3).contains(&n) {
        return Err(Error::invalid(format!("GTG supports 2 or 3 qubits, got {n}")));
    }
    if corner(layout)?.kind != if n == 2 { CornerKind::Square } else { CornerKind::Triangular } {
        return Err(Error::invalid("corner kind does not match the number of rings"));
    }
    run_one(&s, glue, opts)
}

/// GTG over a grid of glue times with [`glue_schedule`]; the report is the
/// slowest ramp, with one sweep row per ramp time.
pub fn run_gtg_sweep(layout: &LatticeLayout, taus: &[f64], opts: &GtgOptions) -> Result<ProtocolReport> {
    if taus.is_empty() {
        return Err(Error::invalid("empty ramp-time grid"));
    }
    let mut reports = taus
        .iter()
        .map(|&tau| run_gtg(layout, &glue_schedule(layout, tau, opts)?, opts))
        .collect::<Result<Vec<_>>>()?;
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
    let slowest = (0..taus.len()).max_by(|&a, &b| taus[a].total_cmp(&taus[b])).unwrap();
    let mut r = reports.swap_remove(slowest);
    r.ramp_times = taus.to_vec();
    r.diag("leakage_decreasing", f64::from(u8::from(decreasing(&sweep))));
    r.sweep = sweep;
    Ok(r)
}

/// Couplings at the fully glued point of [`glue_schedule`].
pub fn glued_couplings(layout: &LatticeLayout) -> Result<CouplingAssignment> {
    let s = glue_schedule(layout, 1.0, &GtgOptions::default())?;
    Ok(s.couplings_at(&layout.couplings, 1.0))
}
