use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::krylov::{evolve_static_with, KrylovOptions};
use crate::error::{Error, Result};
use crate::hilbert::{OperatorCombination, SpinBasis};
use crate::models::{flux_class_terms, CouplingAssignment, CouplingClass, FluxPart, LatticeLayout};
use crate::{Operator, State};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Constant,
    Linear,
    #[default]
    Smoothstep,
}

impl Ramp {
    /// Ramp profile on `s ∈ [0, 1]`, with `f(0) = 0`, `f(1) = 1`.
    pub fn profile(self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Ramp::Constant => 0.0,
            Ramp::Linear => s,
            Ramp::Smoothstep => s * s * (3.0 - 2.0 * s),
        }
    }
}

/// Time window as fractions of the schedule duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub from: f64,
    pub to: f64,
}

impl Window {
    pub const FULL: Window = Window { from: 0.0, to: 1.0 };

    fn local(&self, frac: f64) -> f64 {
        if self.to <= self.from {
            return if frac >= self.to { 1.0 } else { 0.0 };
        }
        ((frac - self.from) / (self.to - self.from)).clamp(0.0, 1.0)
    }

    fn mirrored(&self) -> Window {
        Window {
            from: 1.0 - self.to,
            to: 1.0 - self.from,
        }
    }
}

/// Ramp of one coupling class; the value is `start` before the window and
/// `end` after it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub class: CouplingClass,
    #[serde(default)]
    pub ramp: Ramp,
    pub start: f64,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

impl Segment {
    pub fn new(class: CouplingClass, ramp: Ramp, start: f64, end: f64) -> Self {
        Segment {
            class,
            ramp,
            start,
            end,
            window: None,
        }
    }

    pub fn within(mut self, from: f64, to: f64) -> Self {
        self.window = Some(Window { from, to });
        self
    }

    pub fn value(&self, frac: f64) -> f64 {
        if self.ramp == Ramp::Constant {
            return self.start;
        }
        let s = self.window.unwrap_or(Window::FULL).local(frac);
        self.start + (self.end - self.start) * self.ramp.profile(s)
    }

    fn reversed(&self) -> Self {
        let mut out = self.clone();
        if self.ramp != Ramp::Constant {
            out.start = self.end;
            out.end = self.start;
        }
        out.window = self.window.map(|w| w.mirrored());
        out
    }
}

/// Peierls flux `Φ(t)` threaded through the bonds of a cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxControl {
    /// Ordered bonds `(i, j)`; the phase multiplies `S⁺_i S⁻_j`.
    pub cut: Vec<(usize, usize)>,
    #[serde(default)]
    pub ramp: Ramp,
    pub start: f64,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

impl FluxControl {
    pub fn phase(&self, frac: f64) -> f64 {
        Segment {
            class: CouplingClass::JLeg,
            ramp: self.ramp,
            start: self.start,
            end: self.end,
            window: self.window,
        }
        .value(frac)
    }
}

/// Piecewise coupling ramps over a fixed duration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub duration: f64,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxControl>,
    /// Largest step with a frozen Hamiltonian. `None` picks `0.5 / ‖H‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_m")]
    pub krylov_dim: usize,
    #[serde(default = "default_tol")]
    pub krylov_tol: f64,
    /// Record every `thin`-th step (the final state is always recorded).
    #[serde(default = "default_thin")]
    pub thin: usize,
}

fn default_m() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-12
}

fn default_thin() -> usize {
    usize::MAX
}

impl Schedule {
    pub fn new(duration: f64, segments: Vec<Segment>) -> Self {
        Schedule {
            duration,
            segments,
            flux: None,
            dt: None,
            krylov_dim: default_m(),
            krylov_tol: default_tol(),
            thin: default_thin(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_flux(mut self, flux: FluxControl) -> Self {
        self.flux = Some(flux);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid(format!("dt must be positive, got {dt}")));
            }
        }
        if self.krylov_dim < 2 {
            return Err(Error::invalid("Krylov dimension must be at least 2"));
        }
        for s in &self.segments {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(Error::invalid(format!("non-finite ramp values for {}", s.class)));
            }
        }
        Ok(())
    }

    /// Time-reversed schedule: value(t) of the result is value(T − t).
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.segments = self.segments.iter().map(Segment::reversed).collect();
        if let Some(f) = &self.flux {
            let mut g = f.clone();
            if f.ramp != Ramp::Constant {
                g.start = f.end;
                g.end = f.start;
            }
            g.window = f.window.map(|w| w.mirrored());
            out.flux = Some(g);
        }
        out
    }

    /// Class values at time `t`; unscheduled classes keep their base value.
    pub fn couplings_at(&self, base: &CouplingAssignment, t: f64) -> CouplingAssignment {
        let frac = (t / self.duration).clamp(0.0, 1.0);
        let mut c = base.clone();
        for s in &self.segments {
            c.set(s.class, s.value(frac));
        }
        c
    }

    pub fn flux_at(&self, t: f64) -> f64 {
        let frac = (t / self.duration).clamp(0.0, 1.0);
        self.flux.as_ref().map_or(0.0, |f| f.phase(frac))
    }
}

/// `H(t)` as a cached combination of per-class operators.
pub struct ScheduleHamiltonian {
    comb: OperatorCombination<f64>,
    parts: Vec<(CouplingClass, FluxPart)>,
    norms: Vec<f64>,
}

impl ScheduleHamiltonian {
    pub fn new(layout: &LatticeLayout, basis: &Arc<SpinBasis>, sched: &Schedule) -> Result<Self> {
        let cut = sched.flux.as_ref().map(|f| f.cut.as_slice()).unwrap_or(&[]);
        let terms = flux_class_terms(layout, basis, cut)?;
        let classes = layout.classes();
        for s in &sched.segments {
            if !classes.contains(&s.class) {
                return Err(Error::invalid(format!("schedule class {} absent from layout", s.class)));
            }
        }
        let ops: Vec<&Operator> = terms.iter().map(|t| &t.op).collect();
        let comb = OperatorCombination::new(basis.clone(), &ops)?;
        Ok(ScheduleHamiltonian {
            comb,
            parts: terms.iter().map(|t| (t.class, t.part)).collect(),
            norms: terms.iter().map(|t| t.op.inf_norm()).collect(),
        })
    }

    fn coefficients(&self, c: &CouplingAssignment, phi: f64) -> Result<Vec<f64>> {
        self.parts
            .iter()
            .map(|&(class, part)| {
                let v = c.require(class)?;
                Ok(match part {
                    FluxPart::Static => v,
                    FluxPart::Cos => v * phi.cos(),
                    FluxPart::Sin => v * phi.sin(),
                })
            })
            .collect()
    }

    /// `H` at time `t` of `sched` on top of `base`.
    pub fn at(&self, sched: &Schedule, base: &CouplingAssignment, t: f64) -> Result<Operator> {
        let coeffs = self.coefficients(&sched.couplings_at(base, t), sched.flux_at(t))?;
        Ok(self.comb.evaluate(&coeffs))
    }

    fn norm_bound(&self, sched: &Schedule, base: &CouplingAssignment, t: f64) -> Result<f64> {
        let coeffs = self.coefficients(&sched.couplings_at(base, t), sched.flux_at(t))?;
        Ok(coeffs.iter().zip(&self.norms).map(|(c, n)| c.abs() * n).sum())
    }
}

/// Recorded evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energies: Vec<f64>,
    /// Leakage out of the target space, when one was given.
    pub leakage: Vec<f64>,
    /// Largest `|‖ψ(t)‖ − 1|` over all steps.
    pub norm_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory records the final state")
    }

    /// CSV with `time,energy,leakage` columns (leakage empty when untracked).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "energy", "leakage"])
            .map_err(csv_err)?;
        for (k, t) in self.times.iter().enumerate() {
            let leak = self.leakage.get(k).map(|l| format!("{l:.16e}")).unwrap_or_default();
            w.write_record([format!("{t:.16e}"), format!("{:.16e}", self.energies[k]), leak])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Leakage `1 − Σ_k |⟨target_k|ψ⟩|²` of a state out of an orthonormal set.
pub fn leakage(psi: &State, target: &[State]) -> Result<f64> {
    let mut kept = 0.0;
    for t in target {
        kept += t.inner(psi)?.norm_sqr();
    }
    Ok((1.0 - kept / psi.norm_sqr()).clamp(0.0, 1.0))
}

/// Leakage of the trajectory's final state out of `target_space`.
pub fn adiabatic_metric(traj: &Trajectory, h_final: &Operator, target_space: &[State]) -> Result<f64> {
    let psi = traj.final_state();
    if **psi.basis() != **h_final.basis() {
        return Err(Error::BasisMismatch("final state and H_final bases differ".into()));
    }
    leakage(psi, target_space)
}

/// Piecewise propagation under `sched` with a midpoint-frozen `H` per step.
pub fn evolve_schedule(
    layout: &LatticeLayout,
    base: &CouplingAssignment,
    sched: &Schedule,
    psi: &State,
) -> Result<Trajectory> {
    evolve_schedule_tracked(layout, base, sched, psi, None)
}

pub fn evolve_schedule_tracked(
    layout: &LatticeLayout,
    base: &CouplingAssignment,
    sched: &Schedule,
    psi: &State,
    target: Option<&[State]>,
) -> Result<Trajectory> {
    sched.validate()?;
    let ham = ScheduleHamiltonian::new(layout, psi.basis(), sched)?;
    evolve_with(&ham, base, sched, psi, target)
}

/// Step count and step length used for `sched`.
pub fn step_grid(ham: &ScheduleHamiltonian, base: &CouplingAssignment, sched: &Schedule) -> Result<(usize, f64)> {
    let dt = match sched.dt {
        Some(dt) => dt,
        None => {
            let mut worst: f64 = 1e-12;
            for k in 0..=16 {
                worst = worst.max(ham.norm_bound(sched, base, sched.duration * k as f64 / 16.0)?);
            }
            0.5 / worst
        }
    };
    let n = (sched.duration / dt).ceil().max(1.0) as usize;
    Ok((n, sched.duration / n as f64))
}

/// Like [`evolve_schedule_tracked`] with a prebuilt Hamiltonian cache.
pub fn evolve_with(
    ham: &ScheduleHamiltonian,
    base: &CouplingAssignment,
    sched: &Schedule,
    psi: &State,
    target: Option<&[State]>,
) -> Result<Trajectory> {
    let (n, h) = step_grid(ham, base, sched)?;
    let opts = KrylovOptions {
        m: sched.krylov_dim,
        tol: sched.krylov_tol,
    };
    let mut traj = Trajectory {
        times: vec![],
        states: vec![],
        energies: vec![],
        leakage: vec![],
        norm_drift: 0.0,
    };
    let n0 = psi.norm();
    let record = |traj: &mut Trajectory, t: f64, s: &State, hop: &Operator| -> Result<()> {
        traj.times.push(t);
        traj.energies.push(hop.expectation(s)?.re / s.norm_sqr());
        if let Some(tg) = target {
            traj.leakage.push(leakage(s, tg)?);
        }
        traj.states.push(s.clone());
        Ok(())
    };
    let mut cur = psi.clone();
    record(&mut traj, 0.0, &cur, &ham.at(sched, base, 0.0)?)?;
    for k in 0..n {
        let mid = (k as f64 + 0.5) * h;
        let hk = ham.at(sched, base, mid)?;
        cur = evolve_static_with(&hk, &cur, h, opts)?;
        traj.norm_drift = traj.norm_drift.max((cur.norm() - n0).abs());
        let t = (k + 1) as f64 * h;
        if k + 1 == n || (sched.thin != usize::MAX && (k + 1) % sched.thin.max(1) == 0) {
            record(&mut traj, t, &cur, &ham.at(sched, base, t)?)?;
        }
    }
    Ok(traj)
}
