use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sgq_core::duality::{check_dual_algebra, spectrum_duality_check, AlgebraCheck, DualPair};
use sgq_core::hilbert::ops::s_squared;
use sgq_core::hilbert::{HalfInt, SpinBasis};
use sgq_core::logical::RingQubit;
use sgq_core::models::{assemble, LatticeLayout, LayoutKind};
use sgq_core::observables::{classify_with, dimer_order, rung_singlet_density, write_scan_csv, ClassifyOptions, PhasePoint};
use sgq_core::protocols::{
    gtg_network, run_gtg_sweep, run_pump_times, run_shuffle_sweep, run_twist_times, teleport_report, ProtocolReport,
};
use sgq_core::spectral::{default_split_tol, degeneracy, lowest_eigenpairs_with, LanczosOptions};
use sgq_core::Error;

use crate::config::{ExperimentConfig, ProtocolSpec, SystemSpec};
use crate::json;

/// Why a run stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::StepFailure { .. } | Error::RankDeficient(_) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

pub type Outcome<T> = Result<T, Failure>;

/// Files written by a command.
pub struct Written {
    pub paths: Vec<PathBuf>,
    pub summary: String,
}

struct Sink<'a> {
    cfg: &'a ExperimentConfig,
    dir: PathBuf,
    stem: String,
    paths: Vec<PathBuf>,
}

impl<'a> Sink<'a> {
    fn new(cfg: &'a ExperimentConfig, command: &str, out_dir: Option<&PathBuf>) -> Outcome<Self> {
        let dir = out_dir
            .cloned()
            .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| config_err(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Sink {
            cfg,
            dir,
            stem: cfg.output.name.clone().unwrap_or_else(|| command.to_string()),
            paths: vec![],
        })
    }

    fn write(&mut self, ext: &str, bytes: &[u8]) -> Outcome<()> {
        let p = self.dir.join(format!("{}.{ext}", self.stem));
        fs::write(&p, bytes).map_err(|e| config_err(format!("cannot write {}: {e}", p.display())))?;
        self.paths.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Outcome<()> {
        let bytes = json::to_vec(value).map_err(|e| Failure::Numerical(e.to_string()))?;
        self.write("json", &bytes)
    }

    fn csv(&mut self, f: impl FnOnce(&mut Vec<u8>) -> sgq_core::Result<()>) -> Outcome<()> {
        if !self.cfg.output.csv {
            return Ok(());
        }
        let mut buf = vec![];
        f(&mut buf)?;
        self.write("csv", &buf)
    }

    fn done(self, summary: String) -> Written {
        Written {
            paths: self.paths,
            summary,
        }
    }
}

fn system(cfg: &ExperimentConfig) -> Outcome<&SystemSpec> {
    cfg.system.as_ref().ok_or_else(|| config_err("missing `system` section"))
}

fn sector(spec: &SystemSpec, layout: &LatticeLayout, sz: Option<f64>) -> Outcome<Option<HalfInt>> {
    if !spec.conserves_sz() {
        return match sz {
            Some(_) => Err(config_err("this model does not conserve S^z; drop `ground.sz`")),
            None => Ok(None),
        };
    }
    let twice = match sz {
        Some(v) => {
            let t = 2.0 * v;
            if t.fract() != 0.0 {
                return Err(config_err(format!("`ground.sz` = {v} is not a half-integer")));
            }
            t as i32
        }
        None => (layout.n_sites() % 2) as i32,
    };
    Ok(Some(HalfInt(twice)))
}

#[derive(Serialize)]
struct GroundReport {
    system: SystemSpec,
    n_sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    twice_sz: Option<i32>,
    dim: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    split_tol: f64,
    degeneracy: usize,
    /// Ground-space averages.
    observables: BTreeMap<String, f64>,
    seed: u64,
}

pub fn ground(cfg: &ExperimentConfig, out_dir: Option<&PathBuf>) -> Outcome<Written> {
    let spec = system(cfg)?;
    let layout = spec.layout()?;
    let sec = sector(spec, &layout, cfg.ground.sz)?;
    let basis = Arc::new(SpinBasis::new(layout.n_sites(), sec)?);
    let h = assemble(&layout, &layout.couplings, &basis)?;
    let k = cfg.ground.levels.min(basis.dim().saturating_sub(1)).max(1);
    let sol = lowest_eigenpairs_with(&h, &LanczosOptions::new(k, cfg.ground.tol).with_seed(cfg.seed))?;
    let split_tol = cfg.ground.split_tol.unwrap_or_else(|| default_split_tol(sol.ground_energy()));
    let gsd = degeneracy(&sol, Some(split_tol));

    let ground: Vec<_> = sol.eigenvectors[..gsd].to_vec();
    let mean = |f: &dyn Fn(&sgq_core::State) -> sgq_core::Result<f64>| -> Outcome<f64> {
        let mut s = 0.0;
        for v in &ground {
            s += f(v)?;
        }
        Ok(s / gsd as f64)
    };
    let mut observables = BTreeMap::new();
    if sec.is_some() {
        let s2 = s_squared::<f64>(&basis)?;
        observables.insert("s_squared".into(), mean(&|v| Ok(s2.expectation(v)?.re))?);
    }
    if layout.kind != LayoutKind::Tfim {
        for ring in 0..layout.rings.len() {
            observables.insert(format!("dimer_order.{ring}"), mean(&|v| dimer_order(v, &layout, ring))?);
        }
    }
    if layout.kind == LayoutKind::Ladder {
        observables.insert("rung_singlet_density".into(), mean(&|v| rung_singlet_density(v, &layout))?);
    }
    let report = GroundReport {
        system: spec.clone(),
        n_sites: layout.n_sites(),
        twice_sz: sec.map(|s| s.0),
        dim: basis.dim(),
        eigenvalues: sol.eigenvalues.clone(),
        residuals: sol.residuals.clone(),
        split_tol,
        degeneracy: gsd,
        observables,
        seed: cfg.seed,
    };
    let mut sink = Sink::new(cfg, "ground", out_dir)?;
    sink.json(&report)?;
    sink.csv(|buf| {
        use std::io::Write;
        writeln!(buf, "index,energy,residual")?;
        for (i, (e, r)) in report.eigenvalues.iter().zip(&report.residuals).enumerate() {
            writeln!(buf, "{i},{e:.16e},{r:.16e}")?;
        }
        Ok(())
    })?;
    Ok(sink.done(format!("E0 = {:.16e}, degeneracy {gsd}", report.eigenvalues[0])))
}

fn ring_code(cfg: &ExperimentConfig) -> Outcome<sgq_core::logical::LogicalCode> {
    let spec = system(cfg)?;
    if !matches!(spec, SystemSpec::ChainJ1j2 { pbc: true, .. }) {
        return Err(config_err("pump and twist need a periodic `chain_j1j2` system"));
    }
    let layout = spec.layout()?;
    let basis = Arc::new(SpinBasis::new(layout.n_sites(), Some(HalfInt(0)))?);
    Ok(RingQubit::new(&basis, &layout.rings[0])?.code)
}

fn gtg_layout(cfg: &ExperimentConfig, n: usize, l: Option<usize>, default_l: usize) -> Outcome<LatticeLayout> {
    match (&cfg.system, l) {
        (Some(s @ SystemSpec::RingNetwork { .. }), None) => Ok(s.layout()?),
        (Some(_), _) if l.is_some() => Err(config_err("give either a `ring_network` system or `protocol.l`, not both")),
        (Some(_), _) => Err(config_err("GTG runs on a `ring_network` system")),
        (None, l) => Ok(gtg_network(n, l.unwrap_or(default_l))?),
    }
}

fn check_taus(taus: &[f64]) -> Outcome<()> {
    if taus.is_empty() || taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(config_err("`taus` must be a nonempty list of positive ramp times"));
    }
    Ok(())
}

pub fn protocol(cfg: &ExperimentConfig, out_dir: Option<&PathBuf>) -> Outcome<Written> {
    let spec = cfg.protocol.as_ref().ok_or_else(|| config_err("missing `protocol` section"))?;
    let report: ProtocolReport = match spec {
        ProtocolSpec::Pump { repetitions } => run_pump_times(&ring_code(cfg)?, *repetitions)?,
        ProtocolSpec::Twist { repetitions } => run_twist_times(&ring_code(cfg)?, *repetitions)?,
        ProtocolSpec::TeleportH { outcome, samples } => teleport_report(*outcome, *samples, cfg.seed)?,
        ProtocolSpec::Shuffle { point_r, taus, options } => {
            check_taus(taus)?;
            let spec = system(cfg)?;
            if !matches!(spec, SystemSpec::Ladder { pbc: true, .. }) {
                return Err(config_err("shuffle needs a periodic `ladder` system"));
            }
            let layout = spec.layout()?;
            let mut opts = options.clone();
            opts.seed = cfg.seed;
            let point_c = layout.couplings.clone();
            let point_r = point_c.merged(point_r);
            run_shuffle_sweep(&layout, &point_c, &point_r, taus, &opts)?
        }
        ProtocolSpec::Gtg2 { l, taus, options } => {
            check_taus(taus)?;
            run_gtg_sweep(&gtg_layout(cfg, 2, *l, 8)?, taus, options)?
        }
        ProtocolSpec::Gtg3 { l, taus, options } => {
            check_taus(taus)?;
            run_gtg_sweep(&gtg_layout(cfg, 3, *l, 6)?, taus, options)?
        }
    };
    let mut sink = Sink::new(cfg, "protocol", out_dir)?;
    sink.json(&report)?;
    sink.csv(|buf| report.write_csv(buf))?;
    Ok(sink.done(format!(
        "{}: fidelity {:.6}, leakage {:.6}{}",
        report.protocol,
        report.fidelity,
        report.leakage,
        if report.flagged { " (flagged)" } else { "" }
    )))
}

#[derive(Serialize)]
struct ScanReport {
    l: usize,
    axes: Vec<String>,
    points: Vec<PhasePoint>,
}

pub fn phase_scan(cfg: &ExperimentConfig, out_dir: Option<&PathBuf>) -> Outcome<Written> {
    let scan = cfg.scan.as_ref().ok_or_else(|| config_err("missing `scan` section"))?;
    let spec = system(cfg)?;
    if !matches!(spec, SystemSpec::Ladder { pbc: true, .. }) {
        return Err(config_err("phase scans run on a periodic `ladder` system"));
    }
    if scan.axes.is_empty() || scan.axes.len() > 2 {
        return Err(config_err("a scan has one or two axes"));
    }
    let layout = spec.layout()?;
    let grids = scan.axes.iter().map(|a| a.points()).collect::<Result<Vec<_>, _>>().map_err(config_err)?;
    let mut grid = vec![];
    for &a in &grids[0] {
        match grids.get(1) {
            Some(g1) => grid.extend(g1.iter().map(|&b| vec![a, b])),
            None => grid.push(vec![a]),
        }
    }
    let opts = ClassifyOptions {
        threshold: scan.threshold,
        levels: scan.levels,
        seed: cfg.seed,
    };
    let l = layout.length();
    let points = grid
        .par_iter()
        .map(|vals| {
            let mut c = layout.couplings.clone();
            for (axis, &v) in scan.axes.iter().zip(vals) {
                c.set(axis.class, v);
            }
            classify_with(&c, l, &opts)
        })
        .collect::<sgq_core::Result<Vec<_>>>()?;
    let report = ScanReport {
        l,
        axes: scan.axes.iter().map(|a| a.class.to_string()).collect(),
        points,
    };
    let mut sink = Sink::new(cfg, "phase-scan", out_dir)?;
    sink.json(&report)?;
    sink.csv(|buf| write_scan_csv(&report.points, buf))?;
    Ok(sink.done(format!("{} grid points", report.points.len())))
}

#[derive(Serialize)]
struct DualityReport {
    algebra: Option<AlgebraCheck>,
    pairs: Vec<DualPair>,
    max_deviation: f64,
}

pub fn duality_check(cfg: &ExperimentConfig, out_dir: Option<&PathBuf>) -> Outcome<Written> {
    let d = cfg.duality.as_ref().ok_or_else(|| config_err("missing `duality` section"))?;
    if d.sizes.is_empty() || d.lambdas.is_empty() {
        return Err(config_err("`sizes` and `lambdas` must be nonempty"));
    }
    if d.lambdas.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(config_err("`lambdas` must be positive"));
    }
    let algebra = d.algebra_l.map(check_dual_algebra).transpose()?;
    let jobs: Vec<(usize, f64)> = d.sizes.iter().flat_map(|&l| d.lambdas.iter().map(move |&x| (l, x))).collect();
    let pairs = jobs
        .par_iter()
        .map(|&(l, x)| spectrum_duality_check(l, x))
        .collect::<sgq_core::Result<Vec<_>>>()?;
    let max_deviation = pairs.iter().map(|p| p.max_deviation).fold(0.0, f64::max);
    let report = DualityReport {
        algebra,
        pairs,
        max_deviation,
    };
    let mut sink = Sink::new(cfg, "duality-check", out_dir)?;
    sink.json(&report)?;
    sink.csv(|buf| {
        use std::io::Write;
        writeln!(buf, "l,lambda,max_deviation")?;
        for p in &report.pairs {
            writeln!(buf, "{},{:.16e},{:.16e}", p.l, p.lambda, p.max_deviation)?;
        }
        Ok(())
    })?;
    let violations = report.algebra.map_or(String::new(), |a| format!(", {} algebra violations", a.violations));
    Ok(sink.done(format!("max deviation {:.3e}{violations}", report.max_deviation)))
}
