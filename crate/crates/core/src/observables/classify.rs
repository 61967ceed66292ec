use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::measures::{dimer_order_operator, rung_singlet_density, string_order};
use crate::error::{Error, Result};
use crate::hilbert::{HalfInt, SpinBasis};
use crate::logical::plus_twist_operator;
use crate::models::{assemble, ladder, CouplingAssignment, CouplingClass, LatticeLayout};
use crate::spectral::{lowest_eigenpairs_with, LanczosOptions};
use crate::{Operator, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    C,
    S,
    H,
    R,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::C => "C",
            PhaseLabel::S => "S",
            PhaseLabel::H => "H",
            PhaseLabel::R => "R",
            PhaseLabel::Unclassified => "unclassified",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub couplings: CouplingAssignment,
    pub observables: BTreeMap<String, f64>,
    pub label: PhaseLabel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// "Nonzero" means `|value|` above this.
    pub threshold: f64,
    /// Levels computed when looking for the low-energy cluster.
    pub levels: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            threshold: 0.05,
            levels: 6,
            seed: 0x5eed,
        }
    }
}

/// Quasi-degenerate low-energy cluster of a ladder Hamiltonian.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    pub layout: LatticeLayout,
    pub energies: Vec<f64>,
    /// States below the largest gap among the lowest levels.
    pub cluster: Vec<State>,
    pub gap: f64,
    /// The two lowest states.
    pub cluster_pair: Vec<State>,
}

/// Low-energy cluster of the `2×L` periodic ladder at `couplings`.
pub fn ladder_ground_space(couplings: &CouplingAssignment, l: usize, opts: &ClassifyOptions) -> Result<GroundSpace> {
    let get = |c| couplings.get(c).unwrap_or(0.0);
    let layout = ladder(
        l,
        get(CouplingClass::JLeg),
        get(CouplingClass::J2nn),
        get(CouplingClass::JRung),
        get(CouplingClass::JDiag),
        true,
    )?;
    let basis = Arc::new(SpinBasis::new(2 * l, Some(HalfInt(0)))?);
    let h = assemble(&layout, &layout.couplings, &basis)?;
    let k = opts.levels.min(basis.dim());
    let sol = lowest_eigenpairs_with(&h, &LanczosOptions::new(k, 1e-9).with_seed(opts.seed))?;
    let e = &sol.eigenvalues;
    // cluster ends at the largest gap among the first few levels
    let upto = (k - 1).min(4);
    let mut n = 1;
    let mut gap = if k > 1 { e[1] - e[0] } else { f64::INFINITY };
    for m in 2..=upto {
        if e[m] - e[m - 1] > gap + 1e-9 {
            gap = e[m] - e[m - 1];
            n = m;
        }
    }
    Ok(GroundSpace {
        layout,
        energies: e.clone(),
        cluster: sol.eigenvectors[..n].to_vec(),
        gap,
        cluster_pair: sol.eigenvectors[..2.min(k)].to_vec(),
    })
}

fn restricted(op: &Operator, states: &[State]) -> Result<DMatrix<Complex64>> {
    let imgs: Vec<State> = states.iter().map(|s| op.apply(s)).collect::<Result<_>>()?;
    let n = states.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = states[i].inner(&imgs[j])?;
        }
    }
    Ok(m)
}

fn extreme_eigen(m: &DMatrix<Complex64>) -> (f64, usize, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let (k, v) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bk, bv), (k, &v)| if v.abs() > bv.abs() + 1e-12 { (k, v) } else { (bk, bv) });
    (v, k, eig.eigenvectors)
}

/// Classifies a computed ground space.
pub fn classify_ground_space(gs: &GroundSpace, couplings: &CouplingAssignment, opts: &ClassifyOptions) -> Result<PhasePoint> {
    let th = opts.threshold;
    let layout = &gs.layout;
    let l = layout.length();
    let basis = gs.cluster[0].basis().clone();
    let d1 = dimer_order_operator(&basis, layout, 0)?;
    let d2 = dimer_order_operator(&basis, layout, 1)?;
    // dimer orders inside the two lowest states, the would-be code space
    let pair = &gs.cluster_pair;
    let m1 = restricted(&d1, pair)?;
    let m2 = restricted(&d2, pair)?;
    let (same, ks, vs) = extreme_eigen(&((&m1 + &m2) * Complex64::new(0.5, 0.0)));
    let (opp, _, _) = extreme_eigen(&((&m1 - &m2) * Complex64::new(0.5, 0.0)));

    // representative: the symmetry-broken state with the largest aligned order
    let coeffs = vs.column(ks);
    let mut rep = State::zeros(basis.clone());
    for (c, s) in coeffs.iter().zip(pair) {
        rep.axpy(*c, s)?;
    }
    let n = gs.cluster.len() as f64;
    let mut rung = 0.0;
    let mut string = 0.0;
    for s in &gs.cluster {
        rung += rung_singlet_density(s, layout)? / n;
        string += string_order(s, layout, 0, l / 2)? / n;
    }
    let rungs: Vec<(usize, usize)> = (0..l).map(|k| (layout.ladder_site(0, k), layout.ladder_site(1, k))).collect();
    let fplus = plus_twist_operator(&basis, &rungs)?;
    let twist_plus = fplus.expectation(&gs.cluster[0])?.re;

    let dimer = same.abs().max(opp.abs());
    let label = if dimer > th {
        if same.abs() - opp.abs() > th {
            PhaseLabel::C
        } else if opp.abs() - same.abs() > th {
            PhaseLabel::S
        } else {
            PhaseLabel::Unclassified
        }
    } else if rung - 0.5 > th && string.abs() < th {
        PhaseLabel::R
    } else if string.abs() > th && 0.5 - rung > th {
        PhaseLabel::H
    } else {
        PhaseLabel::Unclassified
    };

    let mut obs = BTreeMap::new();
    obs.insert("dimer_aligned".into(), same);
    obs.insert("dimer_staggered".into(), opp);
    obs.insert("dimer_leg1".into(), super::dimer_order(&rep, layout, 0)?);
    obs.insert("dimer_leg2".into(), super::dimer_order(&rep, layout, 1)?);
    obs.insert("rung_singlet_density".into(), rung);
    obs.insert("string_order".into(), string);
    obs.insert("plus_twist".into(), twist_plus);
    obs.insert("cluster_size".into(), n);
    obs.insert("cluster_gap".into(), gs.gap);
    for (k, e) in gs.energies.iter().enumerate() {
        obs.insert(format!("e{k}"), *e);
    }
    Ok(PhasePoint {
        couplings: couplings.clone(),
        observables: obs,
        label,
    })
}

/// Ground-space classification of the `2×L` ladder per Table I.
pub fn classify_phase(couplings: &CouplingAssignment, l: usize) -> Result<PhasePoint> {
    classify_with(couplings, l, &ClassifyOptions::default())
}

pub fn classify_with(couplings: &CouplingAssignment, l: usize, opts: &ClassifyOptions) -> Result<PhasePoint> {
    let gs = ladder_ground_space(couplings, l, opts)?;
    classify_ground_space(&gs, couplings, opts)
}

/// One CSV row per point: couplings, observables, label.
pub fn write_scan_csv<W: Write>(points: &[PhasePoint], out: W) -> Result<()> {
    let mut classes: Vec<CouplingClass> = points.iter().flat_map(|p| p.couplings.0.keys().copied()).collect();
    classes.sort();
    classes.dedup();
    let mut names: Vec<String> = points.iter().flat_map(|p| p.observables.keys().cloned()).collect();
    names.sort();
    names.dedup();
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = classes
        .iter()
        .map(|c| c.name().to_string())
        .chain(names.iter().cloned())
        .chain(std::iter::once("label".to_string()))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for p in points {
        let row: Vec<String> = classes
            .iter()
            .map(|c| p.couplings.get(*c).map(fmt17).unwrap_or_default())
            .chain(names.iter().map(|n| p.observables.get(n).copied().map(fmt17).unwrap_or_default()))
            .chain(std::iter::once(p.label.to_string()))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
