use super::layout::*;
use crate::error::{Error, Result};

fn chain_sites(l: usize) -> Vec<Site> {
    (0..l)
        .map(|n| Site {
            id: n,
            ring: Some(0),
            leg: None,
            position: n,
        })
        .collect()
}

fn bond(i: usize, j: usize, class: CouplingClass, weight: f64) -> Bond {
    Bond { i, j, class, weight }
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("couplings must be finite"));
    }
    Ok(())
}

/// `J1 Σ S_n·S_{n+1} + J2 Σ S_n·S_{n+2}`; second-neighbour bonds are omitted
/// when `J2 = 0`.
pub fn chain_j1j2(l: usize, j1: f64, j2: f64, pbc: bool) -> Result<LatticeLayout> {
    if l < 4 {
        return Err(Error::invalid(format!("chain needs L >= 4, got {l}")));
    }
    check_finite(&[j1, j2])?;
    let mut bonds = Vec::new();
    let nn = if pbc { l } else { l - 1 };
    for n in 0..nn {
        bonds.push(bond(n, (n + 1) % l, CouplingClass::JLeg, 1.0));
    }
    let mut couplings = CouplingAssignment::new().with(CouplingClass::JLeg, j1);
    if j2 != 0.0 {
        let nnn = if pbc { l } else { l - 2 };
        for n in 0..nnn {
            bonds.push(bond(n, (n + 2) % l, CouplingClass::J2nn, 1.0));
        }
        couplings.set(CouplingClass::J2nn, j2);
    }
    Ok(LatticeLayout {
        kind: LayoutKind::Chain,
        sites: chain_sites(l),
        bonds,
        fields: vec![],
        rings: vec![(0..l).collect()],
        corners: vec![],
        pbc,
        couplings,
    })
}

/// Bond `(n, n+1)` has strength `J(1 + (-1)^n δ)`.
pub fn chain_staggered(l: usize, j: f64, delta: f64, pbc: bool) -> Result<LatticeLayout> {
    if delta.abs() > 1.0 {
        return Err(Error::invalid(format!("|delta| must be <= 1, got {delta}")));
    }
    if l < 2 {
        return Err(Error::invalid("chain needs at least two sites"));
    }
    if pbc && l % 2 == 1 {
        return Err(Error::invalid("a periodic staggered chain needs even L"));
    }
    check_finite(&[j, delta])?;
    let mut bonds = Vec::new();
    let nn = if pbc { l } else { l - 1 };
    for n in 0..nn {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        bonds.push(bond(n, (n + 1) % l, CouplingClass::JLeg, 1.0));
        bonds.push(bond(n, (n + 1) % l, CouplingClass::JStaggerDelta, s));
    }
    Ok(LatticeLayout {
        kind: LayoutKind::Chain,
        sites: chain_sites(l),
        bonds,
        fields: vec![],
        rings: vec![(0..l).collect()],
        corners: vec![],
        pbc,
        couplings: CouplingAssignment::new()
            .with(CouplingClass::JLeg, j)
            .with(CouplingClass::JStaggerDelta, j * delta),
    })
}

/// Two-leg ladder on `2L` sites; leg `a` rung `n` is site `a·L + n`.
/// Both plaquette diagonals carry `J_diag`.
pub fn ladder(
    l: usize,
    j_leg: f64,
    j_2nn: f64,
    j_rung: f64,
    j_diag: f64,
    pbc: bool,
) -> Result<LatticeLayout> {
    if l < 4 {
        return Err(Error::invalid(format!("ladder needs L >= 4, got {l}")));
    }
    check_finite(&[j_leg, j_2nn, j_rung, j_diag])?;
    let id = |leg: usize, n: usize| leg * l + (n % l);
    let sites = (0..2 * l)
        .map(|k| Site {
            id: k,
            ring: None,
            leg: Some(k / l),
            position: k % l,
        })
        .collect();
    let nn = if pbc { l } else { l - 1 };
    let nnn = if pbc { l } else { l - 2 };
    let mut bonds = Vec::new();
    for leg in 0..2 {
        for n in 0..nn {
            bonds.push(bond(id(leg, n), id(leg, n + 1), CouplingClass::JLeg, 1.0));
        }
    }
    for leg in 0..2 {
        for n in 0..nnn {
            bonds.push(bond(id(leg, n), id(leg, n + 2), CouplingClass::J2nn, 1.0));
        }
    }
    for n in 0..l {
        bonds.push(bond(id(0, n), id(1, n), CouplingClass::JRung, 1.0));
    }
    for n in 0..nn {
        bonds.push(bond(id(0, n), id(1, n + 1), CouplingClass::JDiag, 1.0));
        bonds.push(bond(id(1, n), id(0, n + 1), CouplingClass::JDiag, 1.0));
    }
    Ok(LatticeLayout {
        kind: LayoutKind::Ladder,
        sites,
        bonds,
        fields: vec![],
        rings: vec![(0..l).collect(), (l..2 * l).collect()],
        corners: vec![],
        pbc,
        couplings: CouplingAssignment::new()
            .with(CouplingClass::JLeg, j_leg)
            .with(CouplingClass::J2nn, j_2nn)
            .with(CouplingClass::JRung, j_rung)
            .with(CouplingClass::JDiag, j_diag),
    })
}

/// `H = -Σ X_n - λ Σ Z_n Z_{n+1}`.
pub fn tfim_chain(l: usize, lambda: f64, pbc: bool) -> Result<LatticeLayout> {
    if l < 2 {
        return Err(Error::invalid(format!("TFIM chain needs L >= 2, got {l}")));
    }
    check_finite(&[lambda])?;
    let nn = if pbc && l > 2 { l } else { l - 1 };
    let bonds = (0..nn)
        .map(|n| bond(n, (n + 1) % l, CouplingClass::IsingLambda, 1.0))
        .collect();
    let fields = (0..l)
        .map(|n| Field {
            site: n,
            class: CouplingClass::TransverseField,
            weight: 1.0,
        })
        .collect();
    Ok(LatticeLayout {
        kind: LayoutKind::Tfim,
        sites: chain_sites(l),
        bonds,
        fields,
        rings: vec![(0..l).collect()],
        corners: vec![],
        pbc,
        couplings: CouplingAssignment::new()
            .with(CouplingClass::TransverseField, 1.0)
            .with(CouplingClass::IsingLambda, lambda),
    })
}

/// Per-ring parameters for [`ring_network`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RingSpec {
    pub l: usize,
    pub j1: f64,
    pub j2: f64,
}

/// Periodic J1–J2 rings joined at corners.
///
/// Rings are numbered consecutively (ring `k` occupies a contiguous block of
/// site ids). The ring bond across each corner pair moves to class
/// `J_corner`, second-neighbour ring bonds spanning it to `J_corner_2nn`; the
/// inter-ring bonds are `J_glue` and, when rings carry `J2`, the glued loop's
/// spanning second-neighbour bonds are `J_glue_2nn`. Bond weights are the
/// ring couplings relative to ring 0, whose `J1`/`J2` set the class values.
/// `J_glue` and `J_glue_2nn` default to 0.
pub fn ring_network(rings: &[RingSpec], corners: &[CornerSpec]) -> Result<LatticeLayout> {
    if rings.is_empty() {
        return Err(Error::invalid("ring network needs at least one ring"));
    }
    for r in rings {
        if r.l < 4 {
            return Err(Error::invalid(format!("ring needs L >= 4, got {}", r.l)));
        }
        check_finite(&[r.j1, r.j2])?;
    }
    let j1_ref = rings[0].j1;
    let j2_ref = rings[0].j2;
    let rel = |v: f64, r: f64| if r != 0.0 { v / r } else { v };
    let has_j2 = rings.iter().any(|r| r.j2 != 0.0);

    let mut sites = Vec::new();
    let mut ring_sites = Vec::new();
    for (k, r) in rings.iter().enumerate() {
        let base = sites.len();
        ring_sites.push((base..base + r.l).collect::<Vec<_>>());
        for p in 0..r.l {
            sites.push(Site {
                id: base + p,
                ring: Some(k),
                leg: None,
                position: p,
            });
        }
    }

    // resolve corners
    let mut used = vec![false; sites.len()];
    let mut resolved = Vec::new();
    for spec in corners {
        let want = match spec.kind {
            CornerKind::Square => 2,
            CornerKind::Triangular => 3,
        };
        if spec.rings.len() != want {
            return Err(Error::invalid(format!(
                "{:?} corner needs {want} rings, got {}",
                spec.kind,
                spec.rings.len()
            )));
        }
        let mut pairs = Vec::new();
        let mut loop_sites = Vec::new();
        for (slot, &rk) in spec.rings.iter().enumerate() {
            let rs = ring_sites
                .get(rk)
                .ok_or_else(|| Error::invalid(format!("corner references missing ring {rk}")))?;
            let l = rs.len();
            let p = match &spec.positions {
                Some(ps) => *ps
                    .get(slot)
                    .ok_or_else(|| Error::invalid("one corner position per ring"))?,
                None => l - 1,
            };
            if p >= l {
                return Err(Error::invalid(format!("corner position {p} outside ring of {l}")));
            }
            let (end, start) = (rs[p], rs[(p + 1) % l]);
            for s in [end, start] {
                if used[s] {
                    return Err(Error::invalid(format!("site {s} assigned to two corners")));
                }
                used[s] = true;
            }
            pairs.push((end, start));
            loop_sites.extend((0..l).map(|q| rs[(p + 1 + q) % l]));
        }
        let mut sorted = spec.rings.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != spec.rings.len() {
            return Err(Error::invalid("a corner joins distinct rings"));
        }
        resolved.push(Corner {
            kind: spec.kind,
            rings: spec.rings.clone(),
            pairs,
            loop_sites,
        });
    }

    let is_corner_pair = |a: usize, b: usize| {
        resolved
            .iter()
            .any(|c| c.pairs.iter().any(|&(e, s)| (a, b) == (e, s) || (a, b) == (s, e)))
    };
    let spans_corner = |a: usize, mid: usize, b: usize| is_corner_pair(a, mid) || is_corner_pair(mid, b);

    let mut bonds = Vec::new();
    for (k, r) in rings.iter().enumerate() {
        let rs = &ring_sites[k];
        for p in 0..r.l {
            let (a, b) = (rs[p], rs[(p + 1) % r.l]);
            let class = if is_corner_pair(a, b) {
                CouplingClass::JCorner
            } else {
                CouplingClass::JLeg
            };
            bonds.push(bond(a, b, class, rel(r.j1, j1_ref)));
        }
        if r.j2 != 0.0 {
            for p in 0..r.l {
                let (a, m, b) = (rs[p], rs[(p + 1) % r.l], rs[(p + 2) % r.l]);
                let class = if spans_corner(a, m, b) {
                    CouplingClass::JCorner2nn
                } else {
                    CouplingClass::J2nn
                };
                bonds.push(bond(a, b, class, rel(r.j2, j2_ref)));
            }
        }
    }
    for c in &resolved {
        for (e, s) in c.glue_bonds() {
            bonds.push(bond(e, s, CouplingClass::JGlue, 1.0));
        }
        if has_j2 {
            let n = c.loop_sites.len();
            for q in 0..n {
                let (a, m, b) = (c.loop_sites[q], c.loop_sites[(q + 1) % n], c.loop_sites[(q + 2) % n]);
                let glue = c.glue_bonds();
                let is_glue = |x: usize, y: usize| glue.iter().any(|&(e, s)| (x, y) == (e, s));
                if is_glue(a, m) || is_glue(m, b) {
                    bonds.push(bond(a, b, CouplingClass::JGlue2nn, 1.0));
                }
            }
        }
    }

    let mut couplings = CouplingAssignment::new().with(CouplingClass::JLeg, j1_ref);
    if has_j2 {
        couplings.set(CouplingClass::J2nn, if j2_ref != 0.0 { j2_ref } else { 1.0 });
    }
    if !resolved.is_empty() {
        couplings.set(CouplingClass::JCorner, j1_ref);
        couplings.set(CouplingClass::JGlue, 0.0);
        if has_j2 {
            couplings.set(CouplingClass::JCorner2nn, if j2_ref != 0.0 { j2_ref } else { 1.0 });
            couplings.set(CouplingClass::JGlue2nn, 0.0);
        }
    }
    let layout = LatticeLayout {
        kind: LayoutKind::RingNetwork,
        sites,
        bonds,
        fields: vec![],
        rings: ring_sites,
        corners: resolved,
        pbc: true,
        couplings,
    };
    layout.validate()?;
    Ok(layout)
}

/// The isolated spins of one corner: square `u, l, d, r` = sites `0..4`,
/// triangular `ul, ur, lu, ld, ru, rd` = sites `0..6`, with `J_corner = 1`
/// and `J_glue = 0`.
pub fn corner_cluster(kind: CornerKind) -> Result<LatticeLayout> {
    let (n, corner, glue): (usize, Vec<(usize, usize)>, Vec<(usize, usize)>) = match kind {
        CornerKind::Square => (4, vec![(0, 1), (2, 3)], vec![(0, 3), (2, 1)]),
        CornerKind::Triangular => (
            6,
            vec![(0, 1), (2, 3), (4, 5)],
            vec![(0, 2), (1, 4), (3, 5)],
        ),
    };
    let sites = (0..n)
        .map(|k| Site {
            id: k,
            ring: None,
            leg: None,
            position: k,
        })
        .collect();
    let bonds = corner
        .iter()
        .map(|&(i, j)| bond(i, j, CouplingClass::JCorner, 1.0))
        .chain(glue.iter().map(|&(i, j)| bond(i, j, CouplingClass::JGlue, 1.0)))
        .collect();
    Ok(LatticeLayout {
        kind: LayoutKind::RingNetwork,
        sites,
        bonds,
        fields: vec![],
        rings: vec![],
        corners: vec![],
        pbc: false,
        couplings: CouplingAssignment::new()
            .with(CouplingClass::JCorner, 1.0)
            .with(CouplingClass::JGlue, 0.0),
    })
}
