use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named coupling class; the serialized name is the one used in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CouplingClass {
    #[serde(rename = "J_leg")]
    JLeg,
    #[serde(rename = "J_2nn")]
    J2nn,
    /// Stagger amplitude `J·δ` in energy units.
    #[serde(rename = "J_stagger_delta")]
    JStaggerDelta,
    #[serde(rename = "J_rung")]
    JRung,
    #[serde(rename = "J_diag")]
    JDiag,
    #[serde(rename = "J_corner")]
    JCorner,
    #[serde(rename = "J_glue")]
    JGlue,
    /// Second-neighbour ring bonds spanning a corner pair.
    #[serde(rename = "J_corner_2nn")]
    JCorner2nn,
    /// Second-neighbour bonds of the glued loop spanning a glue bond.
    #[serde(rename = "J_glue_2nn")]
    JGlue2nn,
    /// Pauli `Z Z` bonds of the transverse-field Ising chain.
    #[serde(rename = "ising_lambda")]
    IsingLambda,
    /// Pauli `X` site terms of the transverse-field Ising chain.
    #[serde(rename = "transverse_field")]
    TransverseField,
}

impl CouplingClass {
    pub const ALL: [CouplingClass; 11] = [
        CouplingClass::JLeg,
        CouplingClass::J2nn,
        CouplingClass::JStaggerDelta,
        CouplingClass::JRung,
        CouplingClass::JDiag,
        CouplingClass::JCorner,
        CouplingClass::JGlue,
        CouplingClass::JCorner2nn,
        CouplingClass::JGlue2nn,
        CouplingClass::IsingLambda,
        CouplingClass::TransverseField,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingClass::JLeg => "J_leg",
            CouplingClass::J2nn => "J_2nn",
            CouplingClass::JStaggerDelta => "J_stagger_delta",
            CouplingClass::JRung => "J_rung",
            CouplingClass::JDiag => "J_diag",
            CouplingClass::JCorner => "J_corner",
            CouplingClass::JGlue => "J_glue",
            CouplingClass::JCorner2nn => "J_corner_2nn",
            CouplingClass::JGlue2nn => "J_glue_2nn",
            CouplingClass::IsingLambda => "ising_lambda",
            CouplingClass::TransverseField => "transverse_field",
        }
    }

    pub fn is_ising(self) -> bool {
        matches!(self, CouplingClass::IsingLambda | CouplingClass::TransverseField)
    }
}

impl fmt::Display for CouplingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CouplingClass::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown coupling class `{s}`")))
    }
}

/// Values for coupling classes, in units of `J_leg = 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CouplingAssignment(pub BTreeMap<CouplingClass, f64>);

impl CouplingAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, class: CouplingClass, value: f64) -> Self {
        self.0.insert(class, value);
        self
    }

    pub fn set(&mut self, class: CouplingClass, value: f64) {
        self.0.insert(class, value);
    }

    pub fn get(&self, class: CouplingClass) -> Option<f64> {
        self.0.get(&class).copied()
    }

    pub fn require(&self, class: CouplingClass) -> Result<f64> {
        self.get(class)
            .ok_or_else(|| Error::MissingCoupling(class.name().into()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CouplingAssignment(self.0.iter().map(|(&k, &v)| (k, v * factor)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.0 {
            if !v.is_finite() {
                return Err(Error::invalid(format!("coupling {k} is not finite ({v})")));
            }
        }
        Ok(())
    }

    /// Overrides entries of `self` with those of `other`.
    pub fn merged(&self, other: &CouplingAssignment) -> Self {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(&k, &v)| (k, v)));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ring: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub leg: Option<usize>,
    pub position: usize,
}

/// A two-site term. Heisenberg classes give `weight · S_i·S_j`,
/// `ising_lambda` gives `-weight · Z_i Z_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub class: CouplingClass,
    #[serde(default = "one")]
    pub weight: f64,
}

/// A one-site term (`-weight · X_i` for the transverse field).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub site: usize,
    pub class: CouplingClass,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Chain,
    Ladder,
    Tfim,
    RingNetwork,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerKind {
    Square,
    Triangular,
}

/// A corner joining 2 (square) or 3 (triangular) rings.
///
/// Each ring contributes the consecutive pair at positions `(p, p+1 mod L)`,
/// called `end` and `start`. Glue bonds join the `end` of ring `k` to the
/// `start` of ring `k+1` (cyclically), so the glued loop runs through every
/// ring from `start` to `end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    pub kind: CornerKind,
    pub rings: Vec<usize>,
    /// Position of each ring's `end` site; defaults to `L-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<usize>>,
}

impl CornerSpec {
    pub fn square(a: usize, b: usize) -> Self {
        CornerSpec {
            kind: CornerKind::Square,
            rings: vec![a, b],
            positions: None,
        }
    }

    pub fn triangular(a: usize, b: usize, c: usize) -> Self {
        CornerSpec {
            kind: CornerKind::Triangular,
            rings: vec![a, b, c],
            positions: None,
        }
    }
}

/// Sites of one corner after resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub kind: CornerKind,
    pub rings: Vec<usize>,
    /// `(end, start)` site ids per ring.
    pub pairs: Vec<(usize, usize)>,
    /// Site ids of the glued loop, starting at the first ring's `start`.
    pub loop_sites: Vec<usize>,
}

impl Corner {
    /// Named corner sites. Square: `u, l, d, r`; triangular:
    /// `ul, ur, lu, ld, ru, rd`.
    pub fn labels(&self) -> Vec<(&'static str, usize)> {
        let p = &self.pairs;
        match self.kind {
            CornerKind::Square => vec![("u", p[0].1), ("l", p[0].0), ("d", p[1].1), ("r", p[1].0)],
            CornerKind::Triangular => vec![
                ("ul", p[0].0),
                ("ur", p[0].1),
                ("lu", p[1].1),
                ("ld", p[1].0),
                ("ru", p[2].0),
                ("rd", p[2].1),
            ],
        }
    }

    pub fn site(&self, label: &str) -> Option<usize> {
        self.labels().into_iter().find(|(l, _)| *l == label).map(|(_, s)| s)
    }

    /// Glue bonds `(end_k, start_{k+1})`.
    pub fn glue_bonds(&self) -> Vec<(usize, usize)> {
        let n = self.pairs.len();
        (0..n).map(|k| (self.pairs[k].0, self.pairs[(k + 1) % n].1)).collect()
    }
}

/// Sites, bonds and coupling classes of a lattice model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeLayout {
    pub kind: LayoutKind,
    pub sites: Vec<Site>,
    pub bonds: Vec<Bond>,
    #[serde(default)]
    pub fields: Vec<Field>,
    /// Site ids of each ring (or leg) in traversal order.
    #[serde(default)]
    pub rings: Vec<Vec<usize>>,
    #[serde(default)]
    pub corners: Vec<Corner>,
    pub pbc: bool,
    /// Coupling values the builder was called with.
    pub couplings: CouplingAssignment,
}

impl LatticeLayout {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Classes that occur in some bond or field.
    pub fn classes(&self) -> Vec<CouplingClass> {
        let mut v: Vec<_> = self
            .bonds
            .iter()
            .map(|b| b.class)
            .chain(self.fields.iter().map(|f| f.class))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn bonds_of(&self, class: CouplingClass) -> impl Iterator<Item = &Bond> {
        self.bonds.iter().filter(move |b| b.class == class)
    }

    /// Number of rungs for ladders, sites per ring otherwise.
    pub fn length(&self) -> usize {
        self.rings.first().map_or(self.n_sites(), Vec::len)
    }

    /// Site id on `leg` at rung `n` of a ladder.
    pub fn ladder_site(&self, leg: usize, n: usize) -> usize {
        self.rings[leg][n]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        for (k, s) in self.sites.iter().enumerate() {
            if s.id != k {
                return Err(Error::invalid(format!("site {k} carries id {}", s.id)));
            }
        }
        for b in &self.bonds {
            if b.i >= n || b.j >= n {
                return Err(Error::invalid(format!("bond ({}, {}) references a missing site", b.i, b.j)));
            }
            if b.i == b.j {
                return Err(Error::invalid(format!("self-bond on site {}", b.i)));
            }
            if !b.weight.is_finite() {
                return Err(Error::invalid("non-finite bond weight"));
            }
        }
        for f in &self.fields {
            if f.site >= n {
                return Err(Error::invalid(format!("field on missing site {}", f.site)));
            }
        }
        self.couplings.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let l: LatticeLayout = serde_json::from_str(s)?;
        l.validate()?;
        Ok(l)
    }
}
